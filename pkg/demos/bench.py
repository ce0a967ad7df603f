"""Run the scaling benchmarks for n = 0..2 and print the CSV."""

from minidyn.bench import run_scaling, to_csv

print(to_csv(run_scaling(2)), end="")
