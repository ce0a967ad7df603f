"""
Scaling benchmarks built from the running example.

``CODE_n`` is the body of the running example (everything after reading the
user input, up to the last copy into ``$arr2``) replicated ``2**n`` times, every
variable except ``$any`` renamed with a per-replica prefix. ``mCODE_n`` reads
``$any`` and puts one ``CODE_n`` in each arm of an ``if``; the arms use
different prefixes so that the join at the end has to merge every variable.
"""

import csv
import gc
import io
import re
import statistics
import time
from dataclasses import dataclass
from importlib import resources

from .cfg import build_cfg
from .engine import EngineConfig, analyze
from .lang import parse

MAX_N = 12

_VAR_RE = re.compile(r"\$([A-Za-z_][A-Za-z_0-9]*)")


@dataclass(frozen=True)
class BenchSpec:
    n: int
    merged: bool = False

    def __post_init__(self):
        if not 0 <= self.n <= MAX_N:
            raise ValueError("n must be between 0 and %d" % MAX_N)

    @property
    def variant(self):
        return "mCODE" if self.merged else "CODE"


def running_example():
    return resources.files("minidyn").joinpath("data/running_example.mdyn").read_text()


def fragment():
    """Lines 2 to 19 of the running example, comments and blank lines dropped."""
    lines = running_example().splitlines()[1:19]
    out = []
    for line in lines:
        line = line.split("//")[0].rstrip()
        if line.strip():
            out.append(line.strip())
    return out


def _prefixed(lines, prefix, indent):
    def rename(m):
        name = m.group(1)
        return m.group(0) if name == "any" else "$" + prefix + name

    out = []
    depth = 0
    for line in lines:
        if line.startswith("}"):
            depth -= 1
        out.append(indent + "    " * depth + _VAR_RE.sub(rename, line))
        if line.endswith("{"):
            depth += 1
    return out


def _code(n, first, indent=""):
    lines = []
    for k in range(first, first + 2 ** n):
        lines.extend(_prefixed(fragment(), "r%d_" % k, indent))
    return lines


def generate(spec):
    """MiniDyn source text of ``CODE_n`` or ``mCODE_n``."""
    if not spec.merged:
        return "\n".join(_code(spec.n, 0)) + "\n"
    reps = 2 ** spec.n
    lines = ["$any = input();", "if ($any) {"]
    lines += _code(spec.n, 0, "    ")
    lines.append("} else {")
    lines += _code(spec.n, reps, "    ")
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass
class BenchRow:
    variant: str
    n: int
    cfg_nodes: int
    variables: int
    wall_ms: float


def run_one(spec, config=None, repeats=1):
    cfg = build_cfg(parse(generate(spec)))
    times = []
    # like timeit, keep the cyclic collector out of the measurement
    enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repeats):
            t0 = time.perf_counter()
            result = analyze(cfg, config or EngineConfig())
            times.append((time.perf_counter() - t0) * 1000.0)
    finally:
        if enabled:
            gc.enable()
    return BenchRow(spec.variant, spec.n, len(cfg), len(result.exit_state), statistics.median(times))


def run_scaling(max_n, config=None, repeats=1, min_n=0):
    """Analyze ``CODE_n`` and ``mCODE_n`` for ``n`` in ``min_n..max_n``."""
    rows = []
    for n in range(min_n, max_n + 1):
        for merged in (False, True):
            rows.append(run_one(BenchSpec(n, merged), config, repeats))
    return rows


def to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "n", "cfg_nodes", "variables", "wall_ms"])
    for r in rows:
        w.writerow([r.variant, r.n, r.cfg_nodes, r.variables, "%.1f" % r.wall_ms])
    return buf.getvalue()
