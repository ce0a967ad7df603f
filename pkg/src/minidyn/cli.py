"""
Command-line front end.

    minidyn analyze prog.mdyn --json report.json
    minidyn query prog.mdyn --at 13 --path '$arr[1][2]'
    minidyn oracle-check prog.mdyn --pool 0,1,2,3,k
"""

import argparse
import json
import sys

from . import bench
from .cfg import build_cfg
from .core import AnalysisError, format_value, sorted_values
from .engine import EngineConfig, analyze
from .lang import ParseError, lower_access, parse, parse_query_path
from .oracle import DEFAULT_POOL, check_soundness
from .read import eval_path

POINT_HELP = (
    "source line or 'exit'; a line means the OUT state of the last statement "
    "starting on it, and the join of an if or while is addressed by the line "
    "of its closing brace"
)


class UsageError(Exception):
    pass


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise UsageError("%s: %s" % (path, e.strerror or e))


def _load(path):
    source = _read(path)
    try:
        return parse(source)
    except ParseError as e:
        raise UsageError("%s:%d:%d: %s" % (path, e.line, e.column, e.message))


def _config(args):
    return EngineConfig(depth_limit=args.depth_limit, value_width_limit=args.value_limit)


def _parse_pool(text):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            out.append(int(item))
        except ValueError:
            out.append(item.strip("'\""))
    if not out:
        raise UsageError("--pool needs at least one value")
    return tuple(out)


def format_values(values):
    return " ".join(format_value(v) for v in sorted_values(values))


def cmd_analyze(args, out):
    program = _load(args.file)
    cfg = build_cfg(program)
    result = analyze(cfg, _config(args))
    print("nodes: %d" % len(cfg), file=out)
    print("iterations: %d" % result.iterations, file=out)
    print("exit variables: %d" % len(result.exit_state), file=out)
    print("widenings: %d" % len(result.widenings), file=out)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            json.dump(result.to_json(), f, indent=1, ensure_ascii=False)
            f.write("\n")
    return 0


def cmd_query(args, out):
    program = _load(args.file)
    paths = []
    for text in args.path:
        try:
            paths.append(lower_access(parse_query_path(text)))
        except ParseError as e:
            raise UsageError("bad query path %r: %s" % (text, e))
    result = analyze(build_cfg(program), _config(args))
    try:
        state = result.state_at(args.at)
    except (KeyError, ValueError):
        raise UsageError("no analyzed statement at %r" % args.at)
    for ap in paths:
        print(format_values(eval_path(state, ap)), file=out)
    return 0


def cmd_dump_cfg(args, out):
    out.write(build_cfg(_load(args.file)).to_dot())
    return 0


def cmd_oracle_check(args, out):
    program = _load(args.file)
    result = analyze(build_cfg(program), _config(args))
    report = check_soundness(program, result, pool=args.pool, step_budget=args.budget, seed=args.seed)
    json.dump(report.to_json(), out, indent=1)
    out.write("\n")
    return 1 if report.violations else 0


def cmd_gen_bench(args, out):
    text = bench.generate(bench.BenchSpec(args.n, args.merged))
    try:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise UsageError("%s: %s" % (args.output, e.strerror or e))
    return 0


def cmd_run_bench(args, out):
    rows = bench.run_scaling(args.max_n, repeats=args.repeats, min_n=args.min_n)
    text = bench.to_csv(rows)
    if args.output == "-":
        out.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="minidyn", description="Value and points-to analysis for MiniDyn programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_limits(sp):
        sp.add_argument("--depth-limit", type=int, default=8, help="maximal array nesting tracked (default 8)")
        sp.add_argument("--value-limit", type=int, default=16,
                        help="literals kept per value set before widening to star (default 16)")

    sp = sub.add_parser("analyze", help="analyze a program and print a summary")
    sp.add_argument("file")
    sp.add_argument("--json", metavar="OUT", help="write the full per-node report as JSON")
    with_limits(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("query", help="print the values readable through access paths",
                        description="Print the sorted values of each --path at --at. " + POINT_HELP + ".")
    sp.add_argument("file")
    sp.add_argument("--at", required=True, help=POINT_HELP)
    sp.add_argument("--path", action="append", required=True,
                    help="access path such as '$arr[1][2]'; '*' is any index, '@unknown' or '•' the unknown field")
    with_limits(sp)
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("dump-cfg", help="print the control-flow graph in DOT")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_dump_cfg)

    sp = sub.add_parser("oracle-check", help="check the analysis against concrete runs")
    sp.add_argument("file")
    sp.add_argument("--pool", type=_parse_pool, default=DEFAULT_POOL,
                    help="comma separated input values (default 0,1,2,3,k)")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--budget", type=int, default=10000, help="step budget per run")
    with_limits(sp)
    sp.set_defaults(func=cmd_oracle_check)

    sp = sub.add_parser("gen-bench", help="write a scaling benchmark program")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--merged", action="store_true", help="generate mCODE_n instead of CODE_n")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_gen_bench)

    sp = sub.add_parser("run-bench", help="run the scaling benchmarks and write CSV")
    sp.add_argument("--max-n", type=int, required=True)
    sp.add_argument("--min-n", type=int, default=0)
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_run_bench)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (UsageError, ValueError) as e:
        print("minidyn: %s" % e, file=sys.stderr)
        return 2
    except AnalysisError as e:
        print("minidyn: analysis failed: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
