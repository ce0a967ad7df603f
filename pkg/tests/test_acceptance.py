"""
Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run it alone with ``pytest tests/test_acceptance.py -s`` or
``python tests/test_acceptance.py``.
"""

import random
import sys
import time

import pytest

from minidyn.bench import BenchSpec, run_one, running_example
from minidyn.cfg import build_cfg
from minidyn.core import UNDEF, format_value, sorted_values
from minidyn.engine import EngineConfig, StateLimitExceeded, analyze, analyze_source, widen
from minidyn.lang import Program, While, parse
from minidyn.merge import leq, merge_states
from minidyn.oracle import check_soundness
from minidyn.randprog import random_program, sample_corpus

EXAMPLE = running_example()
POOL = (0, 1, 2, 3, "k")


def example_head(lines):
    return "\n".join(EXAMPLE.splitlines()[:lines]) + "\n"


def reads(result, at, *paths):
    return [set(result.eval(at, p)) for p in paths]


def criterion_1():
    t0 = time.perf_counter()
    r = analyze_source(example_head(13))
    got = set(r.eval("exit", "$arr[1][2]"))
    took = time.perf_counter() - t0
    assert got == {3, 6, 7, UNDEF}, got
    assert took < 1.0, took
    return "eval $arr[1][2] = {3, 6, 7, undef} in %.3f s" % took


def criterion_2():
    r = analyze_source(example_head(13))
    got = reads(r, 12, "$arr[1][2]", "$arr[1][1]", "$arr[2][2]", "$arr[2][1]")
    assert got == [{6, 7, UNDEF}, {7, UNDEF}, {6, UNDEF}, {UNDEF}], got
    return "four else-branch reads match"


def criterion_3():
    r = analyze_source(example_head(13))
    s = r.state_at(13)
    v = s.lookup(("arr", 2, 2))
    assert v is not None, "no variable at $arr[2][2]"
    assert s.values(v) == {6, UNDEF}, s.values(v)
    return "join state has $arr[2][2] = {6, undef}"


def criterion_4():
    r = analyze_source(EXAMPLE)
    got = reads(r, 18, "$arr2[2]", "$arr[2]", "$alias3")
    assert got == [{8}] * 3, got
    assert 9 in r.eval(19, "$arr[3]")
    return "line 18 reads {8} three times, line 19 $arr[3] has 9"


def criterion_5():
    r = analyze_source(example_head(13))
    s = r.state_at(12)
    v = s.lookup(("arr", 1, 2))
    assert v is not None, "no variable at $arr[1][2]"
    assert s.values(v) >= {6, UNDEF}, s.values(v)
    return "$arr[1][2] exists after line 12 with {%s}" % ", ".join(map(format_value, sorted_values(s.values(v))))


def soundness(config=None):
    program = parse(EXAMPLE)
    return check_soundness(program, analyze(build_cfg(program), config), pool=POOL)


def criterion_6():
    t0 = time.perf_counter()
    example = soundness()
    assert example.exhaustive and example.ok, [v.to_json() for v in example.violations[:3]]
    pairs, skipped = sample_corpus(500, seed=42)
    bad = []
    for i, (program, result) in enumerate(pairs):
        report = check_soundness(program, result, exhaustive_limit=125, samples=40, step_budget=300)
        if not report.ok:
            bad.append((i, report.violations[0].to_json()))
    took = time.perf_counter() - t0
    assert not bad, bad[:3]
    assert took < 60, took
    return "running example and 500 random programs: 0 violations (%d oversized replaced) in %.1f s" % (skipped, took)


def criterion_7():
    example = soundness(EngineConfig(weak_updates=False))
    assert example.violations, "mutation went unnoticed"
    hit = [v for v in example.violations if v.point == "stmt@19:1" and v.path == "$arr[3]" and v.concrete == 9]
    assert hit, "no witness for $arr[3] at line 19"
    assert hit[0].witness == [3], hit[0].witness
    return "%d violations, e.g. line 19 $arr[3] misses 9 with input %r" % (len(example.violations), hit[0].witness)


def criterion_8():
    nodes, variables = {}, {}
    for n in range(0, 4):
        for merged in (False, True):
            row = run_one(BenchSpec(n, merged))
            nodes[n, merged] = row.cfg_nodes
            variables[n, merged] = row.variables
            last = row
    consts = {nodes[n, True] - 2 * nodes[n, False] for n in (1, 2, 3)}
    assert len(consts) == 1, consts
    ratios = [variables[n + 1, m] / variables[n, m] for n in (1, 2) for m in (False, True)]
    assert all(1.8 <= q <= 2.1 for q in ratios), ratios
    assert last.wall_ms < 120000, last.wall_ms
    return "mCODE nodes = 2*CODE + %d, variable ratios %s, mCODE_3 in %.0f ms" % (
        consts.pop(), ", ".join("%.2f" % q for q in ratios), last.wall_ms)


def random_states(count, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        program = random_program(rng, max_stmts=12)
        cut = rng.randint(1, max(1, len(program.body)))
        prefix = Program(program.body[:cut])
        try:
            result = analyze(build_cfg(prefix), EngineConfig(check_invariants=True, max_variables=1500))
        except StateLimitExceeded:
            continue
        out.append(result.outs[rng.choice(sorted(result.outs))])
    return out


def criterion_9():
    states = random_states(200, seed=9)
    config = EngineConfig(value_width_limit=3)
    for a, b in zip(states, states[1:] + states[:1]):
        ab = merge_states([a, b])
        assert ab.isomorphic(merge_states([b, a])), "merge not commutative"
        assert merge_states([a, a.copy()]).isomorphic(a), "merge not idempotent"
        assert leq(a, ab) and leq(b, ab), "merge is not an upper bound"
        ab.validate()
        w = widen(a, config)
        assert leq(a, w), "widening not extensive"
        assert widen(w, config).isomorphic(w), "widening not idempotent"
    return "200 states: merge commutative, idempotent; widening extensive, idempotent; invariants hold"


def loop_depth(stmts):
    best = 0
    for s in stmts:
        if isinstance(s, While):
            best = max(best, 1 + loop_depth(s.body))
        else:
            for block in (getattr(s, "then", ()), getattr(s, "orelse", ())):
                best = max(best, loop_depth(block))
    return best


def criterion_10():
    rng = random.Random(10)
    deepest = {}
    for _ in range(500):
        program = random_program(rng, max_loops=3)
        result = analyze(build_cfg(program))
        assert result.iterations <= EngineConfig().max_iterations
        d = loop_depth(program.body)
        deepest[d] = deepest.get(d, 0) + 1
    assert deepest.get(3), deepest
    return "500 programs reach a fixpoint (loop nesting counts %s)" % dict(sorted(deepest.items()))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run(criterion):
    """Run one criterion; returns ``(ok, line)``."""
    n = CRITERIA.index(criterion) + 1
    try:
        detail = criterion()
    except Exception as e:
        return False, "criterion %d: FAIL - %s: %s" % (n, type(e).__name__, e)
    return True, "criterion %d: PASS - %s" % (n, detail)


@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.__name__ for c in CRITERIA])
def test_criterion(criterion, capsys):
    ok, line = run(criterion)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run(c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
