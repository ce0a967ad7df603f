import time

import pytest
from hypothesis import example, given, settings, strategies as st

import minidyn.engine as engine
from minidyn.cfg import JOIN, build_cfg
from minidyn.core import STAR, UNDEF, IterationLimitExceeded
from minidyn.engine import EngineConfig, StateLimitExceeded, analyze, analyze_source, widen
from minidyn.lang import While, parse
from minidyn.merge import leq
from minidyn.randprog import random_program
from minidyn.state import initial_state

from conftest import values


def test_then_branch_read(example_result):
    assert values(example_result, 5, "$t") == [1, UNDEF]


def test_else_branch_reads(example_result):
    assert values(example_result, 12, "$arr[1][2]") == [6, 7, UNDEF]
    assert values(example_result, 12, "$arr[1][1]") == [7, UNDEF]
    assert values(example_result, 12, "$arr[2][2]") == [6, UNDEF]
    assert values(example_result, 12, "$arr[2][1]") == [UNDEF]


def test_join_reads(example_result):
    assert values(example_result, 13, "$arr[1][2]") == [3, 6, 7, UNDEF]
    assert values(example_result, 13, "$arr[2][2]") == [6, UNDEF]


def test_truncated_running_example(example_source):
    head = "\n".join(example_source.splitlines()[:13]) + "\n"
    t0 = time.perf_counter()
    r = analyze_source(head)
    assert time.perf_counter() - t0 < 1.0
    assert values(r, "exit", "$arr[1][2]") == [3, 6, 7, UNDEF]


def test_alias_propagation(example_result):
    for p in ("$arr2[2]", "$arr[2]", "$alias3"):
        assert values(example_result, 18, p) == [8]
    assert 9 in example_result.eval(19, "$arr[3]")


def test_loop_with_dynamic_index():
    r = analyze_source("$i = 0; while (input()) { $a[$i] = 1; $i = input(); }")
    assert set(r.eval("exit", "$a[@unknown]")) >= {1, UNDEF}
    assert r.widenings == []


def test_loop_accumulates_values():
    r = analyze_source("$x = 0;\nwhile (input()) {\n  $y = $x;\n  $x = 1;\n}\n")
    assert values(r, "exit", "$x") == [0, 1]
    assert values(r, "exit", "$y") == [0, 1, UNDEF]


def test_state_at_addresses_last_node_on_line():
    r = analyze_source("$a = 1; $a = 2;\n")
    assert values(r, 1, "$a") == [2]
    with pytest.raises(KeyError):
        r.state_at(7)


def literal_state(vals):
    s = initial_state()
    a = s.create_index(s.root, "a")
    s.set_values(a, vals)
    return s


def test_widening():
    cfg = EngineConfig(value_width_limit=16)
    wide = widen(literal_state(set(range(17))), cfg)
    assert wide.values(wide.lookup(("a",))) == {STAR}
    wide = widen(literal_state(set(range(16)) | {UNDEF}), cfg)
    assert wide.values(wide.lookup(("a",))) == {STAR, UNDEF}
    small = literal_state({1, 2, UNDEF})
    assert widen(small, cfg).isomorphic(small)


def test_widening_is_logged():
    src = "".join("if (input()) { $a = %d; }\n" % i for i in range(18))
    r = analyze_source(src)
    assert {STAR, UNDEF} <= r.eval("exit", "$a")
    assert r.widenings and r.widenings[0].path == "$a"
    assert r.to_json()["widenings"][0]["path"] == "$a"


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 6))
def test_widening_is_extensive_and_idempotent(seed, limit):
    cfg = EngineConfig(value_width_limit=limit)
    s = analyze(build_cfg(random_program(seed, max_stmts=10))).exit_state
    w = widen(s, cfg)
    assert w.isomorphic(widen(w, cfg))
    assert leq(s, w)
    for v in s.vals:
        new = w.values(v)
        assert STAR in new or s.values(v) <= new
        assert (UNDEF in s.values(v)) == (UNDEF in new)


def test_iteration_limit():
    with pytest.raises(IterationLimitExceeded):
        analyze_source("while (input()) { $a = 1; }", EngineConfig(max_iterations=2))


def test_state_limit():
    with pytest.raises(StateLimitExceeded):
        analyze_source("$a[1][2][3] = 1;", EngineConfig(max_variables=4))


def test_bad_config():
    with pytest.raises(ValueError):
        EngineConfig(depth_limit=0)
    with pytest.raises(ValueError):
        EngineConfig(order="dfs")


def test_json_report(example_result):
    data = example_result.to_json()
    assert data["config"]["depthLimit"] == 8
    assert len(data["nodes"]) == len(example_result.cfg)
    assert {"id", "kind", "line", "out"} <= set(data["nodes"][1])
    assert data["exit"]["vars"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
@example(1)     # a join run on a partial input
@example(274)   # a later loop started before an earlier one settled
@example(793)   # an outer loop head revisited while the inner loop had work
def test_worklist_order_does_not_matter(seed):
    cfg = build_cfg(random_program(seed, max_stmts=12))
    try:
        a = analyze(cfg, EngineConfig(order="rpo", max_variables=1500))
        b = analyze(cfg, EngineConfig(order="fifo", max_variables=1500))
    except StateLimitExceeded:
        return
    assert a.exit_state.isomorphic(b.exit_state)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_loop_heads_only_grow(seed):
    cfg = build_cfg(random_program(seed, max_stmts=12, max_loops=3))
    heads = {n.id for n in cfg.nodes if n.kind == JOIN and isinstance(n.stmt, While)}
    history = {}
    real = engine.widen

    def spy(state, config, log=None, node=None):
        out = real(state, config, log, node)
        if node in heads:
            history.setdefault(node, []).append(out)
        return out

    engine.widen = spy
    try:
        analyze(cfg, EngineConfig(max_variables=1500))
    except StateLimitExceeded:
        return
    finally:
        engine.widen = real
    for chain in history.values():
        for old, new in zip(chain, chain[1:]):
            assert leq(old, new)
