import pytest
from hypothesis import given, settings, strategies as st

from minidyn.core import BULLET, STAR, UNDEF, DuplicateIndex, InternalError
from minidyn.engine import analyze_source
from minidyn.randprog import random_program
from minidyn.cfg import build_cfg
from minidyn.engine import analyze
from minidyn.state import (
    UNDEF_VAR, State, create_index, deep_copy, deep_copy_assign, format_path, initial_state,
)


def paths(state, vs):
    return {format_path(state.path(v)) for v in vs}


def test_initial_state():
    s = initial_state()
    assert list(s.children(s.root)) == [BULLET]
    unk = s.unknown_field(s.root)
    assert s.values(unk) == {UNDEF}
    assert s.validate()


def test_projections():
    s = initial_state()
    assert s.values(UNDEF_VAR) == {UNDEF}
    assert s.values_of(set()) == {UNDEF}
    unk = s.unknown_field(s.root)
    assert s.aliases_must(unk) == {unk}
    assert s.indices({s.root}) == {unk}
    assert s.indices({s.root}, ["a"]) == set()
    with pytest.raises(InternalError):
        s.values(99)


def test_create_index():
    s0 = initial_state()
    s, a = create_index(s0, s0.root, "a")
    assert format_path(s.path(a)) == "$a"
    assert s.values(a) == {UNDEF}
    assert a not in s0
    s, u = create_index(s, a, BULLET)
    assert s.is_unknown_field(u) and s.values(u) == {UNDEF}
    with pytest.raises(DuplicateIndex):
        s.create_index(s.root, "a")
    assert s.validate()


def test_depth_limit_collapses_instead_of_creating():
    s = initial_state(depth_limit=2)
    a = s.create_index(s.root, "a")
    b = s.create_index(a, 1)
    assert s.create_index(b, 2) is None
    assert s.is_top(b)
    assert s.values(b) >= {STAR, UNDEF}


def test_validate_catches_broken_states():
    s = initial_state()
    a = s.create_index(s.root, "a")
    s.vals[a] = frozenset()
    with pytest.raises(InternalError):
        s.validate()
    s.vals[a] = frozenset([1])
    s.must[a].add(s.root)
    with pytest.raises(InternalError):
        s.validate()


def test_alias_relations_are_symmetric_and_disjoint():
    s = initial_state()
    a = s.create_index(s.root, "a")
    b = s.create_index(s.root, "b")
    s.add_alias(a, b, False)
    assert s.aliases_may(b) == {a}
    s.add_alias(a, b, True)
    assert s.aliases_must(b) == {a, b} and s.aliases_may(a) == set()
    s.remove_aliases(a)
    assert s.aliases(b) == {b}


def test_deep_copy_assign_of_leaf():
    s = initial_state()
    a = s.create_index(s.root, "a")
    s.set_values(a, {1})
    b = s.create_index(s.root, "b")
    out = deep_copy_assign(s, a, s, b)
    b2 = out.lookup(("b",))
    assert out.values(b2) == {1, UNDEF}
    assert out.values(out.unknown_field(b2)) == {UNDEF}
    assert s.values(b) == {UNDEF}


def test_deep_copy_links_top_level_aliases():
    s = analyze_source("$x = 1;\n$a = &$x;\n$b = 2;\n").exit_state
    a, b, x = (s.lookup((n,)) for n in "abx")
    plain = deep_copy_assign(s, a, s, b)
    assert plain.aliases(b) == {b}
    linked = deep_copy(s, a, s, b)
    assert x in linked.aliases_must(b)
    assert linked.validate()


def test_copy_keeps_aliases_below_top_level(example_result):
    s = example_result.state_at(17)
    arr2_2 = s.lookup(("arr2", 2))
    assert paths(s, s.must[arr2_2]) == {"$alias3", "$arr[2]"}
    assert "$alias" in paths(s, s.may[s.lookup(("arr2", BULLET))])


def test_unknown_field_copy_is_may_alias():
    s = analyze_source("$alias = 1;\n$any = input();\n$arr[$any] = &$alias;\n$arr[1][2] = 3;\n").exit_state
    assert "$alias" in paths(s, s.may[s.lookup(("arr", 1))])


def test_indices_after_else_branch(example_result):
    s = example_result.state_at(12)
    arr1 = s.lookup(("arr", 1))
    assert paths(s, s.indices({arr1})) == {"$arr[1][2]", "$arr[1][•]"}


def test_format_path():
    assert format_path(("arr", 2, BULLET)) == "$arr[2][•]"
    assert format_path(("a", "k")) == "$a['k']"
    assert format_path(("a", UNDEF)) == "$a[null]"
    assert format_path((BULLET,)) == "$•"
    assert format_path(("not ident",)) == "${'not ident'}"


def test_json_round_trip(example_result):
    for k, s in example_result.outs.items():
        back = State.from_json(s.to_json())
        assert back.isomorphic(s), k


def test_json_schema(example_result):
    rows = {r["path"]: r for r in example_result.state_at(18).to_json()["vars"]}
    assert rows["$alias3"]["values"] == [{"int": 8}]
    assert rows["$alias3"]["mustAliases"] == ["$arr2[2]", "$arr[2]"]
    assert rows["$any"]["values"] == ["star"]


def test_copy_is_independent():
    s = initial_state()
    t = s.copy()
    t.create_index(t.root, "a")
    assert len(s) == 2 and len(t) == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_isomorphism_ignores_ids(seed):
    result = analyze(build_cfg(random_program(seed, max_stmts=10)))
    s = result.exit_state
    assert State.from_json(s.to_json()).isomorphic(s)
    assert s.copy().isomorphic(s)
