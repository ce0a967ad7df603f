import pytest

from minidyn.concrete import execute, input_sites, run_concrete, truthy
from minidyn.lang import parse
from minidyn.randprog import random_program


def snapshot(run, key):
    return [root for k, root in run.trace if k == key][-1]


@pytest.fixture(scope="module")
def example_run(example_source):
    return run_concrete(parse(example_source), [1])


def test_alias_shares_the_cell(example_run):
    root = snapshot(example_run, ("stmt", 4, 2))
    assert root.lookup(("arr", 1)) is root.lookup(("alias",))


def test_read_through_alias(example_run):
    assert snapshot(example_run, ("stmt", 5, 2)).get("t") == 1


def test_write_through_copied_alias(example_run):
    root = snapshot(example_run, ("stmt", 18, 1))
    assert root.get("alias3") == 8
    assert root.get("arr", 2) == 8
    assert root.get("arr2", 2) == 8


def test_line_19_reaches_alias(example_source):
    # with $any = 3, $arr[3] is bound to $alias and the copy keeps that link
    run = run_concrete(parse(example_source), [3])
    root = snapshot(run, ("stmt", 19, 1))
    assert root.get("arr", 3) == 9
    assert root.get("alias") == 9


def test_running_example_ends_in_a_cycle(example_run):
    # line 20 stores $arr2 (which shares cells with $arr) below $arr
    assert example_run.status == "cyclic"
    assert example_run.excluded


def test_assignment_copies():
    it, status = execute(parse("$a = 1; $b = $a;"), [])
    assert status == "ok"
    assert it.root.get("b") == 1
    assert it.root.lookup(("a",)) is not it.root.lookup(("b",))


def test_array_copy_is_deep():
    it, _ = execute(parse("$a[1][2] = 3; $b = $a; $b[1][2] = 4;"), [])
    assert it.root.get("a", 1, 2) == 3
    assert it.root.get("b", 1, 2) == 4


def test_copy_keeps_references():
    src = "$x = 1; $a[1] = &$x; $b = $a; $b[1] = 5;"
    it, _ = execute(parse(src), [])
    assert it.root.get("x") == 5
    assert it.root.get("a", 1) == 5


def test_reading_does_not_create():
    it, _ = execute(parse("$a = $b[1][2];"), [])
    assert it.root.get("a") is None
    assert it.root.lookup(("b",)) is None


def test_writing_creates_the_path():
    it, _ = execute(parse("$a = 1; $a[2][3] = 4;"), [])
    assert it.root.get("a", 2, 3) == 4


@pytest.mark.parametrize("v,expected", [
    (0, False), ("", False), (None, False), (1, True), ("0", True), ("k", True), ({}, True),
])
def test_truthiness(v, expected):
    assert truthy(v) is expected


def test_statuses():
    assert execute(parse("$a = input();"), [])[1] == "inputs"
    assert execute(parse("while (1) { $a = 1; }"), [], step_budget=50)[1] == "budget"
    assert execute(parse("$a[1] = 1; $b[$a] = 2;"), [])[1] == "offset"
    assert execute(parse("$a = &$b[1];"), [])[1] == "unbound-alias"


def test_input_sites():
    p = parse("$a = input(); while (input()) { $b[input()] = 1; }")
    assert input_sites(p) == (1, 2)


def test_deterministic():
    for seed in range(20):
        p = random_program(seed)
        a = run_concrete(p, [1, 0, "k", 2, 3] * 4, step_budget=500)
        b = run_concrete(p, [1, 0, "k", 2, 3] * 4, step_budget=500)
        assert a.status == b.status
        assert [k for k, _ in a.trace] == [k for k, _ in b.trace]
        assert repr([r for _, r in a.trace]) == repr([r for _, r in b.trace])
