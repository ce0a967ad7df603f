"""
Soundness oracle: run the program concretely on many inputs and check that
every concrete observation is covered by the analysis result.

At every program point reached by a run, every scalar reachable in the
concrete environment must be in the abstract value set of its path (``STAR``
covers any literal, Null corresponds to ``UNDEF``). Paths that are missing
concretely are probed with a set of interesting keys and must read as
possibly undefined.
"""

import itertools
import random
from dataclasses import dataclass, field

from .cfg import ALIAS, ASSIGN, BRANCH, EXIT, JOIN
from .concrete import execute, input_sites
from .core import STAR, UNDEF, Atom, Seq, format_value, sorted_values
from .lang import Access, If, Lit, iter_statements
from .read import eval_path
from .state import format_path

DEFAULT_POOL = (0, 1, 2, 3, "k")
EXHAUSTIVE_LIMIT = 10 ** 5


@dataclass
class Violation:
    point: str
    node: int
    path: str
    concrete: object
    abstract: list
    witness: list

    def to_json(self):
        return {
            "point": self.point,
            "node": self.node,
            "path": self.path,
            "concrete": "null" if self.concrete is None else self.concrete,
            "abstract": [format_value(v) for v in self.abstract],
            "witness": list(self.witness),
        }


@dataclass
class SoundnessReport:
    assignments_tried: int = 0
    points_checked: int = 0
    exhaustive: bool = True
    excluded: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {
            "assignmentsTried": self.assignments_tried,
            "pointsChecked": self.points_checked,
            "exhaustive": self.exhaustive,
            "excluded": dict(self.excluded),
            "violations": [v.to_json() for v in self.violations],
        }


def point_nodes(cfg):
    """Map the interpreter's point keys to CFG node ids."""
    out = {}
    for n in cfg.nodes:
        if n.kind in (ASSIGN, ALIAS):
            out[("stmt", n.stmt.span.line, n.stmt.span.column)] = n.id
        elif n.kind == BRANCH:
            out[("cond", n.stmt.span.line, n.stmt.span.column)] = n.id
        elif n.kind == JOIN and isinstance(n.stmt, If):
            out[("end", n.stmt.span.line, n.stmt.span.column)] = n.id
        elif n.kind == EXIT:
            out[("exit",)] = n.id
    return out


def _describe(key):
    return "exit" if key[0] == "exit" else "%s@%d:%d" % key


def _program_keys(program, pool):
    names, lits = set(), set(pool)

    def scan(e):
        if isinstance(e, Lit):
            lits.add(e.value)
        elif isinstance(e, Access):
            if isinstance(e.base, str):
                names.add(e.base)
            else:
                scan(e.base)
            for i in e.indices:
                scan(i)

    for s in iter_statements(program.body):
        for part in ("lhs", "rhs", "cond"):
            if hasattr(s, part):
                scan(getattr(s, part))
    return sorted(names | lits, key=repr), sorted(lits, key=repr)


def assignments(program, pool, seed=42, exhaustive_limit=EXHAUSTIVE_LIMIT, samples=1000, loop_unroll=3):
    """Input sequences to try, and whether they are exhaustive."""
    outside, inside = input_sites(program)
    length = outside + inside * loop_unroll
    pool = list(pool)
    if len(pool) ** length <= exhaustive_limit:
        return [list(t) for t in itertools.product(pool, repeat=length)], True
    rng = random.Random(seed)
    return [[rng.choice(pool) for _ in range(length)] for _ in range(samples)], False


class _Checker:
    def __init__(self, program, result, pool, max_depth, probe_depth):
        self.result = result
        self.nodes = point_nodes(result.cfg)
        self.top_keys, self.inner_keys = _program_keys(program, pool)
        self.max_depth = max_depth
        self.probe_depth = probe_depth
        self.cache = {}
        self.seen = set()
        self.points = 0

    def abstract(self, node, path):
        k = (node, path)
        vals = self.cache.get(k)
        if vals is None:
            ap = Seq(tuple(Atom(UNDEF if x is None else x) for x in path))
            vals = self.cache[k] = eval_path(self.result.outs[node], ap)
        return vals

    def observe(self, key, root, found):
        node = self.nodes.get(key)
        if node is None or node not in self.result.outs:
            return
        self.points += 1
        stack = [(root, (), 0)]
        while stack:
            cell, path, depth = stack.pop()
            v = cell.value
            if path and not isinstance(v, dict):
                self.check(key, node, path, v, found)
            if depth >= self.max_depth:
                continue
            present = v if isinstance(v, dict) else {}
            for k, c in present.items():
                stack.append((c, path + (k,), depth + 1))
            if depth < self.probe_depth:
                for k in self.top_keys if not path else self.inner_keys:
                    if k not in present:
                        self.check(key, node, path + (k,), None, found)

    def check(self, key, node, path, value, found):
        tag = (node, path, value)
        if tag in self.seen:
            return
        self.seen.add(tag)
        vals = self.abstract(node, path)
        want = UNDEF if value is None else value
        if want in vals or (STAR in vals and value is not None):
            return
        found.append((key, node, path, value, vals))


def _run_one(program, checker, inputs, step_budget):
    found = []
    it, status = execute(program, inputs, step_budget, lambda k, r: checker.observe(k, r, found))
    return found, status, it.consumed


def _reproduces(program, result, pool, inputs, step_budget, target, max_depth, probe_depth):
    checker = _Checker(program, result, pool, max_depth, probe_depth)
    found, status, _ = _run_one(program, checker, inputs, step_budget)
    return status != "budget" and any((f[1], f[2]) == target for f in found)


def minimize_witness(program, result, pool, inputs, step_budget, target, max_depth=8, probe_depth=3):
    """Greedily shorten and simplify ``inputs`` while the violation at ``target`` persists."""
    inputs = list(inputs)
    order = list(pool)
    changed = True
    while changed:
        changed = False
        for n in range(len(inputs)):
            if _reproduces(program, result, pool, inputs[:n], step_budget, target, max_depth, probe_depth):
                inputs = inputs[:n]
                changed = True
                break
        for i in range(len(inputs)):
            for v in order[: order.index(inputs[i])] if inputs[i] in order else order:
                trial = inputs[:i] + [v] + inputs[i + 1:]
                if _reproduces(program, result, pool, trial, step_budget, target, max_depth, probe_depth):
                    inputs = trial
                    changed = True
                    break
    return inputs


def check_soundness(program, result, pool=DEFAULT_POOL, step_budget=10000, seed=42,
                    exhaustive_limit=EXHAUSTIVE_LIMIT, samples=1000, max_depth=8,
                    probe_depth=3, minimize=True):
    """Check ``result`` (the analysis of ``program``) against concrete runs."""
    report = SoundnessReport()
    inputs_list, report.exhaustive = assignments(program, pool, seed, exhaustive_limit, samples)
    checker = _Checker(program, result, pool, max_depth, probe_depth)
    first = {}
    for inputs in inputs_list:
        report.assignments_tried += 1
        found, status, consumed = _run_one(program, checker, inputs, step_budget)
        if status in ("budget", "cyclic", "unbound-alias"):
            report.excluded[status] = report.excluded.get(status, 0) + 1
        if status == "budget":
            continue
        for key, node, path, value, vals in found:
            first.setdefault((node, path, value), (key, vals, inputs[:consumed]))
    report.points_checked = checker.points
    for (node, path, value), (key, vals, witness) in sorted(first.items(), key=lambda kv: repr(kv[0])):
        if minimize:
            witness = minimize_witness(program, result, pool, witness, step_budget, (node, path),
                                       max_depth, probe_depth)
        report.violations.append(Violation(
            _describe(key), node, format_path(tuple(UNDEF if x is None else x for x in path)),
            value, sorted_values(vals), witness))
    return report
