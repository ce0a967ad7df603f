"""
Seeded random MiniDyn programs for property tests and the soundness oracle.
"""

import random

from .lang import Access, AliasAssign, Assign, If, Input, Lit, Program, While, format_program

NAMES = ("a", "b", "c", "d")
INDEX_LITS = (0, 1, 2, "k")
VALUE_LITS = (0, 1, 2, 3, 4, "k", "x")


class _Gen:
    def __init__(self, rng, max_stmts, max_depth, max_inputs, max_loops):
        self.rng = rng
        self.stmts_left = max_stmts
        self.max_depth = max_depth
        self.inputs_left = max_inputs
        self.max_loops = max_loops
        self.nested = 0
        self.defined = []   # literal paths written unconditionally so far

    def input_or(self, other):
        if self.inputs_left > 0 and self.rng.random() < 0.15:
            self.inputs_left -= 1
            return Input()
        return other()

    def index(self):
        r = self.rng.random()
        if r < 0.7:
            return Lit(self.rng.choice(INDEX_LITS))
        if r < 0.9:
            return self.input_or(lambda: Access(self.rng.choice(NAMES)))
        return self.access(max_depth=2)

    def access(self, max_depth=None, base=None, literal=False):
        depth = self.rng.randint(1, max_depth or self.max_depth)
        if base is None:
            base = self.rng.choice(NAMES)
            if self.rng.random() < 0.05:
                base = Lit(self.rng.choice(NAMES))

        def index():
            return Lit(self.rng.choice(INDEX_LITS)) if literal else self.index()

        return Access(base, tuple(index() for _ in range(depth - 1)))

    def expr(self):
        r = self.rng.random()
        if r < 0.45:
            return Lit(self.rng.choice(VALUE_LITS))
        return self.input_or(self.access)

    def cond(self):
        return self.input_or(lambda: Access(self.rng.choice(NAMES)))

    def block(self, loops, budget):
        out = []
        n = self.rng.randint(0, budget)
        self.nested += 1
        for _ in range(n):
            if self.stmts_left <= 0:
                break
            out.append(self.stmt(loops))
        self.nested -= 1
        return tuple(out)

    def stmt(self, loops):
        self.stmts_left -= 1
        r = self.rng.random()
        if r < 0.12 and self.stmts_left > 1:
            return If(self.cond(), self.block(loops, 4), self.block(loops, 3) if self.rng.random() < 0.6 else ())
        if r < 0.2 and loops < self.max_loops and self.stmts_left > 1:
            return While(self.cond(), self.block(loops + 1, 4))
        alias = r < 0.3
        if alias:
            lhs = self.access(max_depth=min(2, self.max_depth), base=self.rng.choice(NAMES[:-1]))
            rhs = self.access(max_depth=min(2, self.max_depth), literal=True)
            # prefer a source that surely exists: binding to a missing one
            # ends the concrete run early
            later = NAMES[NAMES.index(lhs.base) + 1:]
            known = [a for a in self.defined if a.base in later and len(a.indices) < 2]
            if known and self.rng.random() < 0.9:
                rhs = self.rng.choice(known)
            elif not known and isinstance(rhs.base, str) and rhs.base in later:
                # define the source now; a later alias can bind to it
                lhs, rhs, alias = rhs, Lit(self.rng.choice(VALUE_LITS)), False
        else:
            lhs = self.access()
            rhs = self.expr()
        shrink = not alias and not lhs.indices and _base_name(rhs if isinstance(rhs, Access) else lhs) == _base_name(lhs)
        if isinstance(rhs, Access) and not shrink:
            # structure only flows from later names into earlier ones, so no
            # array can come to contain itself
            later = NAMES[NAMES.index(_base_name(lhs)) + 1:]
            if _base_name(rhs) not in later:
                if not later:
                    return Assign(lhs, Lit(self.rng.choice(VALUE_LITS)))
                rhs = Access(self.rng.choice(later), rhs.indices)
        if not alias and not self.nested and isinstance(lhs.base, str) \
                and all(isinstance(i, Lit) for i in lhs.indices):
            self.defined.append(lhs)
        return AliasAssign(lhs, rhs) if alias else Assign(lhs, rhs)


def _base_name(acc):
    return acc.base if isinstance(acc.base, str) else acc.base.value


def random_program(rng, max_stmts=30, max_depth=4, max_inputs=3, max_loops=3):
    """A random `Program` drawn from ``rng`` (a `random.Random` or a seed).

    Statements are at most ``max_stmts`` (counting nested ones), accesses have
    at most ``max_depth`` dimensions, ``input()`` appears at most
    ``max_inputs`` times and loops nest at most ``max_loops`` deep. The result
    is printed and re-parsed so that every statement carries a source span.
    """
    from .lang import parse

    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    g = _Gen(rng, max_stmts, max_depth, max_inputs, max_loops)
    body = []
    while g.stmts_left > 0 and (not body or rng.random() < 0.93):
        body.append(g.stmt(0))
    return parse(format_program(Program(tuple(body))))


def random_programs(count, seed=42, **kw):
    rng = random.Random(seed)
    return [random_program(rng, **kw) for _ in range(count)]


def sample_corpus(count, seed=42, config=None, max_variables=1500, **kw):
    """``count`` random programs together with their analysis results.

    Programs whose abstract states grow beyond ``max_variables`` variables
    are skipped and replaced by the next program of the same seeded stream.
    Returns ``(pairs, skipped)``.
    """
    from dataclasses import replace

    from .cfg import build_cfg
    from .engine import EngineConfig, StateLimitExceeded, analyze

    config = replace(config or EngineConfig(), max_variables=max_variables)
    rng = random.Random(seed)
    pairs, skipped = [], 0
    while len(pairs) < count:
        program = random_program(rng, **kw)
        try:
            result = analyze(build_cfg(program), config)
        except StateLimitExceeded:
            skipped += 1
            continue
        pairs.append((program, result))
    return pairs, skipped
