"""
A reference interpreter for MiniDyn.

Deliberately independent of the abstract domain: it only uses the AST.

Every value lives in a `Cell`. An array maps keys to cells (its slots); an
alias statement binds a slot to an existing cell, so both names see later
writes. Copying an array copies its slots, except that a slot whose cell is
referenced from two or more places keeps pointing at the same cell (a copied
reference stays a reference).

``None`` plays the role of Null: reading a missing path, or an index of a
scalar, yields Null. Writing an index creates the missing path and turns
scalars on the way into empty arrays.
"""

import copy

from .lang import AliasAssign, Access, Assign, If, Input, Lit, While


class Cell:
    __slots__ = ("value",)

    def __init__(self, value=None):
        self.value = value

    def __repr__(self):
        return "Cell(%r)" % (self.value,)

    def lookup(self, keys):
        """Cell at ``keys`` below this one, or ``None`` when the path is missing."""
        c = self
        for k in keys:
            if not isinstance(c.value, dict) or k not in c.value:
                return None
            c = c.value[k]
        return c

    def get(self, *keys):
        c = self.lookup(keys)
        return None if c is None else c.value


class StepBudgetExceeded(Exception):
    pass


class CyclicReference(Exception):
    """An array came to contain itself. Such a structure has no finite
    description, so the run stops there; earlier points remain valid."""


class IllegalOffset(Exception):
    """An array was used as an index; execution stops like a fatal error."""


class UnboundAliasSource(Exception):
    """The right-hand side of an alias statement does not exist.

    Binding to it would have to define it first, which the analysis does not
    model, so the run stops there; earlier points remain valid."""


class _InputsExhausted(Exception):
    pass


def truthy(v):
    """Int 0, the empty string and Null are false; everything else is true."""
    return not (v is None or v == "" or (isinstance(v, int) and v == 0))


def _refcounts(root):
    counts = {}
    on_path = set()

    def visit(c):
        on_path.add(id(c))
        for child in c.value.values():
            if id(child) in on_path:
                raise CyclicReference()
            first = id(child) not in counts
            counts[id(child)] = counts.get(id(child), 0) + 1
            if first and isinstance(child.value, dict):
                visit(child)
        on_path.discard(id(c))

    visit(root)
    return counts


def _copy_value(v, counts):
    if not isinstance(v, dict):
        return v
    out = {}
    for k, c in v.items():
        out[k] = c if counts.get(id(c), 0) >= 2 else Cell(_copy_value(c.value, counts))
    return out


class Interpreter:
    def __init__(self, inputs, step_budget=10000, on_point=None):
        self.inputs = list(inputs)
        self.consumed = 0
        self.steps = 0
        self.step_budget = step_budget
        self.root = Cell({})
        self.on_point = on_point

    def point(self, key):
        if self.on_point is not None:
            self.on_point(key, self.root)

    def tick(self):
        self.steps += 1
        if self.steps > self.step_budget:
            raise StepBudgetExceeded()

    # -- expressions

    def next_input(self):
        if self.consumed >= len(self.inputs):
            raise _InputsExhausted()
        v = self.inputs[self.consumed]
        self.consumed += 1
        return v

    def key(self, e):
        v = self.value(e)
        if isinstance(v, dict):
            raise IllegalOffset()
        return v

    def keys(self, acc):
        head = acc.base if isinstance(acc.base, str) else self.key(acc.base)
        return [head] + [self.key(i) for i in acc.indices]

    def value(self, e):
        """Evaluate ``e``; arrays come back as the live mapping (not copied)."""
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, Input):
            return self.next_input()
        if isinstance(e, Access):
            c = self.root.lookup(self.keys(e))
            return None if c is None else c.value
        raise TypeError(e)

    # -- statements

    def slot(self, keys):
        """Cell at ``keys``, creating the path on the way."""
        c = self.root
        for k in keys:
            if not isinstance(c.value, dict):
                c.value = {}
            if k not in c.value:
                c.value[k] = Cell(None)
            c = c.value[k]
        return c

    def run(self, stmts):
        for s in stmts:
            self.tick()
            if isinstance(s, Assign):
                v = self.value(s.rhs)
                if isinstance(v, dict):
                    v = _copy_value(v, _refcounts(self.root))
                self.slot(self.keys(s.lhs)).value = v
                if isinstance(v, dict):
                    _refcounts(self.root)
                self.point(("stmt", s.span.line, s.span.column))
            elif isinstance(s, AliasAssign):
                target = self.root.lookup(self.keys(s.rhs))
                if target is None:
                    raise UnboundAliasSource()
                keys = self.keys(s.lhs)
                parent = self.slot(keys[:-1])
                if not isinstance(parent.value, dict):
                    parent.value = {}
                parent.value[keys[-1]] = target
                _refcounts(self.root)
                self.point(("stmt", s.span.line, s.span.column))
            elif isinstance(s, If):
                cond = truthy(self.value(s.cond))
                self.point(("cond", s.span.line, s.span.column))
                self.run(s.then if cond else s.orelse)
                self.point(("end", s.span.line, s.span.column))
            elif isinstance(s, While):
                while True:
                    cond = truthy(self.value(s.cond))
                    self.point(("cond", s.span.line, s.span.column))
                    if not cond:
                        break
                    self.run(s.body)
                    self.tick()
            else:
                raise TypeError(s)


class Run:
    """Outcome of one concrete execution."""

    def __init__(self, trace, env, consumed, status):
        self.trace = trace          # [(point key, snapshot root cell)]
        self.env = env
        self.consumed = consumed
        self.status = status        # "ok", "inputs", "offset", "budget", "cyclic" or "unbound-alias"

    @property
    def excluded(self):
        return self.status in ("budget", "cyclic", "unbound-alias")


def execute(program, inputs, step_budget=10000, on_point=None):
    """Run ``program``; ``on_point(key, root)`` sees the live environment after every point.

    Returns ``(interpreter, status)``. Running out of inputs or using an
    array as an index ends the run early; the points seen so far remain
    valid observations.
    """
    it = Interpreter(inputs, step_budget, on_point)
    status = "ok"
    try:
        it.run(program.body)
        it.point(("exit",))
    except _InputsExhausted:
        status = "inputs"
    except IllegalOffset:
        status = "offset"
    except StepBudgetExceeded:
        status = "budget"
    except CyclicReference:
        status = "cyclic"
    except UnboundAliasSource:
        status = "unbound-alias"
    return it, status


def run_concrete(program, inputs, step_budget=10000):
    """Run ``program`` and record a snapshot of the environment at every point."""
    trace = []

    def record(key, root):
        trace.append((key, copy.deepcopy(root)))

    it, status = execute(program, inputs, step_budget, record)
    return Run(trace, it.root, it.consumed, status)


def input_sites(program):
    """(sites outside loops, sites inside loops) of ``input()``."""

    def count(e):
        if isinstance(e, Input):
            return 1
        if isinstance(e, Access):
            n = 0 if isinstance(e.base, str) else count(e.base)
            return n + sum(count(i) for i in e.indices)
        return 0

    outside = inside = 0

    def walk(stmts, in_loop):
        nonlocal outside, inside
        for s in stmts:
            if isinstance(s, (Assign, AliasAssign)):
                n = count(s.lhs) + count(s.rhs)
            elif isinstance(s, If):
                n = count(s.cond)
                walk(s.then, in_loop)
                walk(s.orelse, in_loop)
            else:
                inside += count(s.cond)
                walk(s.body, True)
                continue
            if in_loop:
                inside += n
            else:
                outside += n

    walk(program.body, False)
    return outside, inside
