"""
Read accesses: resolving an access path to variables and values.

Reads never follow aliases; writes keep every alias up to date instead.
"""

from .core import BULLET, STAR, UNDEF, Atom, Seq
from .state import TOP_VAR, UNDEF_VAR


def eval_path(state, ap):
    """Values readable through access path ``ap`` from the symbol table."""
    if isinstance(ap, Atom):
        return frozenset([ap.value])
    return state.values_of(vars_of(state, state.root, ap))


def vars_of(state, start, ap):
    """Variables reached from ``start`` by the sequence path ``ap``.

    Never empty: an access that identifies nothing yields ``{UNDEF_VAR}``.
    """
    if isinstance(ap, Atom):
        return {UNDEF_VAR}
    current = {start}
    for element in ap.elements:
        current = step(state, current, eval_path(state, element))
        if not current:
            break
    return current or {UNDEF_VAR}


def step(state, current, index_values):
    """One level of a read traversal."""
    if STAR in index_values:
        out = set()
        for v in current:
            if v == UNDEF_VAR:
                continue
            if state.is_top(v):
                out.add(TOP_VAR)
                continue
            kids = state.children(v)
            out.update(kids.values())
            if BULLET not in kids:
                out.add(UNDEF_VAR)
        return out
    return indices_read(state, current, index_values)


def indices_read(state, vs, names):
    """Children of ``vs`` under ``names``, falling back to the unknown field
    for every name a variable does not define.

    ``UNDEF`` as an index name can never hit a named child, so it always takes
    the fallback. A variable without an unknown field falls back to
    ``UNDEF_VAR`` (an absent unknown field reads like a bare one).
    """
    out = set()
    for v in vs:
        if v == UNDEF_VAR:
            continue
        if state.is_top(v):
            out.add(TOP_VAR)
            continue
        kids = state.children(v)
        missing = False
        for name in names:
            kid = kids.get(name) if name is not UNDEF else None
            if kid is None:
                missing = True
            else:
                out.add(kid)
        if missing:
            out.add(kids.get(BULLET, UNDEF_VAR))
    return out


def resolve_literal(state, start, names):
    """The single variable a fully literal path reaches (or a pseudo variable)."""
    v = start
    for name in names:
        if v < 0:
            return v
        if state.is_top(v):
            return TOP_VAR
        kids = state.children(v)
        nxt = kids.get(name)
        if nxt is None:
            nxt = kids.get(BULLET, UNDEF_VAR)
        v = nxt
    return v


def read(state, ap):
    """Convenience: ``eval_path`` accepting a textual query path or a path object."""
    if isinstance(ap, str):
        from .lang import lower_access, parse_query_path

        ap = lower_access(parse_query_path(ap))
    return eval_path(state, ap)


__all__ = ["eval_path", "vars_of", "indices_read", "resolve_literal", "read", "Seq", "Atom"]
