"""
Joining variables and states.

A merge walks all merged variables top-down at once. Each node of the result
gets every index any contributing variable has, and reads that index in each
source (falling back to unknown fields exactly like a read access would).
Also here: the order `leq` that merges compute upper bounds for.
"""

from collections import defaultdict

from .core import BULLET, STAR, is_literal
from .state import TOP_SET, TOP_VAR, UNDEF_SET, UNDEF_VAR, Content, State

JOIN = "join"
ASSIGN = "assign"
ALIAS = "alias"


def collect_access_paths(state, var):
    """All index-name paths below ``var`` (unknown fields included), plus ``()``."""
    out = {()}
    stack = [(var, ())]
    while stack:
        v, rel = stack.pop()
        for name, k in state.children(v).items():
            p = rel + (name,)
            out.add(p)
            stack.append((k, p))
    return out


def extend_paths(paths, by_prefix=True):
    """Close ``paths`` under replacing an unknown-field level by a concrete name.

    With ``by_prefix`` (the default) a ``BULLET`` at level ``l`` is replaced by
    the names that occur at level ``l`` under the same parent path; otherwise
    by every name occurring at level ``l`` anywhere in the set.
    """
    out = set(paths)
    while True:
        names = defaultdict(set)
        for p in out:
            for level, n in enumerate(p):
                if n is not BULLET:
                    names[p[:level] if by_prefix else level].add(n)
        new = set()
        for p in out:
            for level, n in enumerate(p):
                if n is not BULLET:
                    continue
                for k in names.get(p[:level] if by_prefix else level, ()):
                    q = p[:level] + (k,) + p[level + 1:]
                    if q not in out:
                        new.add(q)
        if not new:
            return out
        out |= new


def _dropped_partners(sources, at):
    """Alias keys whose storage overlaps the subtrees below the contributors ``at``."""
    keys = set()
    for (state, _, _), (c, _) in zip(sources, at):
        if c < 0 or c in state.top:
            continue
        for u in state.walk(c):
            if u != c and (state.must[u] or state.may[u]):
                keys |= state.must[u] | state.may[u]
                keys.add(u)
    return keys


class _Paths:
    """Memoized absolute paths of the variables of one state."""

    def __init__(self, state):
        self.state = state
        self.memo = {state.root: ()}

    def __call__(self, v):
        p = self.memo.get(v)
        if p is None:
            parent, name = self.state.parent[v]
            p = self.memo[v] = self(parent) + (name,)
        return p


def _contribution(state, c, ap, exact, mode, paths):
    """(must keys, all alias keys) that contributor ``c`` adds for path ``ap``."""
    if c < 0:
        return set(), set()
    if mode == JOIN:
        must = {paths(a) for a in state.must[c]}
        alias = must | {paths(a) for a in state.may[c]}
        return (must if exact else set()), alias
    must, may = set(state.must[c]), set(state.may[c])
    if mode == ALIAS and ap == ():
        must.add(c)
    elif must or may:
        # a copy of an aliased index shares storage with the index itself
        (must if must else may).add(c)
    if not exact:
        may |= must
        must = set()
    return must, must | may


def _step(state, v, name):
    if v < 0:
        return v, False
    if v in state.top:
        return TOP_VAR, False
    kids = state.kids[v]
    k = kids.get(name)
    if k is not None:
        return k, True
    return kids.get(BULLET, UNDEF_VAR), False


def merge_content(sources, mode=JOIN, max_depth=None, root_unknown=False):
    """Merge ``sources`` (``(state, var, exact)`` triples) into a detached `Content` tree.

    The tree is walked top-down along every source at once, each source
    falling back to unknown fields like a read access does. A node gets
    every child name any of its contributing variables has; so an index
    that one source only knows through its unknown field is materialized
    wherever another source names it, and nothing else is added.

    Values are unioned (absent data reads as undefined), must aliases are
    intersected and everything else any source aliases becomes a may alias.
    ``mode`` selects how alias keys are expressed: absolute paths for
    ``JOIN``, variable ids of the (single) source state otherwise.

    With ``max_depth`` the tree is cut where writing it into a target would
    hit the depth limit: a node at that depth that would need children (or
    an unknown field) is marked collapsed, and ``collapse`` lists the alias
    partners of what was cut off.
    """
    paths = [_Paths(state) if mode == JOIN else None for state, _, _ in sources]
    root = Content()
    stack = [((), root, [(v, exact) for _, v, exact in sources])]
    while stack:
        ap, node, at = stack.pop()
        values = set()
        must = None
        alias = set()
        names = {}
        for (state, _, _), (c, exact), pc in zip(sources, at, paths):
            values |= state.values(c)
            if c == TOP_VAR or c in state.top:
                node.top = True
            elif c >= 0:
                names.update(state.kids[c])
            m, a = _contribution(state, c, ap, exact, mode, pc)
            must = m if must is None else must & m
            alias |= a
        node.values = values or set(UNDEF_SET)
        node.must = must or set()
        node.may = alias - node.must
        if mode == JOIN:
            node.must.discard(ap)
            node.may.discard(ap)
        if max_depth is not None and len(ap) >= max_depth and not node.top:
            unknown = ap[-1] is BULLET if ap else root_unknown
            if names or not unknown:
                node.top = True
                node.values |= TOP_SET
                node.collapse = _dropped_partners(sources, at)
        if node.top:
            continue
        for name in names:
            kid = node.kids[name] = Content()
            nxt = []
            for (state, _, _), (c, exact) in zip(sources, at):
                k, hit = _step(state, c, name)
                nxt.append((k, exact and hit))
            stack.append((ap + (name,), kid, nxt))
    return root


def materialize(content, depth_limit):
    """Build a fresh state whose root holds ``content`` (alias keys are paths)."""
    s = State(depth_limit)
    ids = {(): s.root}
    order = [((), content)]
    for path, node in order:
        v = ids[path]
        s.vals[v] = frozenset(node.values) or UNDEF_SET
        if node.top:
            s.top.add(v)
        for name, sub in node.kids.items():
            k = s._new_var(v, name)
            ids[path + (name,)] = k
            order.append((path + (name,), sub))
    claims = {}
    dangling = []
    for path, node in order:
        v = ids[path]
        for keys, must in ((node.must, True), (node.may, False)):
            for key in keys:
                b = ids.get(key)
                if b is None:
                    dangling.append(v)
                elif b != v:
                    claims.setdefault((v, b), must)
    for (a, b), must in claims.items():
        if a < b or (b, a) not in claims:
            both_must = must and claims.get((b, a), False)
            s.add_alias(a, b, both_must)
    for v in dangling:
        if v in s.vals:
            s.collapse(v)
    s.normalize()
    return s


def merge_states(states):
    """Join the states flowing into a node. A single state is simply copied."""
    states = list({id(s): s for s in states}.values())
    if not states:
        raise ValueError("merge_states needs at least one state")
    if len(states) == 1:
        return states[0].copy()
    content = merge_content([(s, s.root, True) for s in states], JOIN)
    return materialize(content, states[0].depth_limit)


def merge_vars(state, result_var, sources, mode=ASSIGN):
    """Merge ``sources`` (variables of ``state``) into ``result_var`` of a copy of ``state``.

    ``result_var`` is normally fresh; whatever it held before is replaced.
    """
    from .state import write_content

    content = merge_content([(state, v, True) for v in sources], mode)
    out = state.copy()
    out.remove_children(result_var)
    out.vals[result_var] = frozenset()
    write_content(out, result_var, content, True)
    out.normalize()
    return out


def leq(a, b):
    """True when state ``b`` covers state ``a``.

    Every variable of ``a`` must read, in ``b``, a superset of its values
    (``STAR`` covering any literal). Where both states have the variable
    and it is not collapsed in ``b``, ``b`` may only keep must aliases ``a``
    has, and has to keep every alias of ``a`` at least as a may alias.
    """
    pa, pb = _Paths(a), _Paths(b)
    for v in a.vals:
        u, exact = b.root, True
        for name in pa(v):
            u, hit = _step(b, u, name)
            exact = exact and hit
        va, vb = a.values(v), b.values(u)
        if STAR in vb:
            va = {x for x in va if not is_literal(x)}
        if not va <= vb:
            return False
        if exact and u not in b.top:
            must_a = {pa(x) for x in a.must[v]}
            must_b = {pb(x) for x in b.must[u]}
            if not must_b <= must_a:
                return False
            if not must_a | {pa(x) for x in a.may[v]} <= must_b | {pb(x) for x in b.may[u]}:
                return False
    return True
