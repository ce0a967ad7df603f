"""
Transfer functions for ``lhs = rhs`` and ``lhs = &rhs``.

An update first walks the left-hand side level by level, creating indices
that do not exist yet (seeded from the parent's unknown field) and following
aliases, to find the variables that must be updated (strongly) and those
that may be updated (weakly). The new content of each target is merged from
the right-hand side (plus the target itself for weak updates) before any
target is touched, and then written in.
"""

from dataclasses import dataclass, field

from .core import STAR, UNDEF, Atom, is_literal
from .merge import ALIAS, ASSIGN, merge_content
from .read import eval_path, vars_of
from .state import State, extract, write_content


@dataclass
class TargetSets:
    must: set = field(default_factory=set)
    may: set = field(default_factory=set)
    must_alias: set = field(default_factory=set)
    may_alias: set = field(default_factory=set)
    work: State = None
    levels: list = field(default_factory=list)
    hit_top: bool = False     # the walk ran into a collapsed variable

    @property
    def strong(self):
        return self.must | self.must_alias

    @property
    def weak(self):
        return self.may | self.may_alias


def _must_aliases(w, vs):
    out = set()
    for v in vs:
        out |= w.aliases_must(v)
    return out


def _may_aliases(w, vs):
    out = set()
    for v in vs:
        out |= w.aliases_may(v)
    return out


def _all_aliases(w, vs):
    out = set()
    for v in vs:
        out |= w.aliases(v)
    return out


def define_index(w, v, name):
    """Create ``v[name]`` as a deep copy of ``v``'s unknown field.

    Anything written earlier through a statically unknown index of ``v``
    may live at ``v[name]``, so the new index starts out with all of it.
    """
    unknown = w.unknown_field(v)
    seed = extract(w, unknown, source_links=False, demote_must=True) if unknown is not None else None
    kid = w.create_index(v, name)
    if kid is None:
        return None
    if seed is not None:
        write_content(w, kid, seed, True)
    elif kid in w.vals:
        w.ensure_unknown_field(kid)
    return kid


def indices_write(w, vs, names):
    """Children of ``vs`` under literal ``names``; missing ones are defined on the fly."""
    out = set()
    for v in sorted(vs):
        if v not in w.vals or w.is_top(v):
            continue
        for name in names:
            kid = w.child(v, name)
            if kid is None:
                kid = define_index(w, v, name)
            if kid is not None and kid in w.vals:
                out.add(kid)
    return out


def _unknown_fields(w, vs):
    out = set()
    for v in sorted(vs):
        if v in w.vals and not w.is_top(v):
            u = w.ensure_unknown_field(v)
            if u is not None:
                out.add(u)
    return out


def _all_children(w, vs):
    out = _unknown_fields(w, vs)
    for v in vs:
        if v in w.vals:
            out.update(w.children(v).values())
    return out


def collect_targets(in_state, lhs, is_alias, work=None):
    """Walk ``lhs`` and return the `TargetSets` of the update.

    ``work`` (a copy of ``in_state`` by default) receives the indices created
    on the way; it is returned as ``TargetSets.work``.
    """
    w = work if work is not None else in_state.copy()
    index_sets = [eval_path(w, e) for e in lhs.elements]
    must, may = {w.root}, set()
    n = len(index_sets)
    levels = []
    hit_top = False
    for j, idx in enumerate(index_sets, 1):
        hit_top = hit_top or any(w.is_top(v) for v in must | may)
        last_alias = is_alias and j == n
        names = sorted((x for x in idx if is_literal(x)), key=repr)
        if STAR in idx:
            kids = _all_children(w, must | may)
            new_must = set()
            new_may = kids if last_alias else _all_aliases(w, kids)
        elif len(names) == 1 and UNDEF not in idx:
            on_must = indices_write(w, must, names)
            on_may = indices_write(w, may, names)
            if last_alias:
                new_must, new_may = on_must, on_may
            else:
                new_must = _must_aliases(w, on_must)
                new_may = _all_aliases(w, on_may) | _may_aliases(w, on_must)
        else:
            kids = indices_write(w, must | may, names)
            if UNDEF in idx:
                kids |= _unknown_fields(w, must | may)
            new_must = set()
            new_may = kids if last_alias else _all_aliases(w, kids)
        must = {v for v in new_must if v in w.vals}
        may = {v for v in new_may if v in w.vals} - must
        levels.append((frozenset(must), frozenset(may)))
    t = TargetSets(work=w, levels=levels, hit_top=hit_top)
    if is_alias:
        t.must_alias, t.may_alias = must, may
    else:
        t.must, t.may = must, may
    return t


def _literal_names(state, ap):
    names = []
    for e in ap.elements:
        vals = eval_path(state, e)
        if len(vals) != 1:
            return None
        (x,) = vals
        if not is_literal(x):
            return None
        names.append(x)
    return tuple(names)


def _rhs_sources(w, rhs):
    """Merge sources for a right-hand side: ``(state, var, exact)`` triples."""
    if isinstance(rhs, Atom):
        const = State(w.depth_limit)
        const.vals[const.root] = frozenset([rhs.value])
        return [(const, const.root, True)]
    found = vars_of(w, w.root, rhs)
    names = _literal_names(w, rhs)
    sources = []
    for v in sorted(found):
        exact = len(found) == 1 and v >= 0 and names is not None and w.path(v) == names
        sources.append((w, v, exact))
    return sources


def _has_nested(w, targets):
    for t in targets:
        while t in w.parent:
            t = w.parent_of(t)
            if t in targets:
                return True
    return False


def _contains_itself(w, roots):
    """Outermost ancestors that (may) share storage with a variable below them.

    Such an array contains itself; its structure is unbounded, so it is
    collapsed instead of being unrolled down to the depth limit.
    """
    out = set()
    for t in roots:
        if t not in w.vals:
            continue
        for u in w.walk(t):
            near = w.aliases(u) - {u}
            if not near:
                continue
            a = u
            while a in w.parent:
                a = w.parent_of(a)
                if a in near or w.aliases(a) & near:
                    out.add(a)
    # keep only the outermost ones
    return {a for a in out if not any(b in out for b in _ancestors(w, a))}


def _ancestors(w, v):
    while v in w.parent:
        v = w.parent_of(v)
        yield v


def apply_update(in_state, lhs, rhs, is_alias, weak_updates=True):
    """Apply an assignment (``is_alias`` false) or alias statement; returns a new state."""
    targets = collect_targets(in_state, lhs, is_alias)
    w = targets.work
    mode = ALIAS if is_alias else ASSIGN
    strong = targets.strong
    weak = targets.weak if weak_updates else set()

    def cut(t):
        return dict(max_depth=w.depth_limit - w.depth(t), root_unknown=w.is_unknown_field(t))

    nested = _has_nested(w, strong | weak)
    src_state = w.copy() if nested else w
    sources = _rhs_sources(src_state, rhs)
    contents = {}
    shared = {}
    for t in strong:
        key = tuple(cut(t).values())
        if key not in shared:
            shared[key] = merge_content(sources, mode, **cut(t))
        contents[t] = shared[key]
    if not nested:
        for t in weak:
            contents[t] = merge_content(sources + [(w, t, True)], mode, **cut(t))

    killed = {}
    pending = []

    def link(target, key, must):
        pending.append((target, key, must))

    def write(t):
        for u, rel in w.remove_children(t).items():
            killed[u] = (t, rel)
        if is_alias and t in strong:
            w.remove_aliases(t)
        w.vals[t] = frozenset()
        write_content(w, t, contents[t], is_alias, link)

    if nested:
        # a target can sit below another one; writing the inner one first
        # lets the outer weak update merge in the already updated subtree
        for t in sorted(strong | weak, key=w.depth, reverse=True):
            if t not in w.vals:
                continue
            if t not in contents:
                contents[t] = merge_content(sources + [(w, t, True)], mode, **cut(t))
            write(t)
    else:
        order = sorted(contents, key=w.depth)
        for t in order:
            if t in w.vals:
                for u, rel in w.remove_children(t).items():
                    killed[u] = (t, rel)
                if is_alias and t in strong:
                    w.remove_aliases(t)
                w.vals[t] = frozenset()
        for t in order:
            if t in w.vals:
                write_content(w, t, contents[t], is_alias, link)

    if is_alias and targets.hit_top:
        # part of the left-hand side lies in untracked structure, so the
        # source may now share storage with it
        for v in vars_of(w, w.root, rhs):
            if v >= 0 and v in w.vals:
                w.collapse(v)

    for target, key, must in pending:
        a = key
        if a not in w.vals and a in killed:
            owner, rel = killed[a]
            a = w.lookup(rel, owner) if owner in w.vals else None
        if a is None or a not in w.vals:
            continue
        if must is None:
            w.collapse(a)
        elif target in w.vals and a != target:
            w.add_alias(target, a, must)
    for a in _contains_itself(w, strong | weak):
        if a in w.vals:
            w.collapse(a)
    w.normalize()
    return w


def apply_assign(in_state, lhs, rhs, weak_updates=True):
    return apply_update(in_state, lhs, rhs, False, weak_updates)


def apply_alias(in_state, lhs, rhs, weak_updates=True):
    return apply_update(in_state, lhs, rhs, True, weak_updates)
