"""
The analysis state: a forest of variables rooted at the symbol table.

Every variable except the root hangs under exactly one parent with an index
name; the unknown field of a variable is its child named ``BULLET``. Each
variable carries a value set and symmetric must/may alias relations.

States are used as value objects by the analysis: transfer functions
``copy()`` their input and mutate the copy before handing it on.
"""

from .core import (
    BULLET, STAR, UNDEF, DuplicateIndex, InternalError,
    format_value, is_literal, value_from_json, value_key, value_to_json,
)

UNDEF_VAR = -1
"""Stands for an access that identifies no variable; reads as ``{UNDEF}``."""

TOP_VAR = -2
"""Stands for anything below a depth-collapsed variable; reads as ``{STAR, UNDEF}``."""

UNDEF_SET = frozenset([UNDEF])
TOP_SET = frozenset([STAR, UNDEF])

DEFAULT_DEPTH_LIMIT = 8


class State:
    __slots__ = ("root", "parent", "kids", "vals", "must", "may", "top", "depth_limit", "_next")

    def __init__(self, depth_limit=DEFAULT_DEPTH_LIMIT):
        self.root = 0
        self._next = 1
        self.parent = {}          # var -> (parent var, index name)
        self.kids = {0: {}}       # var -> {index name: child var}
        self.vals = {0: UNDEF_SET}
        self.must = {0: set()}    # non-self must aliases
        self.may = {0: set()}
        self.top = set()
        self.depth_limit = depth_limit

    def copy(self):
        s = State.__new__(State)
        s.root = self.root
        s._next = self._next
        s.parent = dict(self.parent)
        s.kids = {v: dict(k) for v, k in self.kids.items()}
        s.vals = dict(self.vals)
        s.must = {v: set(a) for v, a in self.must.items()}
        s.may = {v: set(a) for v, a in self.may.items()}
        s.top = set(self.top)
        s.depth_limit = self.depth_limit
        return s

    # ------------------------------------------------------------ projections

    def __contains__(self, v):
        return v in self.vals

    def __len__(self):
        return len(self.vals)

    def _check(self, v):
        if v not in self.vals:
            raise InternalError("variable %r is not defined in this state" % (v,))

    def values(self, v):
        if v == UNDEF_VAR:
            return UNDEF_SET
        if v == TOP_VAR:
            return TOP_SET
        self._check(v)
        return self.vals[v]

    def values_of(self, vs):
        """Union of the value sets of ``vs``; ``{UNDEF}`` for an empty set."""
        if not vs:
            return UNDEF_SET
        out = set()
        for v in vs:
            out |= self.values(v)
        return frozenset(out)

    def children(self, v):
        if v < 0:
            return {}
        self._check(v)
        return self.kids[v]

    def child(self, v, name):
        return self.kids[v].get(name) if v >= 0 else None

    def unknown_field(self, v):
        return self.child(v, BULLET)

    def indices(self, vs, names=None):
        """Children of ``vs``; restricted to ``names`` when given."""
        out = set()
        for v in vs:
            kids = self.children(v)
            if names is None:
                out.update(kids.values())
            else:
                out.update(kids[n] for n in names if n in kids)
        return out

    def name_of(self, v):
        return self.parent[v][1]

    def parent_of(self, v):
        return self.parent[v][0]

    def is_unknown_field(self, v):
        return v in self.parent and self.parent[v][1] is BULLET

    def is_top(self, v):
        return v == TOP_VAR or v in self.top

    def depth(self, v):
        d = 0
        while v in self.parent:
            v = self.parent[v][0]
            d += 1
        return d

    def path(self, v):
        """Index names leading from the root to ``v``."""
        names = []
        while v in self.parent:
            v, name = self.parent[v]
            names.append(name)
        return tuple(reversed(names))

    def relative_path(self, ancestor, v):
        names = []
        while v != ancestor:
            if v not in self.parent:
                return None
            v, name = self.parent[v]
            names.append(name)
        return tuple(reversed(names))

    def lookup(self, names, start=None):
        v = self.root if start is None else start
        for n in names:
            v = self.kids[v].get(n)
            if v is None:
                return None
        return v

    def aliases_must(self, v):
        if v < 0:
            return set()
        self._check(v)
        return self.must[v] | {v}

    def aliases_may(self, v):
        if v < 0:
            return set()
        self._check(v)
        return set(self.may[v])

    def aliases(self, v):
        return self.aliases_must(v) | self.aliases_may(v)

    def has_aliases(self, v):
        return v >= 0 and bool(self.must[v] or self.may[v])

    def walk(self, v=None):
        """Pre-order traversal of the subtree under ``v`` (the root by default)."""
        stack = [self.root if v is None else v]
        while stack:
            u = stack.pop()
            yield u
            stack.extend(self.kids[u].values())

    def variables(self):
        return list(self.vals)

    # ------------------------------------------------------------ mutation

    def _new_var(self, parent, name):
        v = self._next
        self._next += 1
        self.parent[v] = (parent, name)
        self.kids[parent][name] = v
        self.kids[v] = {}
        self.vals[v] = UNDEF_SET
        self.must[v] = set()
        self.may[v] = set()
        return v

    def create_index(self, parent, name):
        """Create a fresh child ``parent[name]`` holding ``{UNDEF}``.

        Returns ``None`` when the depth limit forbids the child; the parent is
        collapsed instead so that reads below it stay sound.
        """
        self._check(parent)
        if name in self.kids[parent]:
            raise DuplicateIndex("variable %r already has an index %s" % (parent, format_value(name)))
        if parent in self.top:
            return None
        if self.depth(parent) >= self.depth_limit:
            self.collapse(parent)
            return None
        return self._new_var(parent, name)

    def ensure_index(self, parent, name):
        v = self.kids[parent].get(name)
        return v if v is not None else self.create_index(parent, name)

    def ensure_unknown_field(self, v):
        u = self.kids[v].get(BULLET)
        if u is None:
            u = self.create_index(v, BULLET)
        return u

    def add_values(self, v, values):
        if not values <= self.vals[v]:
            self.vals[v] = self.vals[v] | frozenset(values)

    def set_values(self, v, values):
        self.vals[v] = frozenset(values)

    def add_alias(self, a, b, must):
        if a == b:
            return
        if must:
            self.may[a].discard(b)
            self.may[b].discard(a)
            self.must[a].add(b)
            self.must[b].add(a)
        elif b not in self.must[a]:
            self.may[a].add(b)
            self.may[b].add(a)

    def remove_aliases(self, v):
        for other in self.must[v]:
            self.must[other].discard(v)
        for other in self.may[v]:
            self.may[other].discard(v)
        self.must[v] = set()
        self.may[v] = set()

    def remove_children(self, v):
        """Delete every descendant of ``v``; returns ``{removed var: path relative to v}``."""
        removed = {}
        stack = [(c, (n,)) for n, c in self.kids[v].items()]
        while stack:
            u, rel = stack.pop()
            removed[u] = rel
            stack.extend((c, rel + (n,)) for n, c in self.kids[u].items())
        for u in removed:
            self.remove_aliases(u)
        for u in removed:
            del self.parent[u], self.kids[u], self.vals[u], self.must[u], self.may[u]
            self.top.discard(u)
        self.kids[v] = {}
        return removed

    def collapse(self, v):
        """Give up on the structure below ``v``: every read below it yields ``{STAR, UNDEF}``.

        Variables that were aliased into the dropped subtree share storage
        with it and are collapsed too, since later writes to that storage are
        no longer tracked.
        """
        if v in self.top:
            return
        self.top.add(v)
        self.add_values(v, TOP_SET)
        subtree = set(self.walk(v)) - {v}
        partners = set()
        for u in subtree:
            partners |= (self.must[u] | self.may[u])
        partners -= subtree
        self.remove_children(v)
        for p in partners:
            if p in self.vals:
                self.collapse(p)

    def normalize(self):
        """Re-establish the value invariants after a transfer."""
        for v in self.vals:
            if v in self.top:
                self.add_values(v, TOP_SET)
            elif v in self.parent and self.parent[v][1] is BULLET:
                self.add_values(v, UNDEF_SET)
            elif not self.vals[v]:
                self.vals[v] = UNDEF_SET

    # ------------------------------------------------------------ comparison

    def canonical(self):
        """Path-indexed description of the state, independent of variable ids."""
        paths = {self.root: ()}
        for v in self.walk():
            p = paths[v]
            for name, k in self.kids[v].items():
                paths[k] = p + (name,)
        out = {}
        for v, p in paths.items():
            must, may = self.must[v], self.may[v]
            out[p] = (
                self.vals[v],
                v in self.top,
                frozenset(paths[a] for a in must) if must else frozenset(),
                frozenset(paths[a] for a in may) if may else frozenset(),
            )
        return out

    def isomorphic(self, other):
        return len(self) == len(other) and self.canonical() == other.canonical()

    def validate(self):
        """Check the structural invariants; raises `InternalError` on the first violation."""
        if self.root in self.parent:
            raise InternalError("root has a parent")
        for v in self.vals:
            if v < 0:
                raise InternalError("pseudo variable stored in the state")
            if v != self.root:
                if v not in self.parent:
                    raise InternalError("variable %d has no parent" % v)
                p, name = self.parent[v]
                if self.kids.get(p, {}).get(name) != v:
                    raise InternalError("indexOf is not a function at %r" % (self.path(v),))
            if not self.vals[v]:
                raise InternalError("empty value set at %r" % (self.path(v),))
            if BULLET in self.vals[v]:
                raise InternalError("bullet stored as a value at %r" % (self.path(v),))
            if self.is_unknown_field(v) and UNDEF not in self.vals[v]:
                raise InternalError("unknown field without undefined at %r" % (self.path(v),))
            if v in self.top and self.kids[v]:
                raise InternalError("collapsed variable with children")
            if self.must[v] & self.may[v]:
                raise InternalError("must and may aliases overlap at %r" % (self.path(v),))
            if v in self.must[v] or v in self.may[v]:
                raise InternalError("self stored as an explicit alias")
            for a in self.must[v]:
                if a not in self.vals or v not in self.must[a]:
                    raise InternalError("must alias relation not symmetric")
            for a in self.may[v]:
                if a not in self.vals or v not in self.may[a]:
                    raise InternalError("may alias relation not symmetric")
            for name in self.kids[v]:
                if not (is_literal(name) or name is BULLET):
                    raise InternalError("bad index name %r" % (name,))
        seen = set(self.walk())
        if seen != set(self.vals):
            raise InternalError("forest is not rooted at the symbol table")
        return True

    # ------------------------------------------------------------ json

    def to_json(self):
        rows = []
        for v in sorted(self.vals, key=lambda u: path_sort_key(self.path(u))):
            if v == self.root:
                continue
            row = {
                "path": format_path(self.path(v)),
                "values": [value_to_json(x) for x in sorted(self.vals[v], key=value_key)],
                "mustAliases": sorted(format_path(self.path(a)) for a in self.must[v]),
                "mayAliases": sorted(format_path(self.path(a)) for a in self.may[v]),
            }
            if v in self.top:
                row["top"] = True
            rows.append(row)
        return {"vars": rows}

    @classmethod
    def from_json(cls, data, depth_limit=DEFAULT_DEPTH_LIMIT):
        from .lang import parse_query_path

        s = cls(depth_limit)
        by_path = {(): s.root}
        rows = []
        for row in data["vars"]:
            names = names_from_access(parse_query_path(row["path"]))
            rows.append((names, row))
        rows.sort(key=lambda r: len(r[0]))
        for names, row in rows:
            v = s._new_var(by_path[names[:-1]], names[-1])
            by_path[names] = v
            s.vals[v] = frozenset(value_from_json(x) for x in row["values"])
            if row.get("top"):
                s.top.add(v)
        for names, row in rows:
            v = by_path[names]
            for p in row["mustAliases"]:
                s.add_alias(v, by_path[names_from_access(parse_query_path(p))], True)
            for p in row["mayAliases"]:
                s.add_alias(v, by_path[names_from_access(parse_query_path(p))], False)
        return s

    def __repr__(self):
        return "<State %d vars>" % len(self.vals)


def initial_state(depth_limit=DEFAULT_DEPTH_LIMIT):
    """The entry state: the symbol table and its unknown field ``unk``."""
    s = State(depth_limit)
    s._new_var(s.root, BULLET)
    return s


def create_index(state, parent, name):
    """Functional form of `State.create_index`: returns ``(new state, new var)``."""
    s = state.copy()
    return s, s.create_index(parent, name)


# ---------------------------------------------------------------- paths


def path_sort_key(names):
    return tuple(value_key(n) for n in names)


def format_name(name):
    if name is BULLET:
        return "•"
    if name is UNDEF:
        return "null"
    if isinstance(name, str):
        return "'%s'" % name.replace("\\", "\\\\").replace("'", "\\'")
    return str(name)


def format_path(names):
    """Render index names in source syntax: ``('arr', 2, BULLET)`` -> ``$arr[2][•]``."""
    if not names:
        return "$"
    head = names[0]
    if isinstance(head, str) and head.isidentifier():
        out = "$" + head
    elif head is BULLET:
        out = "$•"
    else:
        out = "${%s}" % format_name(head)
    return out + "".join("[%s]" % format_name(n) for n in names[1:])


def names_from_access(acc):
    """Index names of a fully literal access expression (as produced by `format_path`)."""
    from .lang import Access, Lit, QueryAtom

    def atom(e):
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, QueryAtom) and e.value is BULLET:
            return BULLET
        raise ValueError("not a literal path element: %r" % (e,))

    head = acc.base if isinstance(acc.base, str) else atom(acc.base)
    if isinstance(acc.base, Access):
        raise ValueError("not a literal path")
    return (head,) + tuple(atom(i) for i in acc.indices)


# ---------------------------------------------------------------- content trees


class Content:
    """A detached subtree: values, alias keys and children.

    Used to carry merged or copied data into a target variable. Alias keys
    are variable ids of the state the content will be written into.
    """

    __slots__ = ("values", "must", "may", "top", "kids", "collapse")

    def __init__(self, values=UNDEF_SET):
        self.values = set(values)
        self.must = set()
        self.may = set()
        self.top = False
        self.kids = {}
        self.collapse = ()      # alias partners to collapse along with this node


def extract(state, v, source_links=True, demote_must=False):
    """Snapshot the subtree of ``v`` as `Content`.

    Below the top level, a copied index that is aliased keeps those aliases
    and is also linked to the index it was copied from (``source_links``).
    """

    def rec(u, level):
        c = Content(state.vals[u])
        c.top = u in state.top
        must, may = set(state.must[u]), set(state.may[u])
        if level > 0 and source_links and (must or may):
            (must if must else may).add(u)
        if demote_must:
            may |= must
            must = set()
        c.must, c.may = must, may
        for name, k in state.kids[u].items():
            c.kids[name] = rec(k, level + 1)
        return c

    return rec(v, 0)


def write_content(state, target, content, top_aliases, link=None):
    """Add ``content`` into ``target``: values are joined, children created or
    merged recursively, and alias links copied at every level below the top
    (at the top too when ``top_aliases``). A target that is not itself an
    unknown field always ends up with an unknown field.

    ``link(var, key, must)`` records one alias link; by default the key is a
    variable id of ``state`` and the pair is added immediately. ``must`` is
    ``None`` for a variable that has to be collapsed.
    """
    link = link or _link_now(state)
    state.add_values(target, content.values)
    if content.top:
        state.collapse(target)
        for k in content.collapse:
            link(target, k, None)
    if top_aliases:
        for k in content.must:
            link(target, k, True)
        for k in content.may:
            link(target, k, False)
    if target not in state.top:
        for name, sub in content.kids.items():
            if target not in state.vals:
                return
            kid = state.ensure_index(target, name)
            if kid is None:
                break
            write_content(state, kid, sub, True, link)
    if target in state.vals and target not in state.top and not state.is_unknown_field(target):
        state.ensure_unknown_field(target)


def _link_now(state):
    def link(target, key, must):
        if key not in state.vals:
            return
        if must is None:
            state.collapse(key)
        elif target in state.vals and key != target:
            state.add_alias(target, key, must)
    return link


def deep_copy_assign(src, src_var, dst, dst_var):
    """Deep copy for assignment: values and structure, aliases only below the top level."""
    out = dst.copy()
    write_content(out, dst_var, extract(src, src_var), False)
    out.normalize()
    return out


def deep_copy(src, src_var, dst, dst_var):
    """Deep copy that also copies the top-level alias links of ``src_var``."""
    out = dst.copy()
    write_content(out, dst_var, extract(src, src_var), True)
    out.normalize()
    return out
