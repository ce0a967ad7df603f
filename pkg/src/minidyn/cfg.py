"""
Control-flow graphs with one node per statement.

An ``if`` becomes a branch node, the two arms and a join node placed on the
line of the closing brace. A ``while`` becomes a loop-head join, a branch, the
body with a back edge to the head, and an exit edge out of the branch. Branch
conditions never prune an arm.

Edges carry a label (``"true"``, ``"false"`` or ``None``) so that an empty arm
still gives its join two distinct incoming edges.
"""

from dataclasses import dataclass

from .lang import AliasAssign, Assign, If, SourceSpan, While, format_expr

ENTRY = "entry"
EXIT = "exit"
ASSIGN = "assign"
ALIAS = "alias"
JOIN = "join"
BRANCH = "branch"


@dataclass(frozen=True)
class CfgNode:
    id: int
    kind: str
    stmt: object = None
    span: SourceSpan = None

    @property
    def line(self):
        return self.span.line if self.span is not None else None


class Cfg:
    def __init__(self, nodes, edges):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self.entry = next(n.id for n in self.nodes if n.kind == ENTRY)
        self.exit = next(n.id for n in self.nodes if n.kind == EXIT)
        self._pred = {n.id: [] for n in self.nodes}
        self._succ = {n.id: [] for n in self.nodes}
        for src, dst, _ in self.edges:
            self._pred[dst].append(src)
            self._succ[src].append(dst)

    def __len__(self):
        return len(self.nodes)

    def node(self, i):
        return self.nodes[i]

    def pred(self, i):
        """Predecessors of node ``i``, one entry per incoming edge."""
        return list(self._pred[i])

    def succ(self, i):
        return list(self._succ[i])

    def reverse_postorder(self):
        seen, order = set(), []
        stack = [(self.entry, iter(self._succ[self.entry]))]
        seen.add(self.entry)
        while stack:
            v, it = stack[-1]
            for w in it:
                if w not in seen:
                    seen.add(w)
                    stack.append((w, iter(self._succ[w])))
                    break
            else:
                order.append(v)
                stack.pop()
        return order[::-1]

    def reachable(self):
        return set(self.reverse_postorder())

    def nodes_on_line(self, line):
        return [n for n in self.nodes if n.line == line]

    def to_dot(self):
        lines = ["digraph cfg {"]
        for n in self.nodes:
            label = n.kind if n.line is None else "%s L%d" % (n.kind, n.line)
            if isinstance(n.stmt, (Assign, AliasAssign)):
                amp = "&" if isinstance(n.stmt, AliasAssign) else ""
                text = "%s = %s%s" % (format_expr(n.stmt.lhs), amp, format_expr(n.stmt.rhs))
                label += "\\n" + text.replace("\\", "\\\\").replace('"', '\\"')
            lines.append('  n%d [label="%d: %s"];' % (n.id, n.id, label))
        for src, dst, tag in self.edges:
            extra = ' [label="%s"]' % tag if tag else ""
            lines.append("  n%d -> n%d%s;" % (src, dst, extra))
        lines.append("}")
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self):
        self.nodes = []
        self.edges = []

    def add(self, kind, stmt=None, span=None):
        n = CfgNode(len(self.nodes), kind, stmt, span)
        self.nodes.append(n)
        return n.id

    def connect(self, frontier, dst):
        for src, tag in frontier:
            self.edges.append((src, dst, tag))

    def block(self, stmts, frontier):
        """Lay out ``stmts`` after ``frontier`` (list of (node, label)); returns the new frontier."""
        for s in stmts:
            frontier = self.stmt(s, frontier)
        return frontier

    def stmt(self, s, frontier):
        if isinstance(s, (Assign, AliasAssign)):
            n = self.add(ALIAS if isinstance(s, AliasAssign) else ASSIGN, s, s.span)
            self.connect(frontier, n)
            return [(n, None)]
        if isinstance(s, If):
            b = self.add(BRANCH, s, s.span)
            self.connect(frontier, b)
            then_out = self.block(s.then, [(b, "true")])
            else_out = self.block(s.orelse, [(b, "false")])
            j = self.add(JOIN, s, SourceSpan(s.end_line or s.span.line, 1, 1))
            self.connect(then_out + else_out, j)
            return [(j, None)]
        if isinstance(s, While):
            head = self.add(JOIN, s, s.span)
            self.connect(frontier, head)
            b = self.add(BRANCH, s, s.span)
            self.edges.append((head, b, None))
            body_out = self.block(s.body, [(b, "true")])
            self.connect(body_out, head)
            return [(b, "false")]
        raise TypeError("unknown statement %r" % (s,))


def build_cfg(program):
    """Build the `Cfg` of a parsed program."""
    b = _Builder()
    entry = b.add(ENTRY)
    out = b.block(program.body, [(entry, None)])
    exit_ = b.add(EXIT)
    b.connect(out, exit_)
    return Cfg(b.nodes, b.edges)
