"""
Worklist fixpoint solver.

The IN state of a node is the merge of its predecessors' OUT states; the OUT
state is the node's transfer applied to IN, then widened. A node's
successors are revisited whenever its OUT state changes (up to
path-isomorphism). Loop heads also merge in their own previous OUT so that
their states only ever grow.
"""

from dataclasses import dataclass, field

from .cfg import ALIAS, ASSIGN, JOIN, build_cfg
from .core import STAR, AnalysisError, IterationLimitExceeded, is_literal
from .lang import While, lower_access, lower_expr, parse
from .merge import merge_states
from .read import read
from .state import DEFAULT_DEPTH_LIMIT, format_path, initial_state
from .write import apply_alias, apply_assign


class StateLimitExceeded(AnalysisError):
    pass


@dataclass
class EngineConfig:
    depth_limit: int = DEFAULT_DEPTH_LIMIT
    value_width_limit: int = 16
    max_iterations: int = 10000
    max_variables: int = None   # optional cap on state size, for sampling cheap programs
    # test-only switches
    weak_updates: bool = True
    check_invariants: bool = False
    order: str = "rpo"

    def __post_init__(self):
        for name in ("depth_limit", "value_width_limit", "max_iterations"):
            if int(getattr(self, name)) < 1:
                raise ValueError("%s must be at least 1" % name)
        if self.order not in ("rpo", "fifo"):
            raise ValueError("order must be 'rpo' or 'fifo'")


@dataclass
class WideningEvent:
    node: int
    path: str
    width: int


@dataclass
class AnalysisResult:
    cfg: object
    config: EngineConfig
    ins: dict = field(default_factory=dict)
    outs: dict = field(default_factory=dict)
    iterations: int = 0
    widenings: list = field(default_factory=list)

    @property
    def exit_state(self):
        return self.outs.get(self.cfg.exit)

    def state_at(self, point):
        """OUT state at ``point``: a source line (last node on that line) or ``"exit"``."""
        if point == "exit":
            return self.exit_state
        nodes = [n for n in self.cfg.nodes_on_line(int(point)) if n.id in self.outs]
        if not nodes:
            raise KeyError("no analyzed statement on line %s" % point)
        return self.outs[nodes[-1].id]

    def eval(self, point, path):
        return read(self.state_at(point), path)

    def to_json(self):
        nodes = []
        for n in self.cfg.nodes:
            if n.id not in self.outs:
                continue
            row = {"id": n.id, "kind": n.kind, "line": n.line}
            if n.id in self.ins:
                row["in"] = self.ins[n.id].to_json()
            row["out"] = self.outs[n.id].to_json()
            nodes.append(row)
        return {
            "iterations": self.iterations,
            "config": {
                "depthLimit": self.config.depth_limit,
                "valueWidthLimit": self.config.value_width_limit,
                "maxIterations": self.config.max_iterations,
            },
            "widenings": [{"node": w.node, "path": w.path, "width": w.width} for w in self.widenings],
            "exit": self.exit_state.to_json() if self.exit_state is not None else None,
            "nodes": nodes,
        }


def widen(state, config, log=None, node=None):
    """Replace the literals of value sets larger than the width limit by ``STAR``.

    ``UNDEF`` counts towards the size and is kept.
    """
    limit = config.value_width_limit
    out = None
    for v, values in state.vals.items():
        if len(values) > limit and any(is_literal(x) for x in values):
            lits = [x for x in values if is_literal(x)]
            if out is None:
                out = state.copy()
            out.vals[v] = frozenset(x for x in values if not is_literal(x)) | {STAR}
            if log is not None:
                log.append(WideningEvent(node, format_path(state.path(v)), len(lits)))
    return out if out is not None else state


def _loops(cfg, rank):
    """Map each node to the set of loop heads whose natural loop contains it."""
    inside = {v: set() for v in rank}
    for p in rank:
        for h in cfg.succ(p):
            if h in rank and rank[p] >= rank[h]:
                body, stack = {h, p}, [p]
                while stack:
                    v = stack.pop()
                    if v == h:
                        continue
                    for u in cfg.pred(v):
                        if u in rank and u not in body:
                            body.add(u)
                            stack.append(u)
                for v in body:
                    inside[v].add(h)
    return inside


class _Worklist:
    """Pending nodes, popped in reverse postorder or first-in first-out.

    Either way a node is only handed out once all of its forward
    predecessors have an OUT state, and never while a loop it does not belong
    to still has pending work (if every pending node waits, the first in
    reverse postorder goes). Transfers are not monotone, so running a node
    on a partial input could leave junk in a loop head's accumulated state;
    with these two rules the orders only differ in how ready nodes
    interleave, and reach the same fixpoint.
    """

    def __init__(self, cfg, order, outs):
        self.fifo = order == "fifo"
        self.rank = {v: i for i, v in enumerate(cfg.reverse_postorder())}
        self.forward = {k: [p for p in cfg.pred(k) if p in self.rank and self.rank[p] < self.rank[k]]
                        for k in self.rank}
        self.loops = _loops(cfg, self.rank)
        self.outs = outs
        self.items = []

    def push(self, v):
        if v in self.rank and v not in self.items:
            self.items.append(v)

    def _ready(self, v):
        if any(p not in self.outs for p in self.forward[v]):
            return False
        mine = self.loops[v]
        return not any(self.loops[m] - mine for m in self.items)

    def pop(self):
        pending = self.items if self.fifo else sorted(self.items, key=self.rank.get)
        for v in pending:
            if self._ready(v):
                break
        else:
            v = min(self.items, key=self.rank.get)
        self.items.remove(v)
        return v

    def __bool__(self):
        return bool(self.items)


def _transfers(cfg):
    out = {}
    for n in cfg.nodes:
        if n.kind in (ASSIGN, ALIAS):
            rhs = lower_access(n.stmt.rhs) if n.kind == ALIAS else lower_expr(n.stmt.rhs)
            out[n.id] = (n.kind, lower_access(n.stmt.lhs), rhs)
    return out


def analyze(cfg, config=None):
    """Run the analysis of ``cfg`` to a fixpoint and return an `AnalysisResult`."""
    config = config or EngineConfig()
    result = AnalysisResult(cfg, config)
    outs, ins = result.outs, result.ins
    outs[cfg.entry] = initial_state(config.depth_limit)
    transfers = _transfers(cfg)
    loop_heads = {n.id for n in cfg.nodes if n.kind == JOIN and isinstance(n.stmt, While)}
    work = _Worklist(cfg, config.order, outs)
    for s in cfg.succ(cfg.entry):
        work.push(s)
    while work:
        k = work.pop()
        result.iterations += 1
        if result.iterations > config.max_iterations:
            raise IterationLimitExceeded("no fixpoint after %d iterations" % config.max_iterations)
        preds = [outs[p] for p in cfg.pred(k) if p in outs]
        if k in loop_heads and k in outs:
            preds.append(outs[k])
        distinct = {id(s): s for s in preds}
        # transfers never mutate their input, so a lone state needs no copy
        state_in = merge_states(preds) if len(distinct) > 1 else preds[0]
        ins[k] = state_in
        t = transfers.get(k)
        if t is None:
            state_out = state_in
        elif t[0] == ASSIGN:
            state_out = apply_assign(state_in, t[1], t[2], config.weak_updates)
        else:
            state_out = apply_alias(state_in, t[1], t[2], config.weak_updates)
        state_out = widen(state_out, config, result.widenings, k)
        if config.check_invariants:
            state_out.validate()
        if config.max_variables is not None and len(state_out) > config.max_variables:
            raise StateLimitExceeded("state at node %d has %d variables" % (k, len(state_out)))
        old = outs.get(k)
        if old is None or not old.isomorphic(state_out):
            outs[k] = state_out
            for s in cfg.succ(k):
                work.push(s)
    return result


def analyze_source(source, config=None):
    """Parse, build the CFG and analyze ``source``."""
    return analyze(build_cfg(parse(source)), config)
