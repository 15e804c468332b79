"""Back-edge classification, CFG depth, and back-edge path weights.

Back edges are classified by a depth-first search from the entry node
that visits successors in ascending node-id order; an edge is a back
edge when its target is on the DFS stack.  For reducible graphs this
matches the usual retreating-edge notion; for irreducible graphs the
ascending-id rule pins a deterministic answer.

The depth d is the maximum number of back edges on any node-simple
path.  Pairwise weights ask the same question for paths between two
fixed statements.  Both are computed by exact backtracking with
pruning; a node cap (default 64) rejects inputs where exactness is no
longer desk-scale.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ir import ControlFlowGraph

DEFAULT_NODE_CAP = 64
DEFAULT_STEP_CAP = 10_000_000

FORWARD = "forward"
BACKWARD = "backward"


class SearchBudgetExceeded(RuntimeError):
    """Exact path search aborted: input exceeds the configured budget."""


@dataclass(frozen=True)
class CfgMetrics:
    """Back edges plus depth d for one control flow graph."""

    back_edges: frozenset[tuple[int, int]]
    depth: int


def traversal_order(cfg: ControlFlowGraph, direction: str) -> tuple[int, ...]:
    """Round-robin visit order: ascending node ids forward, descending backward."""
    if direction == FORWARD:
        return cfg.nodes
    if direction == BACKWARD:
        return tuple(reversed(cfg.nodes))
    raise ValueError(f"unknown direction {direction!r}")


def classify_back_edges(cfg: ControlFlowGraph) -> frozenset[tuple[int, int]]:
    """Edges whose target is a DFS-stack ancestor (ascending-id DFS from entry)."""
    visited: set[int] = set()
    on_stack: set[int] = set()
    back: set[tuple[int, int]] = set()
    # Explicit stack of (node, successor iterator position) to avoid
    # recursion limits on long chains.
    stack: list[tuple[int, int]] = []

    def push(node: int) -> None:
        visited.add(node)
        on_stack.add(node)
        stack.append((node, 0))

    push(cfg.entry)
    while stack:
        node, idx = stack[-1]
        succs = cfg.successors[node]
        if idx < len(succs):
            stack[-1] = (node, idx + 1)
            nxt = succs[idx]
            if nxt in on_stack:
                back.add((node, nxt))
            elif nxt not in visited:
                push(nxt)
        else:
            stack.pop()
            on_stack.discard(node)
    return frozenset(back)


def _check_node_cap(cfg: ControlFlowGraph, node_cap: int) -> None:
    if len(cfg.nodes) > node_cap:
        raise SearchBudgetExceeded(
            f"graph has {len(cfg.nodes)} nodes, exceeding the cap of {node_cap}")


class _PathSearch:
    """Backtracking search for the maximum back-edge count over simple paths."""

    def __init__(self, cfg: ControlFlowGraph,
                 back_edges: frozenset[tuple[int, int]], step_cap: int):
        self.succ = cfg.successors
        self.back_edges = back_edges
        # Back edges grouped by source node; used both for weight
        # accounting and for the remaining-potential prune.
        self.back_by_source: dict[int, int] = {}
        for src, _ in back_edges:
            self.back_by_source[src] = self.back_by_source.get(src, 0) + 1
        self.step_cap = step_cap
        self.steps = 0
        self.best = -1
        self.target: int | None = None

    def run(self, start: int, target: int | None, seed_best: int) -> int:
        self.target = target
        self.best = seed_best
        remaining = sum(self.back_by_source.values())
        if start in self.back_by_source:
            remaining -= self.back_by_source[start]
        self._extend(start, {start}, 0, remaining)
        return self.best

    def _extend(self, node: int, visited: set[int], weight: int, remaining: int) -> None:
        self.steps += 1
        if self.steps > self.step_cap:
            raise SearchBudgetExceeded(
                f"path search exceeded {self.step_cap} steps")
        if self.target is None or node == self.target:
            if weight > self.best:
                self.best = weight
        # Upper bound: every unvisited back-edge source could still
        # contribute, plus back edges leaving the current node.
        potential = weight + remaining + self.back_by_source.get(node, 0)
        if potential <= self.best:
            return
        for nxt in self.succ[node]:
            if nxt in visited:
                continue
            step = 1 if (node, nxt) in self.back_edges else 0
            visited.add(nxt)
            self._extend(nxt, visited, weight + step,
                         remaining - self.back_by_source.get(nxt, 0))
            visited.discard(nxt)


def depth(cfg: ControlFlowGraph, *, node_cap: int = DEFAULT_NODE_CAP,
          step_cap: int = DEFAULT_STEP_CAP,
          back_edges: frozenset[tuple[int, int]] | None = None) -> int:
    """Maximum number of back edges on any node-simple path."""
    _check_node_cap(cfg, node_cap)
    if back_edges is None:
        back_edges = classify_back_edges(cfg)
    if not back_edges:
        return 0
    search = _PathSearch(cfg, back_edges, step_cap)
    best = 0
    # A maximum-weight path can be trimmed to start at a back-edge
    # source, so only those starting points need searching.
    for start in sorted({src for src, _ in back_edges}):
        best = search.run(start, None, best)
    return best


def max_backedge_acyclic_weight(
        cfg: ControlFlowGraph, frm: int, to: int, *,
        node_cap: int = DEFAULT_NODE_CAP, step_cap: int = DEFAULT_STEP_CAP,
        back_edges: frozenset[tuple[int, int]] | None = None) -> int | None:
    """Maximum back-edge count over node-simple paths from `frm` to `to`.

    Returns 0 for frm == to (the empty path) and None when `to` is
    unreachable from `frm`.
    """
    if frm not in cfg.successors or to not in cfg.successors:
        raise KeyError(f"unknown node in pair ({frm}, {to})")
    _check_node_cap(cfg, node_cap)
    if frm == to:
        return 0
    reach = _reachable(cfg, frm)
    if to not in reach:
        return None
    if back_edges is None:
        back_edges = classify_back_edges(cfg)
    # A back edge can only appear on a frm->to path if its source is
    # reachable from frm and its target reaches to.
    co_reach = _co_reachable(cfg, to)
    candidates = frozenset(
        (s, t) for (s, t) in back_edges if s in reach and t in co_reach)
    if not candidates:
        return 0
    search = _PathSearch(cfg, candidates, step_cap)
    return search.run(frm, to, -1)


def compute_metrics(cfg: ControlFlowGraph, *,
                    node_cap: int = DEFAULT_NODE_CAP,
                    step_cap: int = DEFAULT_STEP_CAP) -> CfgMetrics:
    back = classify_back_edges(cfg)
    return CfgMetrics(back_edges=back,
                      depth=depth(cfg, node_cap=node_cap, step_cap=step_cap,
                                  back_edges=back))


def _reachable(cfg: ControlFlowGraph, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        for nxt in cfg.successors[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _co_reachable(cfg: ControlFlowGraph, target: int) -> set[int]:
    seen = {target}
    stack = [target]
    while stack:
        for prv in cfg.predecessors[stack.pop()]:
            if prv not in seen:
                seen.add(prv)
                stack.append(prv)
    return seen


class WeightTable:
    """Memoizing wrapper for pairwise weights on one CFG.

    Shared by EDG construction and reporting so repeated statement
    pairs are searched once.
    """

    def __init__(self, cfg: ControlFlowGraph, *,
                 node_cap: int = DEFAULT_NODE_CAP,
                 step_cap: int = DEFAULT_STEP_CAP):
        self.cfg = cfg
        self.node_cap = node_cap
        self.step_cap = step_cap
        self.back_edges = classify_back_edges(cfg)
        self._cache: dict[tuple[int, int], int | None] = {}
        self._depth: int | None = None

    def weight(self, frm: int, to: int) -> int | None:
        key = (frm, to)
        if key not in self._cache:
            self._cache[key] = max_backedge_acyclic_weight(
                self.cfg, frm, to, node_cap=self.node_cap,
                step_cap=self.step_cap, back_edges=self.back_edges)
        return self._cache[key]

    @property
    def depth(self) -> int:
        if self._depth is None:
            self._depth = depth(self.cfg, node_cap=self.node_cap,
                                step_cap=self.step_cap,
                                back_edges=self.back_edges)
        return self._depth
