"""Generic monotone-framework machinery.

A framework instance couples a component lattice (one small lattice
per entity) with per-node transfer functions over the product value.
Two solvers are provided:

* ``round_robin_solve`` sweeps all nodes in a fixed order until a full
  pass changes nothing, counting passes.  This is the measured
  quantity that the iteration bounds predict.
* ``worklist_solve`` is an independent fixed-point oracle; it must
  reach the same solution but its effort is reported as node visits.

Iteration counting: a solve always ends with one pass in which no
value changes.  The default convention reports I excluding that final
verification pass, which is the convention that reproduces the
fixture iteration counts exactly (see PassConvention); the other
convention is selectable per call.

All values are initialized to the top element; boundary values are
applied at the entry node (forward) or at exit nodes (backward).
Solvers are single-threaded per call; instances and results are
immutable and may be shared.
"""

from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Mapping

from .ir import ControlFlowGraph, Program
from .cfg_metrics import FORWARD, traversal_order

Entity = Hashable


@dataclass(frozen=True)
class ComponentLattice:
    """One entity's value lattice: top, bottom, meet, and element heights.

    ``ht(v)`` is the length of the longest descending chain from top
    to v, so ht(top) = 0 and ht(bottom) = height.
    """

    name: str
    top: Any
    bottom: Any
    meet: Callable[[Any, Any], Any]
    ht: Callable[[Any], int]
    height: int
    sample: Callable[[random.Random], Any]
    fmt: Callable[[Any], str] = repr

    def leq(self, a: Any, b: Any) -> bool:
        return self.meet(a, b) == a


class EntitySpace:
    """Ordered entity universe plus its shared component lattice."""

    __slots__ = ("entities", "lattice", "index", "_top")

    def __init__(self, entities: tuple[Entity, ...], lattice: ComponentLattice):
        self.entities = entities
        self.lattice = lattice
        self.index = {e: i for i, e in enumerate(entities)}
        self._top: ProductValue | None = None

    def __len__(self) -> int:
        return len(self.entities)

    def top(self) -> "ProductValue":
        if self._top is None:
            self._top = ProductValue(self, (self.lattice.top,) * len(self.entities))
        return self._top

    def value(self, mapping: Mapping[Entity, Any]) -> "ProductValue":
        missing = set(self.entities) - set(mapping)
        extra = set(mapping) - set(self.entities)
        if missing or extra:
            raise ValueError(f"entity-set mismatch: missing={missing}, extra={extra}")
        return ProductValue(self, tuple(mapping[e] for e in self.entities))


class ProductValue:
    """Immutable per-entity vector over an EntitySpace."""

    __slots__ = ("space", "values")

    def __init__(self, space: EntitySpace, values: tuple[Any, ...]):
        if len(values) != len(space.entities):
            raise ValueError("value width does not match entity count")
        self.space = space
        self.values = values

    def __getitem__(self, entity: Entity) -> Any:
        return self.values[self.space.index[entity]]

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, ProductValue)
                and self.space is other.space
                and self.values == other.values)

    def __hash__(self) -> int:
        return hash(self.values)

    def as_dict(self) -> dict[Entity, Any]:
        return dict(zip(self.space.entities, self.values))

    def replacing(self, updates: Mapping[Entity, Any]) -> "ProductValue":
        vals = list(self.values)
        for entity, value in updates.items():
            vals[self.space.index[entity]] = value
        return ProductValue(self.space, tuple(vals))

    def leq(self, other: "ProductValue") -> bool:
        return meet_product(self, other) == self

    def __repr__(self) -> str:
        lat = self.space.lattice
        inner = ", ".join(f"{e}: {lat.fmt(v)}"
                          for e, v in zip(self.space.entities, self.values))
        return "{" + inner + "}"


def meet_product(a: ProductValue, b: ProductValue) -> ProductValue:
    """Componentwise meet; both operands must share the entity space."""
    if a.space is not b.space:
        raise ValueError("entity-set mismatch between product values")
    if a.values == b.values:
        return a
    meet = a.space.lattice.meet
    return ProductValue(a.space, tuple(
        x if x is y else meet(x, y) for x, y in zip(a.values, b.values)))


def product_height(component_height: int, entity_count: int) -> int:
    """Height of the product lattice: component height times entity count."""
    if component_height < 0 or entity_count < 0:
        raise ValueError("heights and entity counts are non-negative")
    return component_height * entity_count


@dataclass(frozen=True)
class FrameworkInstance:
    """A data flow framework instantiated on one program.

    ``transfers`` maps each node to a function over product values.
    ``dfpmod``/``dfpuse`` name the entities a node's transfer computes
    and reads.  ``independent_sources`` are the dfpmod entities whose
    transfer produces a non-top value regardless of input (constants,
    reads, prints, kills): these are the only places where information
    can enter the analysis.
    """

    kind: str
    direction: str
    space: EntitySpace
    transfers: dict[int, Callable[[ProductValue], ProductValue]]
    dfpmod: dict[int, frozenset[Entity]]
    dfpuse: dict[int, frozenset[Entity]]
    independent_sources: dict[int, frozenset[Entity]]
    boundary: ProductValue
    monotonic_entity_dependence: bool
    program: Program

    def __post_init__(self) -> None:
        declared = set(self.space.entities)
        for table in (self.dfpmod, self.dfpuse, self.independent_sources):
            for node, entities in table.items():
                unknown = set(entities) - declared
                if unknown:
                    raise ValueError(f"node {node} names undeclared entities {unknown}")

    @property
    def entities(self) -> tuple[Entity, ...]:
        return self.space.entities

    @property
    def lattice(self) -> ComponentLattice:
        return self.space.lattice

    def transfer(self, node: int, value: ProductValue) -> ProductValue:
        return self.transfers[node](value)

    def product_lattice_height(self) -> int:
        return product_height(self.lattice.height, len(self.space))


class PassConvention(enum.Enum):
    """How the final no-change verification pass is counted in I."""

    EXCLUDE_FINAL_PASS = "exclude-final-pass"
    INCLUDE_FINAL_PASS = "include-final-pass"


# Calibrated against the shipped fixture: the exclude convention
# reproduces its published iteration counts exactly.
DEFAULT_CONVENTION = PassConvention.EXCLUDE_FINAL_PASS


@dataclass(frozen=True)
class TraceRecord:
    """One computed-value change: where, what, and the operand values read."""

    pass_no: int
    node: int
    entity: Entity
    old: Any
    new: Any
    operands: tuple[tuple[Entity, Any], ...]


@dataclass(frozen=True)
class SolveResult:
    in_values: dict[int, ProductValue]
    out_values: dict[int, ProductValue]
    iterations: int
    passes_executed: int
    trace: tuple[TraceRecord, ...]
    convention: PassConvention | None
    visits: int | None = None

    def value_at(self, node: int, side: str) -> ProductValue:
        return self.in_values[node] if side == "in" else self.out_values[node]


class DivergenceError(RuntimeError):
    """Solver exceeded the pass budget; a transfer is likely non-monotonic."""


def _pass_budget(fw: FrameworkInstance, cfg: ControlFlowGraph) -> int:
    return 2 + fw.product_lattice_height() * len(cfg.nodes)


def round_robin_solve(fw: FrameworkInstance, cfg: ControlFlowGraph, *,
                      convention: PassConvention = DEFAULT_CONVENTION,
                      record_trace: bool = True) -> SolveResult:
    """Round-robin iteration to the maximal fixed point, counting passes.

    Nodes are visited in ascending id order for forward instances and
    descending order for backward ones.  The final pass in which
    nothing changes is always executed; whether it is counted in
    ``iterations`` depends on the convention.
    """
    order = traversal_order(cfg, fw.direction)
    forward = fw.direction == FORWARD
    top = fw.space.top()
    in_vals: dict[int, ProductValue] = {n: top for n in cfg.nodes}
    out_vals: dict[int, ProductValue] = {n: top for n in cfg.nodes}
    trace: list[TraceRecord] = []
    budget = _pass_budget(fw, cfg)

    passes = 0
    while True:
        passes += 1
        if passes > budget:
            raise DivergenceError(
                f"{fw.kind}: no fixed point after {budget} passes; "
                "check transfer monotonicity")
        changed = False
        for node in order:
            # A pass counts as changing when any program-point value
            # moves, merged inputs included, not only transfer outputs.
            if forward:
                merged = _merge_forward(fw, cfg, node, out_vals)
                if merged != in_vals[node]:
                    changed = True
                    in_vals[node] = merged
                new_out = fw.transfer(node, merged)
                old_out = out_vals[node]
                if new_out != old_out:
                    changed = True
                    if record_trace:
                        _record_changes(trace, passes, node, fw, old_out,
                                        new_out, merged)
                    out_vals[node] = new_out
            else:
                merged = _merge_backward(fw, cfg, node, in_vals)
                if merged != out_vals[node]:
                    changed = True
                    out_vals[node] = merged
                new_in = fw.transfer(node, merged)
                old_in = in_vals[node]
                if new_in != old_in:
                    changed = True
                    if record_trace:
                        _record_changes(trace, passes, node, fw, old_in,
                                        new_in, merged)
                    in_vals[node] = new_in
        if not changed:
            break

    if convention is PassConvention.INCLUDE_FINAL_PASS:
        iterations = passes
    else:
        iterations = max(1, passes - 1)
    return SolveResult(in_values=in_vals, out_values=out_vals,
                       iterations=iterations, passes_executed=passes,
                       trace=tuple(trace), convention=convention)


def _merge_forward(fw: FrameworkInstance, cfg: ControlFlowGraph, node: int,
                   out_vals: dict[int, ProductValue]) -> ProductValue:
    parts = [out_vals[p] for p in cfg.predecessors[node]]
    if node == cfg.entry:
        parts.append(fw.boundary)
    if not parts:
        return fw.space.top()
    merged = parts[0]
    for part in parts[1:]:
        merged = meet_product(merged, part)
    return merged


def _merge_backward(fw: FrameworkInstance, cfg: ControlFlowGraph, node: int,
                    in_vals: dict[int, ProductValue]) -> ProductValue:
    parts = [in_vals[s] for s in cfg.successors[node]]
    if node in cfg.exits:
        parts.append(fw.boundary)
    if not parts:
        return fw.space.top()
    merged = parts[0]
    for part in parts[1:]:
        merged = meet_product(merged, part)
    return merged


def _record_changes(trace: list[TraceRecord], pass_no: int, node: int,
                    fw: FrameworkInstance, old: ProductValue,
                    new: ProductValue, inputs: ProductValue) -> None:
    uses = fw.dfpuse.get(node, frozenset())
    operands = tuple(sorted(((u, inputs[u]) for u in uses),
                            key=lambda item: str(item[0])))
    for idx, entity in enumerate(fw.space.entities):
        if old.values[idx] != new.values[idx]:
            trace.append(TraceRecord(pass_no, node, entity,
                                     old.values[idx], new.values[idx], operands))


def worklist_solve(fw: FrameworkInstance, cfg: ControlFlowGraph) -> SolveResult:
    """Worklist fixed point; an independent oracle for round_robin_solve.

    The returned ``iterations`` is the node-visit count, which is not
    comparable to round-robin pass counts.
    """
    forward = fw.direction == FORWARD
    top = fw.space.top()
    in_vals: dict[int, ProductValue] = {n: top for n in cfg.nodes}
    out_vals: dict[int, ProductValue] = {n: top for n in cfg.nodes}
    pending = deque(traversal_order(cfg, fw.direction))
    queued = set(pending)
    visits = 0
    budget = _pass_budget(fw, cfg) * max(1, len(cfg.nodes))

    while pending:
        visits += 1
        if visits > budget:
            raise DivergenceError(
                f"{fw.kind}: worklist exceeded {budget} visits; "
                "check transfer monotonicity")
        node = pending.popleft()
        queued.discard(node)
        if forward:
            merged = _merge_forward(fw, cfg, node, out_vals)
            in_vals[node] = merged
            new_out = fw.transfer(node, merged)
            if new_out != out_vals[node]:
                out_vals[node] = new_out
                for succ in cfg.successors[node]:
                    if succ not in queued:
                        pending.append(succ)
                        queued.add(succ)
        else:
            merged = _merge_backward(fw, cfg, node, in_vals)
            out_vals[node] = merged
            new_in = fw.transfer(node, merged)
            if new_in != in_vals[node]:
                in_vals[node] = new_in
                for pred in cfg.predecessors[node]:
                    if pred not in queued:
                        pending.append(pred)
                        queued.add(pred)

    return SolveResult(in_values=in_vals, out_values=out_vals,
                       iterations=max(1, visits), passes_executed=0,
                       trace=(), convention=None, visits=visits)


def check_monotonicity(fw: FrameworkInstance, sample_count: int, seed: int) -> bool:
    """Spot-check x <= y implies f(x) <= f(y) on seeded random ordered pairs.

    Draws ``sample_count`` pairs per node; x is forced below y by
    meeting y with a second random value.
    """
    if sample_count <= 0:
        raise ValueError("sample_count must be positive")
    rng = random.Random(seed)
    space = fw.space
    sample = space.lattice.sample
    width = len(space)
    for node in sorted(fw.transfers):
        f = fw.transfers[node]
        for _ in range(sample_count):
            y = ProductValue(space, tuple(sample(rng) for _ in range(width)))
            noise = ProductValue(space, tuple(sample(rng) for _ in range(width)))
            x = meet_product(y, noise)
            if not f(x).leq(f(y)):
                return False
    return True
