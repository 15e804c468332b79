"""Predicted iteration bounds, measured iterations, and report emission.

Two predictions are compared against the measured round-robin pass
count I:

* B1 = 1 + d*H, from depth and the product-lattice height alone;
* B2 = 1 + delta + d, which also charges the entity dependences.

A record with I above either bound marks a solver or delta bug and is
flagged ``violated``.  Records for acyclic programs (d = 0) carry
trivial bounds; downstream consumers can recognize them by the d
column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

from .analyses import ANALYSIS_KINDS, make_framework
from .cfg_metrics import DEFAULT_NODE_CAP, DEFAULT_STEP_CAP, WeightTable
from .edg import DEFAULT_DELTA_STEP_CAP, EntityDependenceGraph, build_edg, degree_of_dependence
from .engine import (
    DEFAULT_CONVENTION,
    FrameworkInstance,
    PassConvention,
    SolveResult,
    product_height,
    round_robin_solve,
)
from .ir import Program, build_cfg

CSV_HEADER = "program,analysis,nodes,vars,d,H,delta,B1,B2,I,dev1,dev2,violated"


def simplistic_bound(d: int, H: int) -> int:
    """Height-based prediction: one pass plus d passes per possible change."""
    if d < 0 or H < 0:
        raise ValueError("d and H must be non-negative")
    return 1 + d * H


def edg_bound(d: int, delta: int) -> int:
    """Dependence-based prediction: 1 + delta + d."""
    if d < 0 or delta < 0:
        raise ValueError("d and delta must be non-negative")
    return 1 + delta + d


@dataclass(frozen=True)
class BoundsRecord:
    program: str
    analysis: str
    nodes: int
    vars: int
    d: int
    h_hat: int
    H: int
    delta: int
    b1: int
    b2: int
    iterations: int
    dev1: int
    dev2: int
    bound_violated: bool

    @property
    def acyclic(self) -> bool:
        return self.d == 0

    def csv_row(self) -> str:
        return ",".join(str(v) for v in (
            self.program, self.analysis, self.nodes, self.vars, self.d,
            self.H, self.delta, self.b1, self.b2, self.iterations,
            self.dev1, self.dev2, "true" if self.bound_violated else "false"))

    def as_report_dict(self) -> dict:
        return {
            "program": self.program,
            "analysis": self.analysis,
            "nodes": self.nodes,
            "vars": self.vars,
            "d": self.d,
            "H": self.H,
            "delta": self.delta,
            "B1": self.b1,
            "B2": self.b2,
            "I": self.iterations,
            "dev1": self.dev1,
            "dev2": self.dev2,
            "violated": self.bound_violated,
        }


class ProgramPipeline:
    """Metrics -> framework -> solve -> EDG -> delta -> bounds, with caching.

    One pipeline per program; CFG metrics and pairwise weights are
    shared across analysis kinds.
    """

    def __init__(self, program: Program, *,
                 convention: PassConvention = DEFAULT_CONVENTION,
                 node_cap: int = DEFAULT_NODE_CAP,
                 step_cap: int = DEFAULT_STEP_CAP,
                 delta_step_cap: int = DEFAULT_DELTA_STEP_CAP):
        self.program = program
        self.convention = convention
        self.delta_step_cap = delta_step_cap
        self.cfg = build_cfg(program)
        self.weights = WeightTable(self.cfg, node_cap=node_cap, step_cap=step_cap)
        self._frameworks: dict[str, FrameworkInstance] = {}
        self._solutions: dict[str, SolveResult] = {}
        self._edgs: dict[str, EntityDependenceGraph] = {}

    @cached_property
    def depth(self) -> int:
        return self.weights.depth

    def framework(self, kind: str) -> FrameworkInstance:
        if kind not in self._frameworks:
            self._frameworks[kind] = make_framework(self.program, kind, self.cfg)
        return self._frameworks[kind]

    def solution(self, kind: str) -> SolveResult:
        if kind not in self._solutions:
            self._solutions[kind] = round_robin_solve(
                self.framework(kind), self.cfg, convention=self.convention)
        return self._solutions[kind]

    def edg(self, kind: str) -> EntityDependenceGraph:
        if kind not in self._edgs:
            self._edgs[kind] = build_edg(self.program, self.framework(kind),
                                         cfg=self.cfg, weights=self.weights)
        return self._edgs[kind]

    def delta(self, kind: str) -> int:
        fw = self.framework(kind)
        return degree_of_dependence(self.edg(kind), fw.lattice.height,
                                    fw.monotonic_entity_dependence,
                                    max_steps=self.delta_step_cap)

    def record(self, kind: str) -> BoundsRecord:
        fw = self.framework(kind)
        xi = len(fw.entities)
        h_hat = fw.lattice.height
        big_h = product_height(h_hat, xi)
        d = self.depth
        delta = self.delta(kind)
        iterations = self.solution(kind).iterations
        b1 = simplistic_bound(d, big_h)
        b2 = edg_bound(d, delta)
        return BoundsRecord(
            program=self.program.name, analysis=kind,
            nodes=len(self.cfg.nodes), vars=xi, d=d, h_hat=h_hat, H=big_h,
            delta=delta, b1=b1, b2=b2, iterations=iterations,
            dev1=b1 - iterations, dev2=b2 - iterations,
            bound_violated=iterations > b2 or iterations > b1)


def make_record(program: Program, kind: str, *,
                convention: PassConvention = DEFAULT_CONVENTION) -> BoundsRecord:
    """Run the full pipeline for one (program, analysis) pair."""
    if kind not in ANALYSIS_KINDS:
        raise ValueError(f"unknown analysis kind {kind!r}")
    return ProgramPipeline(program, convention=convention).record(kind)


def emit_report(records: list[BoundsRecord], format: str = "csv") -> bytes:
    """Render records, preserving input order, as CSV or JSON bytes."""
    if format == "csv":
        lines = [CSV_HEADER]
        lines.extend(r.csv_row() for r in records)
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "json":
        payload = [r.as_report_dict() for r in records]
        return (json.dumps(payload, indent=2) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")
