"""Deterministic random program generation.

Programs are built structurally from sequences, if-diamonds, and
while-loops, so node ids follow program order and every loop's back
edge targets its header.  With ``irreducible_edge_probability`` zero
(the default) the generated CFGs are reducible; a positive value adds
extra edges that may break reducibility.

Generation is a pure function of (config, program index): the same
inputs always produce structurally identical programs and, once
serialized, byte-identical files.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .ir import (
    BinAssign,
    ConstAssign,
    CopyAssign,
    Print,
    Program,
    ReadAssign,
    Skip,
    Statement,
)

DEFAULT_STMT_WEIGHTS: dict[str, float] = {
    "const": 3.0,
    "copy": 2.0,
    "binop": 4.0,
    "read": 1.0,
    "print": 2.0,
    "skip": 1.0,
}

_VAR_POOL = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for one generated program.

    ``variable_count`` may be a fixed int or an inclusive (lo, hi)
    range sampled per program.  ``node_budget`` bounds the node count
    from above; the structural builder may stop short.
    """

    seed: int = 42
    node_budget: int = 60
    variable_count: int | tuple[int, int] = (4, 8)
    loop_depth: int = 2
    stmt_weights: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_STMT_WEIGHTS))
    irreducible_edge_probability: float = 0.0


class _Builder:
    def __init__(self, rng: random.Random, config: GeneratorConfig, name: str):
        self.rng = rng
        self.config = config
        self.name = name
        count = config.variable_count
        if isinstance(count, tuple):
            count = rng.randint(count[0], count[1])
        if count < 1:
            raise ValueError("need at least one variable")
        self.variables = tuple(
            _VAR_POOL[i] if i < len(_VAR_POOL) else f"v{i}" for i in range(count))
        self.nodes: dict[int, Statement] = {}
        self.edges: list[tuple[int, int]] = []
        self.kinds = list(config.stmt_weights.keys())
        self.weights = [float(config.stmt_weights[k]) for k in self.kinds]

    def fresh_node(self, stmt: Statement) -> int:
        node_id = len(self.nodes) + 1
        self.nodes[node_id] = stmt
        return node_id

    def connect(self, src: int, dst: int) -> None:
        if (src, dst) not in self.edges:
            self.edges.append((src, dst))

    def random_stmt(self) -> Statement:
        kind = self.rng.choices(self.kinds, weights=self.weights, k=1)[0]
        rng = self.rng
        var = lambda: rng.choice(self.variables)
        if kind == "const":
            return ConstAssign(var(), rng.randint(-99, 99))
        if kind == "copy":
            return CopyAssign(var(), var())
        if kind == "binop":
            op = rng.choice("+-*")
            left = var() if rng.random() < 0.8 else rng.randint(-9, 9)
            right = var() if rng.random() < 0.8 else rng.randint(-9, 9)
            return BinAssign(var(), left, op, right)
        if kind == "read":
            return ReadAssign(var())
        if kind == "print":
            return Print(var())
        return Skip()

    def build(self) -> Program:
        budget = max(1, self.config.node_budget)
        head = self.fresh_node(self.random_stmt())
        tail = self.sequence(head, budget - 1, self.config.loop_depth)
        self.maybe_add_extra_edges(tail)
        return Program(
            name=self.name,
            variables=self.variables,
            nodes=dict(sorted(self.nodes.items())),
            edges=tuple(self.edges),
            entry=1,
            exits=frozenset(
                n for n in self.nodes if all(s != n for s, _ in self.edges)),
        )

    def sequence(self, tail: int, budget: int, loop_depth: int) -> int:
        """Append items after `tail` until the budget runs out; returns the new tail."""
        while budget > 0:
            roll = self.rng.random()
            if budget >= 4 and roll < 0.18:
                tail, budget = self.diamond(tail, budget, loop_depth)
            elif budget >= 3 and loop_depth > 0 and roll < 0.38:
                tail, budget = self.loop(tail, budget, loop_depth)
            else:
                node = self.fresh_node(self.random_stmt())
                self.connect(tail, node)
                tail = node
                budget -= 1
        return tail

    def diamond(self, tail: int, budget: int, loop_depth: int) -> tuple[int, int]:
        head = self.fresh_node(self.random_stmt())
        self.connect(tail, head)
        budget -= 2  # head plus join
        inner = max(0, min(budget - 1, self.rng.randint(0, budget - 1)))
        then_budget = self.rng.randint(0, inner)
        else_budget = inner - then_budget
        before = len(self.nodes)
        then_tail = self.sequence(head, then_budget, loop_depth)
        spent_then = len(self.nodes) - before
        before = len(self.nodes)
        else_tail = self.sequence(head, else_budget, loop_depth)
        spent_else = len(self.nodes) - before
        join = self.fresh_node(Skip())
        self.connect(then_tail, join)
        self.connect(else_tail, join)
        return join, budget - spent_then - spent_else

    def loop(self, tail: int, budget: int, loop_depth: int) -> tuple[int, int]:
        header = self.fresh_node(self.random_stmt())
        self.connect(tail, header)
        budget -= 1
        body_budget = max(1, min(budget - 1, self.rng.randint(1, max(1, budget // 2))))
        before = len(self.nodes)
        body_head = self.fresh_node(self.random_stmt())
        self.connect(header, body_head)
        body_tail = self.sequence(body_head, body_budget - 1, loop_depth - 1)
        spent = len(self.nodes) - before
        self.connect(body_tail, header)
        return header, budget - spent

    def maybe_add_extra_edges(self, final_tail: int) -> None:
        prob = self.config.irreducible_edge_probability
        if prob <= 0:
            return
        ids = sorted(self.nodes)
        for src in ids:
            if src == final_tail:
                continue
            if self.rng.random() < prob:
                dst = self.rng.choice([n for n in ids if n != src])
                self.connect(src, dst)


def generate_program(config: GeneratorConfig, index: int = 0,
                     name: str | None = None) -> Program:
    """Generate one program; deterministic in (config, index)."""
    rng = random.Random(f"{config.seed}/{index}")
    if name is None:
        name = f"p{index:04d}"
    return _Builder(rng, config, name).build()


def generate_corpus(config: GeneratorConfig, count: int) -> list[Program]:
    """Generate `count` programs; deterministic in (config, count)."""
    if count <= 0:
        raise ValueError("count must be positive")
    return [generate_program(config, i) for i in range(count)]
