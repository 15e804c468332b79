"""Mini-IR: statements, programs, control flow graphs, and the text format.

A program is a list of declared variables plus numbered nodes, one
statement per node, connected by explicit edges.  The text format is
line oriented:

    program NAME
    vars NAME ("," NAME)*
    node INT STMT
    edge INT "->" INT
    entry INT            (optional; defaults to the lowest node id)
    exit INT             (optional, repeatable; defaults to nodes
                          without successors)

    STMT := NAME "=" RHS | "print" NAME | "skip"
    RHS  := INT | NAME | OPND OP OPND | "read()"
    OPND := NAME | INT
    OP   := "+" | "-" | "*"

Comments start with '#' and run to end of line; blank lines are
ignored.  Integer literals must fit in the signed 64-bit range and all
arithmetic wraps around in two's complement.

Program and ControlFlowGraph are immutable once constructed and safe
to share between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

_KEYWORDS = {
    "program", "vars", "node", "edge", "entry", "exit",
    "print", "skip", "read",
}

BINARY_OPS = ("+", "-", "*")


def wrap64(value: int) -> int:
    """Reduce an integer to signed 64-bit two's complement."""
    return (value - INT64_MIN) % (2**64) + INT64_MIN


# ---------------------------------------------------------------------------
# statements


@dataclass(frozen=True)
class ConstAssign:
    target: str
    value: int


@dataclass(frozen=True)
class CopyAssign:
    target: str
    source: str


@dataclass(frozen=True)
class BinAssign:
    target: str
    left: Union[str, int]
    op: str
    right: Union[str, int]


@dataclass(frozen=True)
class ReadAssign:
    target: str


@dataclass(frozen=True)
class Print:
    source: str


@dataclass(frozen=True)
class Skip:
    pass


Statement = Union[ConstAssign, CopyAssign, BinAssign, ReadAssign, Print, Skip]

ASSIGNMENTS = (ConstAssign, CopyAssign, BinAssign, ReadAssign)


def stmt_target(stmt: Statement) -> str | None:
    """Variable defined by the statement, or None."""
    if isinstance(stmt, ASSIGNMENTS):
        return stmt.target
    return None


def stmt_uses(stmt: Statement) -> frozenset[str]:
    """Variables read by the statement."""
    if isinstance(stmt, CopyAssign):
        return frozenset((stmt.source,))
    if isinstance(stmt, BinAssign):
        return frozenset(o for o in (stmt.left, stmt.right) if isinstance(o, str))
    if isinstance(stmt, Print):
        return frozenset((stmt.source,))
    return frozenset()


def _render_operand(op: Union[str, int]) -> str:
    return op if isinstance(op, str) else str(op)


def render_stmt(stmt: Statement) -> str:
    if isinstance(stmt, ConstAssign):
        return f"{stmt.target} = {stmt.value}"
    if isinstance(stmt, CopyAssign):
        return f"{stmt.target} = {stmt.source}"
    if isinstance(stmt, BinAssign):
        return (f"{stmt.target} = {_render_operand(stmt.left)} "
                f"{stmt.op} {_render_operand(stmt.right)}")
    if isinstance(stmt, ReadAssign):
        return f"{stmt.target} = read()"
    if isinstance(stmt, Print):
        return f"print {stmt.source}"
    if isinstance(stmt, Skip):
        return "skip"
    raise TypeError(f"not a statement: {stmt!r}")


# ---------------------------------------------------------------------------
# program and CFG


@dataclass(frozen=True)
class Program:
    """A parsed and fully resolved program.

    Node ids are unique positive integers; edges reference declared
    nodes only.  `exits` may be empty: a program whose every node has a
    successor simply has no boundary nodes for backward analyses.
    """

    name: str
    variables: tuple[str, ...]
    nodes: dict[int, Statement]
    edges: tuple[tuple[int, int], ...]
    entry: int
    exits: frozenset[int]

    def node_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.nodes))


@dataclass(frozen=True)
class ControlFlowGraph:
    """Successor/predecessor view of a validated Program."""

    program: Program
    nodes: tuple[int, ...]
    successors: dict[int, tuple[int, ...]]
    predecessors: dict[int, tuple[int, ...]]
    entry: int
    exits: frozenset[int]

    def statement(self, node: int) -> Statement:
        return self.program.nodes[node]

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self.program.edges


@dataclass(frozen=True)
class Diagnostic:
    """One violated program invariant, with its location."""

    code: str
    message: str
    node: int | None = None
    edge: tuple[int, int] | None = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ParseError(ValueError):
    """Syntax or resolution error in IR text, with line/column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class InvalidProgramError(ValueError):
    """Raised when an operation requires a program that validates cleanly."""

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# parsing

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_INT_RE = re.compile(r"-?[0-9]+$")


def _is_name(token: str) -> bool:
    return bool(_NAME_RE.match(token)) and token not in _KEYWORDS


def _check_literal(token: str, lineno: int, col: int) -> int:
    value = int(token)
    if not INT64_MIN <= value <= INT64_MAX:
        raise ParseError(f"integer literal {token} out of 64-bit range", lineno, col)
    return value


class _LineParser:
    """Parses one logical source file into a Program."""

    def __init__(self, text: str):
        self.text = text
        self.name: str | None = None
        self.variables: list[str] = []
        self.nodes: dict[int, Statement] = {}
        self.edges: list[tuple[int, int]] = []
        self.entry: int | None = None
        self.exits: list[int] = []

    def parse(self) -> Program:
        for lineno, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            self._parse_line(line, lineno)
        if self.name is None:
            raise ParseError("missing 'program' declaration", 1)
        if not self.nodes:
            raise ParseError("program has no nodes", 1)
        entry = self.entry if self.entry is not None else min(self.nodes)
        if self.exits:
            exits = frozenset(self.exits)
        else:
            with_succ = {src for src, _ in self.edges}
            exits = frozenset(n for n in self.nodes if n not in with_succ)
        return Program(
            name=self.name,
            variables=tuple(self.variables),
            nodes=dict(sorted(self.nodes.items())),
            edges=tuple(self.edges),
            entry=entry,
            exits=exits,
        )

    def _column(self, line: str, token: str) -> int:
        pos = line.find(token)
        return pos + 1 if pos >= 0 else 1

    def _parse_line(self, line: str, lineno: int) -> None:
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "program":
            if len(tokens) != 2 or not _is_name(tokens[1]):
                raise ParseError("expected 'program NAME'", lineno, 1)
            self.name = tokens[1]
        elif keyword == "vars":
            rest = line.split(None, 1)
            if len(rest) < 2:
                raise ParseError("expected 'vars NAME, NAME, ...'", lineno, 1)
            for piece in rest[1].split(","):
                var = piece.strip()
                if not _is_name(var):
                    raise ParseError(f"bad variable name {var!r}", lineno,
                                     self._column(line, piece.strip() or ","))
                if var in self.variables:
                    raise ParseError(f"duplicate variable {var!r}", lineno,
                                     self._column(line, var))
                self.variables.append(var)
        elif keyword == "node":
            self._parse_node(line, tokens, lineno)
        elif keyword == "edge":
            self._parse_edge(line, tokens, lineno)
        elif keyword == "entry":
            if len(tokens) != 2 or not _INT_RE.match(tokens[1]):
                raise ParseError("expected 'entry INT'", lineno, 1)
            self.entry = int(tokens[1])
        elif keyword == "exit":
            if len(tokens) != 2 or not _INT_RE.match(tokens[1]):
                raise ParseError("expected 'exit INT'", lineno, 1)
            self.exits.append(int(tokens[1]))
        else:
            raise ParseError(f"unknown directive {keyword!r}", lineno, 1)

    def _parse_edge(self, line: str, tokens: list[str], lineno: int) -> None:
        if len(tokens) != 4 or tokens[2] != "->" \
                or not _INT_RE.match(tokens[1]) or not _INT_RE.match(tokens[3]):
            raise ParseError("expected 'edge INT -> INT'", lineno, 1)
        self.edges.append((int(tokens[1]), int(tokens[3])))

    def _parse_node(self, line: str, tokens: list[str], lineno: int) -> None:
        if len(tokens) < 3 or not _INT_RE.match(tokens[1]):
            raise ParseError("expected 'node INT STMT'", lineno, 1)
        node_id = int(tokens[1])
        if node_id <= 0:
            raise ParseError(f"node id must be positive, got {node_id}",
                             lineno, self._column(line, tokens[1]))
        if node_id in self.nodes:
            raise ParseError(f"duplicate node id {node_id}", lineno,
                             self._column(line, tokens[1]))
        stmt_tokens = tokens[2:]
        self.nodes[node_id] = self._parse_stmt(line, stmt_tokens, lineno)

    def _operand(self, line: str, token: str, lineno: int) -> Union[str, int]:
        if _INT_RE.match(token):
            return _check_literal(token, lineno, self._column(line, token))
        if _is_name(token):
            self._require_declared(token, line, lineno)
            return token
        raise ParseError(f"bad operand {token!r}", lineno, self._column(line, token))

    def _require_declared(self, var: str, line: str, lineno: int) -> None:
        if var not in self.variables:
            raise ParseError(f"undeclared variable {var!r}", lineno,
                             self._column(line, var))

    def _parse_stmt(self, line: str, tokens: list[str], lineno: int) -> Statement:
        if tokens == ["skip"]:
            return Skip()
        if tokens[0] == "print":
            if len(tokens) != 2 or not _is_name(tokens[1]):
                raise ParseError("expected 'print NAME'", lineno, 1)
            self._require_declared(tokens[1], line, lineno)
            return Print(tokens[1])
        if len(tokens) >= 3 and tokens[1] == "=":
            target = tokens[0]
            if not _is_name(target):
                raise ParseError(f"bad assignment target {target!r}", lineno,
                                 self._column(line, target))
            self._require_declared(target, line, lineno)
            rhs = tokens[2:]
            if rhs == ["read()"] or rhs == ["read", "(", ")"]:
                return ReadAssign(target)
            if len(rhs) == 1:
                if _INT_RE.match(rhs[0]):
                    value = _check_literal(rhs[0], lineno, self._column(line, rhs[0]))
                    return ConstAssign(target, value)
                if _is_name(rhs[0]):
                    self._require_declared(rhs[0], line, lineno)
                    return CopyAssign(target, rhs[0])
                raise ParseError(f"bad right-hand side {rhs[0]!r}", lineno,
                                 self._column(line, rhs[0]))
            if len(rhs) == 3:
                if rhs[1] not in BINARY_OPS:
                    raise ParseError(f"unknown operator {rhs[1]!r}", lineno,
                                     self._column(line, rhs[1]))
                left = self._operand(line, rhs[0], lineno)
                right = self._operand(line, rhs[2], lineno)
                return BinAssign(target, left, rhs[1], right)
        raise ParseError(f"cannot parse statement {' '.join(tokens)!r}", lineno, 1)


def parse_program(text: str) -> Program:
    """Parse IR text into a Program.

    Raises ParseError (with line/column) on syntax errors, undeclared
    variables, duplicate node ids, and unknown operators.
    """
    return _LineParser(text).parse()


# ---------------------------------------------------------------------------
# validation

def validate_program(program: Program) -> list[Diagnostic]:
    """Check all Program invariants; an empty list means the program is valid."""
    diags: list[Diagnostic] = []
    declared = set(program.variables)

    seen_vars = set()
    for var in program.variables:
        if var in seen_vars:
            diags.append(Diagnostic("duplicate-variable", f"variable {var!r} declared twice"))
        seen_vars.add(var)

    for node_id, stmt in program.nodes.items():
        if not isinstance(node_id, int) or node_id <= 0:
            diags.append(Diagnostic("invalid-node-id",
                                    f"node id {node_id!r} is not a positive integer",
                                    node=node_id))
        mentioned = set(stmt_uses(stmt))
        target = stmt_target(stmt)
        if target is not None:
            mentioned.add(target)
        for var in sorted(mentioned - declared):
            diags.append(Diagnostic("undeclared-variable",
                                    f"node {node_id} mentions undeclared variable {var!r}",
                                    node=node_id))
        if isinstance(stmt, ConstAssign) and not INT64_MIN <= stmt.value <= INT64_MAX:
            diags.append(Diagnostic("literal-out-of-range",
                                    f"node {node_id} literal {stmt.value} exceeds 64-bit range",
                                    node=node_id))

    for edge in program.edges:
        for endpoint in edge:
            if endpoint not in program.nodes:
                diags.append(Diagnostic("undefined-node-in-edge",
                                        f"edge {edge[0]}->{edge[1]} references undefined node {endpoint}",
                                        edge=edge))

    if program.entry not in program.nodes:
        diags.append(Diagnostic("undefined-entry",
                                f"entry {program.entry} is not a declared node",
                                node=program.entry))
    for ex in sorted(program.exits):
        if ex not in program.nodes:
            diags.append(Diagnostic("undefined-exit",
                                    f"exit {ex} is not a declared node", node=ex))

    if program.entry in program.nodes:
        reachable = _reachable_from(program, program.entry)
        for node_id in sorted(set(program.nodes) - reachable):
            diags.append(Diagnostic("unreachable-node",
                                    f"node {node_id} is not reachable from entry",
                                    node=node_id))
    return diags


def _reachable_from(program: Program, start: int) -> set[int]:
    succ: dict[int, list[int]] = {n: [] for n in program.nodes}
    for src, dst in program.edges:
        if src in succ and dst in program.nodes:
            succ[src].append(dst)
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for nxt in succ[node]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def build_cfg(program: Program) -> ControlFlowGraph:
    """Build the successor/predecessor view.  Requires a valid program."""
    diags = validate_program(program)
    if diags:
        raise InvalidProgramError(diags)
    succ: dict[int, list[int]] = {n: [] for n in program.nodes}
    pred: dict[int, list[int]] = {n: [] for n in program.nodes}
    for src, dst in program.edges:
        if dst not in succ[src]:
            succ[src].append(dst)
            pred[dst].append(src)
    return ControlFlowGraph(
        program=program,
        nodes=tuple(sorted(program.nodes)),
        successors={n: tuple(sorted(s)) for n, s in succ.items()},
        predecessors={n: tuple(sorted(p)) for n, p in pred.items()},
        entry=program.entry,
        exits=program.exits,
    )


# ---------------------------------------------------------------------------
# serialization

def serialize_program(program: Program) -> str:
    """Render a Program as IR text; parse_program round-trips it."""
    lines = [f"program {program.name}"]
    if program.variables:
        lines.append("vars " + ", ".join(program.variables))
    for node_id in sorted(program.nodes):
        lines.append(f"node {node_id}  {render_stmt(program.nodes[node_id])}")
    for src, dst in program.edges:
        lines.append(f"edge {src} -> {dst}")
    lines.append(f"entry {program.entry}")
    for ex in sorted(program.exits):
        lines.append(f"exit {ex}")
    return "\n".join(lines) + "\n"
