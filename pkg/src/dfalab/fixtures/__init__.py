"""Shipped example programs."""

from importlib import resources

from ..ir import Program, parse_program


def fixture_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def load(name: str) -> Program:
    return parse_program(fixture_text(name))


def fig3() -> Program:
    """The looping eight-node program used throughout the test suite."""
    return load("fig3.prog")


def fig3_swap() -> Program:
    """fig3 with the assignments of nodes 5 and 7 exchanged."""
    return load("fig3_swap.prog")
