"""Constraint expressions attached to binary connection directions.

The tree covers linear arithmetic over integer attributes, (in)equalities,
conjunction, disjunction and the ``sum`` aggregate over a component's partner
set. Nodes are immutable and compare structurally.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union


class Side(Enum):
    """Which endpoint of a connection an attribute reference reads."""
    LEFT = "left"
    RIGHT = "right"

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


ARITHMETIC_OPS = ("+", "-", "*")
COMPARISON_OPS = ("=", "!=", "<=", "<", ">=", ">")
ORDERING_OPS = ("<=", "<", ">=", ">")
LOGICAL_OPS = ("and", "or")


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class SymLit:
    """A symbolic constant such as ``red``."""
    name: str


@dataclass(frozen=True)
class AttrRef:
    side: Side
    attr: str


@dataclass(frozen=True)
class Sum:
    """Sum of ``side.attr`` over all partners of the owning component."""
    side: Side
    attr: str


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Logical:
    op: str
    left: "ConstraintExpr"
    right: "ConstraintExpr"


Term = Union[IntLit, SymLit, AttrRef, Sum, Arith]
ConstraintExpr = Union[Compare, Logical]
Node = Union[Term, ConstraintExpr]


def walk(node: Node) -> Iterator[Node]:
    """Yield every node of the tree, parents before children."""
    yield node
    if isinstance(node, (Arith, Compare, Logical)):
        yield from walk(node.left)
        yield from walk(node.right)


def contains_aggregate(node: Node) -> bool:
    return any(isinstance(n, Sum) for n in walk(node))


def attribute_refs(node: Node) -> Iterator[AttrRef]:
    """Attribute references outside aggregates."""
    for n in walk(node):
        if isinstance(n, AttrRef):
            yield n


def aggregates(node: Node) -> Iterator[Sum]:
    for n in walk(node):
        if isinstance(n, Sum):
            yield n
