"""Tree-walking evaluation of connection constraints over attribute bindings."""
from typing import Mapping, Sequence

from src.model.errors import ContractError
from src.model.expr import (
    Arith, AttrRef, Compare, ConstraintExpr, IntLit, Logical, Side, Sum, SymLit, Term,
    contains_aggregate,
)
from src.model.types import Value

Binding = Mapping[str, Value]


def _lookup(binding: Binding, side: Side, attr: str) -> Value:
    try:
        return binding[attr]
    except KeyError:
        raise ContractError(f"unresolved attribute reference {side.value}.{attr}") from None


def _term(term: Term, env: Mapping[Side, Binding], partners: Sequence[Binding]) -> Value:
    if isinstance(term, IntLit):
        return term.value
    if isinstance(term, SymLit):
        return term.name
    if isinstance(term, AttrRef):
        if term.side not in env:
            raise ContractError(f"{term.side.value}.{term.attr} is not bound here")
        return _lookup(env[term.side], term.side, term.attr)
    if isinstance(term, Sum):
        return sum(int(_lookup(p, term.side, term.attr)) for p in partners)
    if isinstance(term, Arith):
        left = int(_term(term.left, env, partners))
        right = int(_term(term.right, env, partners))
        if term.op == "+":
            return left + right
        if term.op == "-":
            return left - right
        return left * right
    raise ContractError(f"not a term: {term!r}")


def _holds(expr: ConstraintExpr, env: Mapping[Side, Binding], partners: Sequence[Binding]) -> bool:
    if isinstance(expr, Logical):
        if expr.op == "and":
            return _holds(expr.left, env, partners) and _holds(expr.right, env, partners)
        return _holds(expr.left, env, partners) or _holds(expr.right, env, partners)
    left = _term(expr.left, env, partners)
    right = _term(expr.right, env, partners)
    op = expr.op
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<=":
        return left <= right
    if op == "<":
        return left < right
    if op == ">=":
        return left >= right
    return left > right


def eval_constraint(expr: ConstraintExpr, self_binding: Binding, partners: Sequence[Binding],
                    owner: Side = Side.RIGHT) -> bool:
    """Evaluate ``expr`` for one component and its partner set.

    Args:
        expr: A well-formed constraint expression.
        self_binding: Attribute values of the owning component.
        partners: Attribute values of every partner of the owning component.
        owner: Which side of the connection the owning component is on.

    Returns:
        bool: for an aggregate expression, its value over the whole partner set;
        otherwise whether it holds on every edge (vacuously true without partners).

    Raises:
        ContractError: If an attribute reference does not resolve.
    """
    if contains_aggregate(expr):
        return _holds(expr, {owner: self_binding}, partners)
    return all(_holds(expr, {owner: self_binding, owner.other: p}, partners) for p in partners)
