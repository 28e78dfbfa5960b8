"""Single bound derivation steps over connection cardinalities.

``None`` stands for an unbounded upper bound throughout. All arithmetic is on
Python integers, so products never overflow.
"""
from typing import Optional, Sequence, Tuple

from src.model.errors import ContractError
from src.model.types import Bound, Cardinality, OneToManyConnectionDef


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def binary_bound_step(per_source: Cardinality, per_target: Cardinality,
                      source_bounds: Bound) -> Bound:
    """Bound a target kind's count from a source kind over one binary connection.

    Args:
        per_source: Cardinality counting target partners per source component.
        per_target: Cardinality counting source partners per target component.
        source_bounds: Current bounds of the source kind.

    Returns:
        Bound: lower bound from the source's lower bound, upper bound from its
        upper bound; unbounded when the target may have no source partner.

    Raises:
        ContractError: If ``per_target`` has no finite positive upper bound.
    """
    l1, u1 = per_source.lower, per_source.upper
    l2, u2 = per_target.lower, per_target.upper
    if u2 is None or u2 < 1:
        raise ContractError(f"per-target upper bound must be finite and positive, got {per_target}")
    lb = _ceil_div(l1 * source_bounds.lb, u2)
    ub: Optional[int] = None
    if l2 > 0 and u1 is not None and source_bounds.ub is not None:
        ub = (u1 * source_bounds.ub) // l2
    return Bound(lb, ub)


def one_to_many_bound_step(otm: OneToManyConnectionDef, per_right: Sequence[Cardinality],
                           right_bounds: Sequence[Bound]) -> Bound:
    """Bound the left kind of a one-to-many connection from all its right kinds.

    ``per_right[i]`` counts left components per component of ``otm.rights[i]``.

    Raises:
        ContractError: If the connection's lower bound is below 1 or the
            sequences do not match ``otm.rights``.
    """
    l, u = otm.card.lower, otm.card.upper
    if l < 1:
        raise ContractError(f"one-to-many {otm.name} needs a lower bound of at least 1")
    if len(per_right) != len(otm.rights) or len(right_bounds) != len(otm.rights):
        raise ContractError(f"one-to-many {otm.name} needs one cardinality and bound per right kind")
    lb = 0
    if u is not None:
        lb = _ceil_div(sum(card.lower * b.lb for card, b in zip(per_right, right_bounds)), u)
    ub: Optional[int] = None
    if all(card.upper is not None and b.ub is not None for card, b in zip(per_right, right_bounds)):
        ub = sum(card.upper * b.ub for card, b in zip(per_right, right_bounds)) // l
    return Bound(lb, ub)


def update_bounds(current: Bound, candidate: Bound) -> Tuple[Bound, bool]:
    """Intersect ``current`` with ``candidate``; report whether anything tightened.

    No consistency check is made here.
    """
    lb = max(current.lb, candidate.lb)
    if current.ub is None:
        ub = candidate.ub
    elif candidate.ub is None:
        ub = current.ub
    else:
        ub = min(current.ub, candidate.ub)
    result = Bound(lb, ub)
    return result, result != current
