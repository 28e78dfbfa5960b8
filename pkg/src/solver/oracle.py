"""Exhaustive feasibility oracle for desk-scale specs.

Enumerates every count vector up to ``cap`` and, for each vector, every row
and edge assignment up to renaming of synthesized ids, accepting a vector as
soon as the model checker accepts one configuration. Meant for
cross-checking the solver and the bounds engine. The bounds engine is
consulted only to check that ``cap`` covers every generated upper bound; it
never prunes the enumeration.
"""
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Set, Tuple

import structlog

from src.bounds.propagation import BoundsMap, propagate
from src.config.settings import ORACLE_CAP_LIMIT
from src.model.errors import ContractError
from src.model.types import (
    CatalogueRow, ComponentClass, ComponentInstance, Configuration, InstanceSpec, ProblemSpec,
)
from src.solver.checker import check_model
from src.validator.classes import effective_classes

logger = structlog.get_logger(__name__)


class _Enumerator:
    def __init__(self, spec: ProblemSpec, inst: InstanceSpec,
                 classes: Dict[str, ComponentClass], counts: Dict[str, int]) -> None:
        self.spec = spec
        self.inst = inst
        # (kind, id, candidate rows, synthesized)
        self.members: List[Tuple[str, str, Tuple[CatalogueRow, ...], bool]] = []
        self.ok = True
        for kind in spec.kinds:
            if classes[kind.name] is ComponentClass.INPUT:
                ids = list(inst.input_domains.get(kind.name, ()))
                fixed = set(ids)
            else:
                fixed = self._named_ids(kind.name)
                if len(fixed) > counts[kind.name]:
                    self.ok = False
                ids = list(fixed) + [f"{kind.name}#{k}"
                                     for k in range(1, counts[kind.name] - len(fixed) + 1)]
            for ident in ids:
                rows = tuple(row for row in spec.catalogue_of(kind.name)
                             if all(atom.matches(row) for atom in inst.required_atoms
                                    if atom.kind == kind.name and atom.id == ident))
                self.members.append((kind.name, ident, rows, ident not in fixed))
        self.chosen: List[Optional[CatalogueRow]] = [None] * len(self.members)
        self.position = {(m[0], m[1]): i for i, m in enumerate(self.members)}

    def _named_ids(self, kind: str) -> List[str]:
        named = list(dict.fromkeys(inst_id for inst_id in self.inst.required_ids(kind)))
        for lit in self.inst.connection_literals:
            conn = self.spec.connections_by_name.get(lit.connection)
            if lit.positive and conn is not None:
                if conn.left == kind and lit.left_id not in named:
                    named.append(lit.left_id)
                if conn.right == kind and lit.right_id not in named:
                    named.append(lit.right_id)
        return named

    def of_kind(self, kind: str) -> List[int]:
        return [i for i, m in enumerate(self.members) if m[0] == kind]

    def exists(self) -> bool:
        if not self.ok or not self._degrees_possible():
            return False
        return any(True for _ in self._rows(0))

    def _degrees_possible(self) -> bool:
        for conn in self.spec.binary_connections:
            lefts, rights = len(self.of_kind(conn.left)), len(self.of_kind(conn.right))
            if conn.self_loop:
                if lefts and conn.forward.lower > lefts - 1:
                    return False
            elif lefts * conn.forward.lower > rights * conn.backward.upper or \
                    rights * conn.backward.lower > lefts * conn.forward.upper:
                return False
        return True

    def _rows(self, i: int) -> Iterator[None]:
        if i == len(self.members):
            yield from self._edges()
            return
        kind, _, rows, synthesized = self.members[i]
        floor = 0
        if synthesized and i > 0 and self.members[i - 1][0] == kind and self.members[i - 1][3]:
            floor = rows.index(self.chosen[i - 1])
        for row in rows[floor:]:
            self.chosen[i] = row
            yield from self._rows(i + 1)

    def _edges(self) -> Iterator[None]:
        edges: Dict[str, Set[Tuple[int, int]]] = {c.name: set() for c in self.spec.binary_connections}
        touched = [0] * len(self.members)
        tasks = [(conn, left) for conn in self.spec.binary_connections for left in self.of_kind(conn.left)]

        def incoming(conn_name: str, right: int) -> int:
            return sum(1 for _, r in edges[conn_name] if r == right)

        def step(t: int) -> Iterator[None]:
            if t == len(tasks):
                if check_model(self.spec, self.inst, self._configuration(edges)).accepted:
                    yield None
                return
            conn, left = tasks[t]
            partners = [r for r in self.of_kind(conn.right) if not (conn.self_loop and r == left)]
            if conn.backward is not None:
                partners = [r for r in partners if incoming(conn.name, r) < conn.backward.upper]
            upper = min(conn.forward.upper, len(partners))
            # in a self-loop, lefts already decided are no longer interchangeable
            done = {l for c, l in tasks[:t] if c is conn} if conn.self_loop else set()
            for size in range(conn.forward.lower, upper + 1):
                for subset in combinations(partners, size):
                    if not self._canonical(subset, partners, touched, done):
                        continue
                    for r in subset:
                        edges[conn.name].add((left, r))
                        touched[r] += 1
                    touched[left] += len(subset)
                    yield from step(t + 1)
                    for r in subset:
                        edges[conn.name].discard((left, r))
                        touched[r] -= 1
                    touched[left] -= len(subset)

        yield from step(0)

    def _canonical(self, subset: Tuple[int, ...], partners: List[int], touched: List[int],
                   done: Set[int]) -> bool:
        """Untouched synthesized partners with equal rows are picked in order."""
        chosen = set(subset)
        skipped: Set[Tuple[str, CatalogueRow]] = set()
        for r in partners:
            kind, _, _, synthesized = self.members[r]
            if not synthesized or touched[r] or r in done:
                continue
            key = (kind, self.chosen[r])
            if r in chosen and key in skipped:
                return False
            if r not in chosen:
                skipped.add(key)
        return True

    def _configuration(self, edges: Dict[str, Set[Tuple[int, int]]]) -> Configuration:
        instances: Dict[str, List[ComponentInstance]] = {}
        for i, (kind, ident, _, _) in enumerate(self.members):
            instances.setdefault(kind, []).append(ComponentInstance(ident, self.chosen[i]))
        named = {
            name: {(self.members[l][1], self.members[r][1]) for l, r in pairs}
            for name, pairs in edges.items()
        }
        return Configuration(instances=instances, edges=named)


def brute_force_solve(spec: ProblemSpec, inst: InstanceSpec, cap: int) -> Set[Tuple[int, ...]]:
    """Every generated-kind count vector, in declaration order, that admits a model.

    Args:
        spec: A well-formed problem specification.
        inst: Instance knowledge with every both kind assigned.
        cap: Largest count tried per generated kind.

    Returns:
        Set[Tuple[int, ...]]: feasible count vectors; ``{()}`` for a satisfiable
        input-only spec.

    Raises:
        ContractError: If ``cap`` is negative, above the oracle limit, or below
            the upper bound of some generated kind.
    """
    if not 0 <= cap <= ORACLE_CAP_LIMIT:
        raise ContractError(f"oracle cap must lie in [0, {ORACLE_CAP_LIMIT}], got {cap}")
    bounds = propagate(spec, inst)
    if isinstance(bounds, BoundsMap):
        over = [k for k in bounds.generated() if bounds[k].ub > cap]
        if over:
            raise ContractError(f"upper bounds of {', '.join(over)} exceed oracle cap {cap}")
    classes = effective_classes(spec, inst)
    generated = [k.name for k in spec.kinds if classes[k.name] is ComponentClass.GENERATED]
    feasible: Set[Tuple[int, ...]] = set()
    for vector in product(range(cap + 1), repeat=len(generated)):
        if _Enumerator(spec, inst, classes, dict(zip(generated, vector))).exists():
            feasible.add(vector)
    logger.info("Oracle finished", cap=cap, generated=generated, feasible=len(feasible))
    return feasible
