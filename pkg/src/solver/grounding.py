"""Grounding: the finite search space fixed by the propagated bounds."""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Optional, Tuple

import structlog

from src.bounds.propagation import BoundsMap
from src.model.errors import ContractError
from src.model.types import (
    CatalogueRow, ComponentClass, InstanceSpec, ProblemSpec,
)

logger = structlog.get_logger(__name__)


def synthesized_id(kind: str, k: int) -> str:
    return f"{kind}#{k}"


@dataclass(frozen=True)
class KindPool:
    """Candidate ids of one kind.

    ``mandatory`` ids are always active: the input domain, or the generated
    ids the instance requires or asserts. ``synthesized`` ids are activated in
    order on top of them.
    """
    kind: str
    generated: bool
    mandatory: Tuple[str, ...]
    synthesized: Tuple[str, ...] = ()
    lower: int = 0
    upper: int = 0

    @property
    def ids(self) -> Tuple[str, ...]:
        return self.mandatory + self.synthesized

    @property
    def feasible(self) -> bool:
        return max(self.lower, len(self.mandatory)) <= self.upper

    def active(self, count: int) -> Tuple[str, ...]:
        """Ids active when the kind has ``count`` components."""
        return self.mandatory + self.synthesized[:count - len(self.mandatory)]


@dataclass(frozen=True)
class GroundProblem:
    spec: ProblemSpec
    inst: InstanceSpec
    bounds: BoundsMap
    pools: Mapping[str, KindPool]
    candidate_rows: Mapping[Tuple[str, str], Tuple[CatalogueRow, ...]]
    forced_edges: Mapping[str, FrozenSet[Tuple[str, str]]] = field(default_factory=dict)
    forbidden_edges: Mapping[str, FrozenSet[Tuple[str, str]]] = field(default_factory=dict)

    @property
    def generated_kinds(self) -> Tuple[str, ...]:
        return tuple(name for name, pool in self.pools.items() if pool.generated)

    def rows_for(self, kind: str, ident: str) -> Tuple[CatalogueRow, ...]:
        """Rows ``ident`` may take; unconstrained ids get the whole catalogue."""
        return self.candidate_rows.get((kind, ident), self.spec.catalogue_of(kind))

    def edge_variables(self, connection: str) -> int:
        """Number of undecided edge variables of a connection over the full pools."""
        conn = self.spec.connections_by_name[connection]
        lefts = self.pools[conn.left].ids
        rights = self.pools[conn.right].ids
        fixed = self.forced_edges.get(connection, frozenset()) | self.forbidden_edges.get(
            connection, frozenset())
        pairs = sum(1 for l in lefts for r in rights if not (conn.self_loop and l == r))
        return pairs - sum(1 for l, r in fixed if l in lefts and r in rights)

    @property
    def infeasible_kinds(self) -> Tuple[str, ...]:
        return tuple(name for name, pool in self.pools.items() if not pool.feasible)


def _mandatory_generated(spec: ProblemSpec, inst: InstanceSpec, kind: str) -> Tuple[str, ...]:
    seen: Dict[str, None] = dict.fromkeys(inst.required_ids(kind))
    for lit in inst.connection_literals:
        if not lit.positive:
            continue
        conn = spec.connections_by_name.get(lit.connection)
        if conn is None:
            continue
        if conn.left == kind:
            seen.setdefault(lit.left_id, None)
        if conn.right == kind:
            seen.setdefault(lit.right_id, None)
    return tuple(seen)


def ground(spec: ProblemSpec, inst: InstanceSpec, bounds: BoundsMap) -> GroundProblem:
    """Materialize pools, candidate rows and pinned edges for an accepted BoundsMap.

    Input components are not restricted to a single catalogue row. Every
    component, input or generated, may take any row of its kind's catalogue
    that its required atoms admit, and the search picks one. A row is fixed
    only when the catalogue has one row or a required atom binds every
    attribute.

    Raises:
        ContractError: If ``bounds`` misses a kind or leaves a generated kind unbounded.
    """
    pools: Dict[str, KindPool] = {}
    for kind in spec.kinds:
        name = kind.name
        if name not in bounds.bounds:
            raise ContractError(f"bounds are missing kind {name}")
        bound = bounds[name]
        if bounds.classes[name] is ComponentClass.INPUT:
            ids = tuple(inst.input_domains.get(name, ()))
            pools[name] = KindPool(name, False, ids, (), len(ids), len(ids))
            continue
        if bound.ub is None:
            raise ContractError(f"generated kind {name} has no finite upper bound")
        mandatory = _mandatory_generated(spec, inst, name)
        spare = max(0, bound.ub - len(mandatory))
        synthesized = tuple(synthesized_id(name, k) for k in range(1, spare + 1))
        pools[name] = KindPool(name, True, mandatory, synthesized, bound.lb, bound.ub)

    candidate_rows: Dict[Tuple[str, str], Tuple[CatalogueRow, ...]] = {}
    for atom in inst.required_atoms:
        if not atom.bindings:
            continue
        key = (atom.kind, atom.id)
        rows = candidate_rows.get(key, spec.catalogue_of(atom.kind))
        candidate_rows[key] = tuple(row for row in rows if atom.matches(row))

    forced: Dict[str, set] = {}
    forbidden: Dict[str, set] = {}
    for lit in inst.connection_literals:
        target = forced if lit.positive else forbidden
        target.setdefault(lit.connection, set()).add((lit.left_id, lit.right_id))

    problem = GroundProblem(
        spec=spec, inst=inst, bounds=bounds, pools=pools, candidate_rows=candidate_rows,
        forced_edges={k: frozenset(v) for k, v in forced.items()},
        forbidden_edges={k: frozenset(v) for k, v in forbidden.items()},
    )
    logger.debug("Grounded", pools={k: len(p.ids) for k, p in pools.items()},
                 edge_variables={c.name: problem.edge_variables(c.name)
                                 for c in spec.binary_connections})
    return problem
