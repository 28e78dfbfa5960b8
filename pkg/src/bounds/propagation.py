"""Worklist propagation of count bounds across connections."""
import random
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Set, Tuple, Union

import structlog

from src.bounds.steps import binary_bound_step, one_to_many_bound_step, update_bounds
from src.config.settings import DEFAULT_PROPAGATION_MAX_STEPS
from src.model.errors import ContractError, PropagationFuelError
from src.model.types import (
    Bound, Cardinality, ComponentClass, InstanceSpec, OneToManyConnectionDef, ProblemSpec,
)
from src.model.wellformed import incident_connections
from src.validator.classes import effective_classes

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class ProvenanceStep:
    """One bound contribution: ``source`` proposed ``bound`` for ``target``."""
    source: str
    target: str
    bound: Bound

    def to_dict(self) -> Dict[str, object]:
        return {"source": self.source, "target": self.target,
                "lb": self.bound.lb, "ub": self.bound.ub}


@dataclass(frozen=True)
class BoundsMap:
    """Accepted bounds per kind, with the classes they were computed under."""
    bounds: Mapping[str, Bound]
    classes: Mapping[str, ComponentClass]
    steps: Tuple[ProvenanceStep, ...] = field(default=(), compare=False, repr=False)

    def __getitem__(self, kind: str) -> Bound:
        return self.bounds[kind]

    def __iter__(self) -> Iterator[str]:
        return iter(self.bounds)

    def __len__(self) -> int:
        return len(self.bounds)

    def generated(self) -> List[str]:
        return [k for k in self.bounds if self.classes[k] is ComponentClass.GENERATED]


@dataclass(frozen=True)
class RejectCertificate:
    """Proof of inconsistency: ``kind`` ended up with ``lb > ub``."""
    kind: str
    lb: int
    ub: int
    provenance: Tuple[ProvenanceStep, ...] = ()

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "lb": self.lb,
            "ub": self.ub,
            "provenance": [step.to_dict() for step in self.provenance],
        }


PropagationResult = Union[BoundsMap, RejectCertificate]


def count_per_right(spec: ProblemSpec, left: str, right: str) -> Cardinality:
    """Cardinality counting ``left`` components per ``right`` component."""
    conn = spec.connection_between(left, right)
    if conn is None:
        raise ContractError(f"no binary connection between {left} and {right}")
    if conn.left == left:
        if conn.backward is None:
            raise ContractError(f"connection {conn.name} has no backward direction")
        return conn.backward
    return conn.forward


class _Worklist:
    """A stack that holds each kind at most once; ``rng`` randomizes the pop order."""

    def __init__(self, rng: Optional[random.Random]) -> None:
        self.items: List[str] = []
        self.members: Set[str] = set()
        self.rng = rng

    def push(self, kind: str) -> None:
        if kind not in self.members:
            self.items.append(kind)
            self.members.add(kind)

    def pop(self) -> str:
        index = self.rng.randrange(len(self.items)) if self.rng is not None else len(self.items) - 1
        kind = self.items.pop(index)
        self.members.discard(kind)
        return kind

    def __bool__(self) -> bool:
        return bool(self.items)


class _Propagation:
    def __init__(self, spec: ProblemSpec, inst: InstanceSpec, rng: Optional[random.Random],
                 raise_required: bool, max_steps: int) -> None:
        self.spec = spec
        self.classes = effective_classes(spec, inst)
        self.max_steps = max_steps
        self.bounds: Dict[str, Bound] = {}
        self.steps: List[ProvenanceStep] = []
        self.worklist = _Worklist(rng)

        for kind in spec.kinds:
            name = kind.name
            if self.classes[name] is ComponentClass.INPUT:
                if name not in inst.input_domains:
                    raise ContractError(f"input kind {name} has no id domain")
                n = len(inst.input_domains[name])
                self.bounds[name] = Bound(n, n)
                self.steps.append(ProvenanceStep("input domain", name, Bound(n, n)))
                self.worklist.push(name)
            else:
                self.bounds[name] = Bound(0, None)
        if raise_required:
            for kind in spec.kinds:
                required = len(inst.required_ids(kind.name))
                if self.classes[kind.name] is ComponentClass.GENERATED and required:
                    self._apply("required atoms", kind.name, Bound(required, None))

        # generated kinds grounded through each one-to-many, keyed by right kind
        self.otm_dependents: Dict[str, List[OneToManyConnectionDef]] = {}
        for otm in spec.one_to_many:
            if self.classes[otm.left] is ComponentClass.GENERATED:
                for right in otm.rights:
                    self.otm_dependents.setdefault(right, []).append(otm)

    def _generated(self, kind: str) -> bool:
        return self.classes[kind] is ComponentClass.GENERATED

    def _apply(self, source: str, target: str, candidate: Bound) -> Optional[RejectCertificate]:
        self.steps.append(ProvenanceStep(source, target, candidate))
        new, changed = update_bounds(self.bounds[target], candidate)
        if not changed:
            return None
        self.bounds[target] = new
        logger.debug("Bounds tightened", kind=target, source=source, lb=new.lb, ub=new.ub)
        if not new.consistent:
            return RejectCertificate(
                kind=target, lb=new.lb, ub=new.ub,
                provenance=tuple(s for s in self.steps if s.target == target))
        self.worklist.push(target)
        return None

    def _one_to_many(self, otm: OneToManyConnectionDef) -> Optional[RejectCertificate]:
        per_right = [count_per_right(self.spec, otm.left, right) for right in otm.rights]
        right_bounds = [self.bounds[right] for right in otm.rights]
        candidate = one_to_many_bound_step(otm, per_right, right_bounds)
        return self._apply(otm.name, otm.left, candidate)

    def _visit(self, current: str) -> Optional[RejectCertificate]:
        for inc in incident_connections(self.spec, current):
            if inc.connection.self_loop or not self._generated(inc.partner):
                continue
            candidate = binary_bound_step(inc.per_self, inc.per_partner, self.bounds[current])
            reject = self._apply(inc.connection.name, inc.partner, candidate)
            if reject is not None:
                return reject
        pending = []
        if self._generated(current):
            pending.extend(otm for otm in self.spec.one_to_many if otm.left == current)
        pending.extend(self.otm_dependents.get(current, ()))
        for otm in pending:
            reject = self._one_to_many(otm)
            if reject is not None:
                return reject
        return None

    def run(self) -> PropagationResult:
        pops = 0
        while self.worklist:
            pops += 1
            if pops > self.max_steps:
                raise PropagationFuelError(f"bound propagation exceeded {self.max_steps} steps")
            reject = self._visit(self.worklist.pop())
            if reject is not None:
                logger.warning("Bounds rejected", kind=reject.kind, lb=reject.lb, ub=reject.ub)
                return reject
        unbounded = [k for k, b in self.bounds.items() if self._generated(k) and b.ub is None]
        if unbounded:
            raise ContractError(
                f"generated kinds {', '.join(unbounded)} have no finite upper bound; "
                f"the specification is not admissible")
        logger.info("Bounds accepted", steps=pops,
                    bounds={k: str(b) for k, b in self.bounds.items()})
        return BoundsMap(bounds=dict(self.bounds), classes=dict(self.classes),
                         steps=tuple(self.steps))


def propagate(spec: ProblemSpec, inst: InstanceSpec, *, rng: Optional[random.Random] = None,
              raise_required: bool = False,
              max_steps: int = DEFAULT_PROPAGATION_MAX_STEPS) -> PropagationResult:
    """Compute bounds for every kind, or a certificate that none exist.

    Input kinds are fixed at the size of their domains; generated kinds start
    unbounded and are tightened until nothing changes.

    Args:
        spec: An admissible problem specification.
        inst: Validated instance knowledge.
        rng: Randomizes the worklist pop order when given.
        raise_required: Start each generated kind's lower bound at its number
            of distinct required ids.
        max_steps: Worklist pop budget.

    Returns:
        PropagationResult: a BoundsMap on accept, a RejectCertificate otherwise.

    Raises:
        ContractError: If an input kind has no domain or the spec leaves a
            generated kind unbounded.
        PropagationFuelError: If the pop budget is exhausted.
    """
    return _Propagation(spec, inst, rng, raise_required, max_steps).run()
