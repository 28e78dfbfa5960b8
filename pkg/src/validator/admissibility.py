"""Static admissibility: the zero-lower-bound rule and level mappings.

Both checks use worst-case classes, so their verdict does not depend on how
an instance later assigns the ``both`` kinds. Level mappings can also be
computed for one concrete assignment by passing the instance.
"""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

import structlog

from src.model.diagnostics import Diagnostic
from src.model.types import ComponentClass, InstanceSpec, ProblemSpec
from src.model.wellformed import incident_connections
from src.validator.classes import effective_classes

logger = structlog.get_logger(__name__)


def _positive_grounds(spec: ProblemSpec, kind: str) -> List[Tuple[str, Tuple[str, ...]]]:
    """Connections from ``kind`` with a lower bound above zero.

    Each entry is ``(connection name, partner kinds)``. Self-loops are
    included; callers that must not ground a kind in itself filter them.
    """
    grounds = []
    for inc in incident_connections(spec, kind):
        card = inc.per_self
        if card is not None and card.lower > 0:
            grounds.append((inc.connection.name, (inc.partner,)))
    for otm in spec.one_to_many:
        if otm.left == kind and otm.card.lower > 0:
            grounds.append((otm.name, otm.rights))
    return grounds


def check_zero_lower_bound_rule(spec: ProblemSpec) -> List[Diagnostic]:
    """Report non-input kinds with a zero-lower outgoing direction and nothing else grounding them."""
    classes = effective_classes(spec)
    diagnostics: List[Diagnostic] = []
    for kind in spec.kinds:
        if classes[kind.name] is ComponentClass.INPUT:
            continue
        zero_from = [
            inc.connection.name for inc in incident_connections(spec, kind.name)
            if inc.per_self is not None and inc.per_self.lower == 0
        ]
        if not zero_from or _positive_grounds(spec, kind.name):
            continue
        diagnostics.append(Diagnostic(
            code="ZERO_LB_RULE",
            message=(f"{kind.name} is not input and its connections {', '.join(zero_from)} have "
                     f"lower bound 0 with no other connection from {kind.name} above zero"),
            span=kind.span,
            entity=kind.name,
        ))
    logger.debug("Zero-lower-bound rule checked", violations=len(diagnostics))
    return diagnostics


@dataclass(frozen=True)
class LevelMapping:
    """Levels for every groundable kind; ``unleveled`` lists the rest."""
    levels: Mapping[str, int] = field(default_factory=dict)
    unleveled: FrozenSet[str] = frozenset()

    @property
    def ok(self) -> bool:
        return not self.unleveled


def _justified(spec: ProblemSpec, kind: str, below: Mapping[str, int], level: int) -> bool:
    for _, partners in _positive_grounds(spec, kind):
        if kind in partners:
            continue
        if all(p in below and below[p] < level for p in partners):
            return True
    return False


def compute_level_mapping(spec: ProblemSpec,
                          inst: Optional[InstanceSpec] = None) -> LevelMapping:
    """Assign minimal levels by traversal from the input kinds.

    Without ``inst`` every ``both`` kind must be grounded; with it only the
    kinds the instance assigns to generated.
    """
    classes = effective_classes(spec, inst)
    levels: Dict[str, int] = {
        k.name: 0 for k in spec.kinds if classes[k.name] is ComponentClass.INPUT
    }
    pending = [k.name for k in spec.kinds if k.name not in levels]
    level = 0
    while pending:
        level += 1
        snapshot = dict(levels)
        reached = [k for k in pending if _justified(spec, k, snapshot, level)]
        if not reached:
            break
        for k in reached:
            levels[k] = level
        pending = [k for k in pending if k not in levels]
    mapping = LevelMapping(levels=levels, unleveled=frozenset(pending))
    logger.debug("Level mapping computed", levels=dict(levels), unleveled=sorted(pending))
    return mapping


def is_level_mapping(spec: ProblemSpec, levels: Mapping[str, int],
                     inst: Optional[InstanceSpec] = None) -> bool:
    """Whether ``levels`` is a valid level mapping, under worst-case classes unless ``inst`` is given."""
    classes = effective_classes(spec, inst)
    for kind in spec.kinds:
        level: Optional[int] = levels.get(kind.name)
        if level is None or level < 0:
            return False
        if classes[kind.name] is ComponentClass.INPUT:
            if level != 0:
                return False
        elif level < 1 or not _justified(spec, kind.name, levels, level):
            return False
    return True


def level_diagnostics(spec: ProblemSpec, mapping: LevelMapping) -> List[Diagnostic]:
    return [
        Diagnostic(
            code="UNLEVELED",
            message=f"{kind.name} is never grounded in input kinds; the spec admits infinite models",
            span=kind.span,
            entity=kind.name,
        )
        for kind in spec.kinds if kind.name in mapping.unleveled
    ]
