"""Independent model checker: re-evaluates every axiom against a configuration."""
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple

import structlog

from src.model.expr import Side
from src.model.types import (
    ComponentClass, Configuration, InstanceSpec, ProblemSpec, Value,
)
from src.solver.evaluator import eval_constraint
from src.validator.classes import effective_classes

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class Verdict:
    """Checker outcome; ``accepted`` holds exactly when there are no violations."""
    violations: Tuple[Tuple[str, str], ...] = field(default=())

    @property
    def accepted(self) -> bool:
        return not self.violations


class _ModelChecker:
    def __init__(self, spec: ProblemSpec, inst: InstanceSpec, config: Configuration) -> None:
        self.spec = spec
        self.inst = inst
        self.config = config
        self.violations: List[Tuple[str, str]] = []
        self.rows: Dict[Tuple[str, str], Dict[str, Value]] = {}
        for kind in spec.kinds:
            names = kind.attribute_names
            for component in config.instances.get(kind.name, ()):
                self.rows[(kind.name, component.id)] = dict(zip(names, component.row.values))

    def violate(self, axiom: str, entity: str) -> None:
        self.violations.append((axiom, entity))

    def run(self) -> Tuple[Tuple[str, str], ...]:
        self._check_components()
        self._check_connections()
        self._check_one_to_many()
        self._check_instance_knowledge()
        return tuple(self.violations)

    def _check_components(self) -> None:
        spec = self.spec
        for kind in self.config.instances:
            if kind not in spec.kinds_by_name:
                self.violate("key", f"unknown kind {kind}")
        for kind in spec.kinds:
            components = self.config.instances.get(kind.name, ())
            for ident, count in Counter(c.id for c in components).items():
                if count > 1:
                    self.violate("key", f"{kind.name}({ident}) occurs {count} times")
            catalogue = set(spec.catalogue_of(kind.name))
            for component in components:
                if component.row not in catalogue:
                    self.violate("catalogue", f"{kind.name}({component.id}) has row {component.row}")

    def _bindings(self, kind: str, ids: List[str]) -> List[Dict[str, Value]]:
        return [self.rows[(kind, i)] for i in ids if (kind, i) in self.rows]

    def _partners(self, conn_name: str) -> Tuple[Dict[str, List[str]], Dict[str, List[str]]]:
        forward: Dict[str, List[str]] = {}
        backward: Dict[str, List[str]] = {}
        for left, right in sorted(self.config.edges.get(conn_name, ())):
            forward.setdefault(left, []).append(right)
            backward.setdefault(right, []).append(left)
        return forward, backward

    def _check_connections(self) -> None:
        for conn in self.spec.binary_connections:
            left_ids = set(self.config.ids(conn.left))
            right_ids = set(self.config.ids(conn.right))
            for left, right in self.config.edges.get(conn.name, ()):
                if left not in left_ids or right not in right_ids:
                    self.violate("key", f"{conn.name}({left}, {right}) names a missing component")
                if conn.self_loop and left == right:
                    self.violate("cardinality", f"{conn.name}({left}, {right}) is reflexive")
            forward, backward = self._partners(conn.name)
            for left in self.config.ids(conn.left):
                partners = forward.get(left, [])
                if not conn.forward.admits(len(partners)):
                    self.violate("cardinality",
                                 f"{conn.left}({left}) has {len(partners)} {conn.name} partners, "
                                 f"expected {conn.forward}")
                if conn.forward_constraint is not None and not eval_constraint(
                        conn.forward_constraint, self.rows[(conn.left, left)],
                        self._bindings(conn.right, partners), Side.LEFT):
                    self.violate("constraint-formula", f"{conn.name} forward at {conn.left}({left})")
            if conn.backward is None:
                continue
            for right in self.config.ids(conn.right):
                partners = backward.get(right, [])
                if not conn.backward.admits(len(partners)):
                    self.violate("cardinality",
                                 f"{conn.right}({right}) has {len(partners)} {conn.name} partners, "
                                 f"expected {conn.backward}")
                if conn.backward_constraint is not None and not eval_constraint(
                        conn.backward_constraint, self.rows[(conn.right, right)],
                        self._bindings(conn.left, partners), Side.RIGHT):
                    self.violate("constraint-formula", f"{conn.name} backward at {conn.right}({right})")

    def _check_one_to_many(self) -> None:
        for otm in self.spec.one_to_many:
            per_kind: Dict[str, Dict[str, int]] = {}
            for right in otm.rights:
                conn = self.spec.connection_between(otm.left, right)
                if conn is None:
                    continue
                counts: Dict[str, int] = {}
                for left_id, right_id in self.config.edges.get(conn.name, ()):
                    own = left_id if conn.left == otm.left else right_id
                    counts[own] = counts.get(own, 0) + 1
                per_kind[right] = counts
            for ident in self.config.ids(otm.left):
                total = sum(counts.get(ident, 0) for counts in per_kind.values())
                if not otm.card.admits(total):
                    self.violate("one-to-many",
                                 f"{otm.left}({ident}) has {total} partners in {otm.name}, "
                                 f"expected {otm.card}")
                kinds_used = [k for k, counts in per_kind.items() if counts.get(ident, 0)]
                if otm.exclusive and len(kinds_used) > 1:
                    self.violate("one-to-many",
                                 f"{otm.left}({ident}) mixes {', '.join(kinds_used)} in exclusive {otm.name}")

    def _check_instance_knowledge(self) -> None:
        spec, inst, config = self.spec, self.inst, self.config
        classes = effective_classes(spec, inst)
        for kind, clazz in classes.items():
            if clazz is not ComponentClass.INPUT:
                continue
            expected: Set[str] = set(inst.input_domains.get(kind, ()))
            actual = set(config.ids(kind))
            for ident in sorted(expected - actual):
                self.violate("literal", f"input component {kind}({ident}) is missing")
            for ident in sorted(actual - expected):
                self.violate("literal", f"{kind}({ident}) is outside the input domain")
        for atom in inst.required_atoms:
            component = next((c for c in config.instances.get(atom.kind, ()) if c.id == atom.id), None)
            if component is None:
                self.violate("literal", f"required {atom.kind}({atom.id}) is missing")
            elif not atom.matches(component.row):
                self.violate("literal", f"{atom.kind}({atom.id}) has row {component.row}, "
                                        f"which the required atom excludes")
        for lit in inst.connection_literals:
            present = (lit.left_id, lit.right_id) in config.edges.get(lit.connection, frozenset())
            if present != lit.positive:
                verb = "asserted" if lit.positive else "denied"
                self.violate("literal", f"{lit.connection}({lit.left_id}, {lit.right_id}) is {verb}")


def check_model(spec: ProblemSpec, inst: InstanceSpec, config: Configuration) -> Verdict:
    """Check ``config`` against every axiom of ``spec`` and ``inst``."""
    violations = _ModelChecker(spec, inst, config).run()
    if violations:
        logger.debug("Model rejected", violations=len(violations), first=violations[0])
    return Verdict(violations=violations)
