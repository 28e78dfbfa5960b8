"""Consistency of instance knowledge against the problem specification."""
from collections import Counter
from typing import Dict, List, Optional, Set, Tuple

import structlog

from src.model.diagnostics import Diagnostic, SourceSpan
from src.model.types import (
    ComponentClass, InstanceSpec, ProblemSpec, RequiredAtom,
)

logger = structlog.get_logger(__name__)


class _InstanceChecker:
    def __init__(self, spec: ProblemSpec, inst: InstanceSpec) -> None:
        self.spec = spec
        self.inst = inst
        self.diagnostics: List[Diagnostic] = []
        self.classes: Dict[str, ComponentClass] = {}

    def report(self, code: str, message: str, entity: Optional[str],
               span: Optional[SourceSpan] = None) -> None:
        self.diagnostics.append(Diagnostic(code=code, message=message, span=span, entity=entity))

    def run(self) -> List[Diagnostic]:
        self._resolve_classes()
        self._check_domains()
        self._check_required()
        self._check_literals()
        return self.diagnostics

    def _resolve_classes(self) -> None:
        inst = self.inst
        for kind, assigned in inst.both_assignments.items():
            kind_def = self.spec.kinds_by_name.get(kind)
            if kind_def is None:
                self.report("UNKNOWN_REF", f"class assignment names unknown kind {kind}", kind,
                            inst.span)
            elif kind_def.clazz is not ComponentClass.BOTH and kind_def.clazz is not assigned:
                self.report("UNKNOWN_REF",
                            f"class assignment for {kind}, which is not of class both", kind,
                            inst.span)
        for kind in self.spec.kinds:
            if kind.clazz is not ComponentClass.BOTH:
                self.classes[kind.name] = kind.clazz
            elif kind.name in inst.both_assignments:
                self.classes[kind.name] = inst.both_assignments[kind.name]
            else:
                self.report("MISSING_BOTH_ASSIGNMENT",
                            f"{kind.name} is of class both; declare 'input {kind.name} = ...' "
                            f"or 'generated {kind.name}'", kind.name, kind.span)

    def _check_domains(self) -> None:
        inst = self.inst
        for kind, ids in inst.input_domains.items():
            if kind not in self.spec.kinds_by_name:
                self.report("UNKNOWN_REF", f"input domain for unknown kind {kind}", kind, inst.span)
                continue
            if self.classes.get(kind) is ComponentClass.GENERATED:
                self.report("DOMAIN_NOT_INPUT", f"{kind} is generated and cannot have an input domain",
                            kind, inst.span)
            for ident, count in Counter(ids).items():
                if count > 1:
                    self.report("DUPLICATE_ID", f"id {ident} appears {count} times in the domain of {kind}",
                                kind, inst.span)
        total = 0
        for kind, clazz in self.classes.items():
            if clazz is not ComponentClass.INPUT:
                continue
            if kind not in inst.input_domains:
                self.report("MISSING_DOMAIN", f"input kind {kind} has no id domain", kind,
                            self.spec.kind(kind).span)
                continue
            total += len(inst.input_domains[kind])
        if total == 0:
            self.report("NO_INPUT", "the instance has no input components", None, inst.span)

    def _in_domain(self, kind: str, ident: str) -> bool:
        if self.classes.get(kind) is not ComponentClass.INPUT:
            return True
        return ident in self.inst.input_domains.get(kind, ())

    def _check_atom(self, atom: RequiredAtom) -> bool:
        kind = self.spec.kinds_by_name.get(atom.kind)
        entity = f"{atom.kind}({atom.id})"
        if kind is None:
            self.report("UNKNOWN_REF", f"required atom names unknown kind {atom.kind}", entity, atom.span)
            return False
        if not self._in_domain(atom.kind, atom.id):
            self.report("UNKNOWN_REF", f"{atom.id} is not in the input domain of {atom.kind}",
                        entity, atom.span)
        if not atom.bindings:
            return True
        if len(atom.bindings) != len(kind.attributes):
            self.report("ATOM_BINDING",
                        f"{entity} binds {len(atom.bindings)} attributes, {atom.kind} has "
                        f"{len(kind.attributes)}", entity, atom.span)
            return False
        ok = True
        for (attr, type_name), value in zip(kind.attributes, atom.bindings):
            attr_type = self.spec.types_by_name.get(type_name)
            if value is not None and attr_type is not None and value not in attr_type:
                self.report("ATOM_BINDING", f"{value} is not a value of {atom.kind}.{attr}",
                            entity, atom.span)
                ok = False
        if ok and not any(atom.matches(row) for row in self.spec.catalogue_of(atom.kind)):
            self.report("ATOM_BINDING", f"{entity} matches no catalogue row of {atom.kind}",
                        entity, atom.span)
            ok = False
        return ok

    def _check_required(self) -> None:
        merged: Dict[Tuple[str, str], RequiredAtom] = {}
        for atom in self.inst.required_atoms:
            if not self._check_atom(atom) or not atom.bindings:
                continue
            key = (atom.kind, atom.id)
            previous = merged.get(key)
            if previous is None:
                merged[key] = atom
                continue
            if not any(previous.matches(row) and atom.matches(row)
                       for row in self.spec.catalogue_of(atom.kind)):
                self.report("LITERAL_CONFLICT",
                            f"{atom.kind}({atom.id}) is required with incompatible attribute values",
                            f"{atom.kind}({atom.id})", atom.span)

    def _check_literals(self) -> None:
        polarity: Dict[Tuple[str, str, str], Set[bool]] = {}
        for lit in self.inst.connection_literals:
            entity = f"{lit.connection}({lit.left_id}, {lit.right_id})"
            conn = self.spec.connections_by_name.get(lit.connection)
            if conn is None:
                self.report("UNKNOWN_REF", f"unknown connection {lit.connection}", entity, lit.span)
                continue
            for kind, ident in ((conn.left, lit.left_id), (conn.right, lit.right_id)):
                if not self._in_domain(kind, ident):
                    self.report("UNKNOWN_REF", f"{ident} is not in the input domain of {kind}",
                                entity, lit.span)
            key = (lit.connection, lit.left_id, lit.right_id)
            seen = polarity.setdefault(key, set())
            if (not lit.positive) in seen:
                self.report("LITERAL_CONFLICT", f"{entity} is both asserted and denied", entity, lit.span)
            seen.add(lit.positive)


def validate_instance(spec: ProblemSpec, inst: InstanceSpec) -> List[Diagnostic]:
    """Check instance knowledge: domains, required atoms and connection literals."""
    diagnostics = _InstanceChecker(spec, inst).run()
    logger.debug("Instance validated", diagnostics=len(diagnostics))
    return diagnostics

