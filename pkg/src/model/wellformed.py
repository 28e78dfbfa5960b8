"""Structural well-formedness of a ProblemSpec and connection incidence."""
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Set

import structlog

from src.model.diagnostics import Diagnostic, SourceSpan
from src.model.errors import UnknownKindError
from src.model.expr import (
    ORDERING_OPS, Arith, AttrRef, ConstraintExpr, IntLit, Logical, Side, Sum, SymLit, Term,
    aggregates, attribute_refs, contains_aggregate,
)
from src.model.types import (
    BinaryConnectionDef, Cardinality, ComponentClass, ComponentKindDef, ProblemSpec,
)

logger = structlog.get_logger(__name__)


class Orientation(Enum):
    """Which side of a binary connection a kind occupies."""
    LEFT = "left"
    RIGHT = "right"
    SELF_LOOP = "self-loop"


@dataclass(frozen=True)
class Incidence:
    connection: BinaryConnectionDef
    orientation: Orientation

    @property
    def partner(self) -> str:
        conn = self.connection
        return conn.right if self.orientation is Orientation.LEFT else conn.left

    @property
    def per_self(self) -> Optional[Cardinality]:
        """Cardinality counting partners per component of this kind."""
        conn = self.connection
        return conn.backward if self.orientation is Orientation.RIGHT else conn.forward

    @property
    def per_partner(self) -> Optional[Cardinality]:
        """Cardinality counting components of this kind per partner."""
        conn = self.connection
        if self.orientation is Orientation.LEFT:
            return conn.backward
        if self.orientation is Orientation.RIGHT:
            return conn.forward
        return None


def incident_connections(spec: ProblemSpec, kind: str) -> List[Incidence]:
    """All binary connections touching ``kind``, tagged with the side it occupies.

    Raises:
        UnknownKindError: If ``kind`` is not declared.
    """
    if kind not in spec.kinds_by_name:
        raise UnknownKindError(f"Unknown component kind: {kind}")
    result = []
    for conn in spec.binary_connections:
        if conn.self_loop and conn.left == kind:
            result.append(Incidence(conn, Orientation.SELF_LOOP))
        elif conn.left == kind:
            result.append(Incidence(conn, Orientation.LEFT))
        elif conn.right == kind:
            result.append(Incidence(conn, Orientation.RIGHT))
    return result


class _Checker:
    """Collects diagnostics for one spec."""

    def __init__(self, spec: ProblemSpec) -> None:
        self.spec = spec
        self.diagnostics: List[Diagnostic] = []

    def report(self, code: str, message: str, entity: str,
               span: Optional[SourceSpan] = None) -> None:
        self.diagnostics.append(Diagnostic(code=code, message=message, span=span, entity=entity))

    def run(self) -> List[Diagnostic]:
        self._check_types()
        self._check_kinds()
        self._check_binary_connections()
        self._check_one_to_many()
        return self.diagnostics

    def _check_types(self) -> None:
        for name, count in Counter(t.name for t in self.spec.attribute_types).items():
            if count > 1:
                self.report("DUPLICATE_NAME", f"attribute type {name} declared {count} times", name)
        for attr_type in self.spec.attribute_types:
            if not attr_type.values:
                self.report("EMPTY_TYPE", f"attribute type {attr_type.name} has no values",
                            attr_type.name, attr_type.span)
            for value, count in Counter(attr_type.values).items():
                if count > 1:
                    self.report("DUPLICATE_VALUE",
                                f"value {value} repeated in type {attr_type.name}",
                                attr_type.name, attr_type.span)

    def _check_kinds(self) -> None:
        spec = self.spec
        for name, count in Counter(k.name for k in spec.kinds).items():
            if count > 1:
                self.report("DUPLICATE_NAME", f"component kind {name} declared {count} times", name)
        if not any(k.clazz in (ComponentClass.INPUT, ComponentClass.BOTH) for k in spec.kinds):
            self.report("NO_INPUT_KIND",
                        "a configuration problem needs at least one input or both kind", "spec")
        for kind in spec.kinds:
            for attr, count in Counter(kind.attribute_names).items():
                if count > 1:
                    self.report("DUPLICATE_NAME", f"attribute {attr} repeated in {kind.name}",
                                kind.name, kind.span)
            for attr, type_name in kind.attributes:
                if type_name not in spec.types_by_name:
                    self.report("UNKNOWN_REF", f"attribute {kind.name}.{attr} has unknown type {type_name}",
                                kind.name, kind.span)
            self._check_catalogue(kind)

    def _check_catalogue(self, kind: ComponentKindDef) -> None:
        if kind.catalogue is None:
            return
        span = kind.catalogue_span or kind.span
        if not kind.catalogue:
            self.report("CATALOGUE_EMPTY", f"catalogue of {kind.name} is empty", kind.name, span)
            return
        for row, count in Counter(kind.catalogue).items():
            if count > 1:
                self.report("DUPLICATE_ROW", f"catalogue row {row} repeated in {kind.name}",
                            kind.name, span)
        for row in kind.catalogue:
            if len(row) != len(kind.attributes):
                self.report("CATALOGUE_ARITY",
                            f"catalogue row {row} of {kind.name} has {len(row)} values, "
                            f"expected {len(kind.attributes)}", kind.name, span)
                continue
            for (attr, type_name), value in zip(kind.attributes, row.values):
                attr_type = self.spec.types_by_name.get(type_name)
                if attr_type is not None and value not in attr_type:
                    self.report("CATALOGUE_VALUE",
                                f"value {value} of {kind.name}.{attr} is not in type {type_name}",
                                kind.name, span)

    def _check_card(self, card: Cardinality, entity: str, span: Optional[SourceSpan],
                    allow_unbounded: bool) -> None:
        if card.lower < 0:
            self.report("CARD_ORDER", f"lower bound {card.lower} is negative", entity, span)
        if card.upper is None:
            if not allow_unbounded:
                self.report("CARD_UNBOUNDED",
                            "binary connection directions need a finite upper bound", entity, span)
            return
        if card.upper < 1:
            self.report("CARD_UPPER", f"upper bound {card.upper} must be at least 1", entity, span)
        if card.lower > card.upper:
            self.report("CARD_ORDER", f"cardinality {card} has lower > upper", entity, span)

    def _check_binary_connections(self) -> None:
        spec = self.spec
        seen_pairs: Set[frozenset] = set()
        for conn in spec.binary_connections:
            name = conn.name
            resolved = True
            for kind_name in (conn.left, conn.right):
                if kind_name not in spec.kinds_by_name:
                    self.report("UNKNOWN_REF", f"connection {name} references unknown kind {kind_name}",
                                name, conn.span)
                    resolved = False
            pair = frozenset((conn.left, conn.right))
            if pair in seen_pairs:
                self.report("DUPLICATE_CONNECTION",
                            f"kinds {conn.left} and {conn.right} already have a connection predicate",
                            name, conn.span)
            seen_pairs.add(pair)
            if conn.self_loop and conn.backward is not None:
                self.report("SELF_LOOP_DIRECTIONS",
                            f"self-loop {name} must declare exactly one direction", name, conn.span)
            if not conn.self_loop and conn.backward is None:
                self.report("SELF_LOOP_DIRECTIONS",
                            f"connection {name} must declare both directions", name, conn.span)
            self._check_card(conn.forward, name, conn.span, allow_unbounded=False)
            if conn.backward is not None:
                self._check_card(conn.backward, name, conn.span, allow_unbounded=False)
            if not resolved:
                continue
            if conn.forward_constraint is not None:
                self._check_expr(conn, Side.LEFT, conn.forward_constraint)
            if conn.backward_constraint is not None:
                self._check_expr(conn, Side.RIGHT, conn.backward_constraint)

    def _check_one_to_many(self) -> None:
        spec = self.spec
        for otm in spec.one_to_many:
            name = otm.name
            for kind_name in (otm.left, *otm.rights):
                if kind_name not in spec.kinds_by_name:
                    self.report("UNKNOWN_REF", f"one-to-many {name} references unknown kind {kind_name}",
                                name, otm.span)
            if otm.left in otm.rights:
                self.report("OTM_SELF_MEMBER",
                            f"{otm.left} cannot be part of its own one-to-many set", name, otm.span)
            if len(set(otm.rights)) < 2:
                self.report("OTM_TOO_FEW",
                            f"one-to-many {name} needs at least two distinct kinds", name, otm.span)
            for right, count in Counter(otm.rights).items():
                if count > 1:
                    self.report("DUPLICATE_NAME", f"{right} listed {count} times in {name}",
                                name, otm.span)
            if otm.card.lower < 1:
                self.report("OTM_LOWER",
                            f"one-to-many {name} needs a lower bound of at least 1", name, otm.span)
            self._check_card(otm.card, name, otm.span, allow_unbounded=True)
            for right in otm.rights:
                if right != otm.left and spec.connection_between(otm.left, right) is None:
                    self.report("OTM_MISSING_BINARY",
                                f"one-to-many {name} needs a binary connection between "
                                f"{otm.left} and {right}", name, otm.span)

    def _kind_on(self, conn: BinaryConnectionDef, side: Side) -> ComponentKindDef:
        return self.spec.kinds_by_name[conn.left if side is Side.LEFT else conn.right]

    def _check_expr(self, conn: BinaryConnectionDef, owner: Side, expr: ConstraintExpr) -> None:
        partner = owner.other
        name = conn.name
        if contains_aggregate(expr):
            for agg in aggregates(expr):
                if agg.side is not partner:
                    self.report("AGGREGATE_SIDE",
                                f"sum({agg.side.value}.{agg.attr}) in {name} must range over "
                                f"the {partner.value} partners", name, conn.span)
            for node in attribute_refs(expr):
                if node.side is partner:
                    self.report("MIXED_AGGREGATE",
                                f"{node.side.value}.{node.attr} in {name} reads a single partner "
                                f"inside an aggregate constraint", name, conn.span)
        self._check_bool(conn, expr)

    def _check_bool(self, conn: BinaryConnectionDef, expr: ConstraintExpr) -> None:
        if isinstance(expr, Logical):
            self._check_bool(conn, expr.left)
            self._check_bool(conn, expr.right)
            return
        left = self._term_type(conn, expr.left, top=True)
        right = self._term_type(conn, expr.right, top=True)
        if left is None or right is None:
            return
        if expr.op in ORDERING_OPS and "sym" in (left, right):
            self.report("EXPR_TYPE", f"ordering comparison {expr.op} needs integer operands",
                        conn.name, conn.span)
        elif left != right:
            self.report("EXPR_TYPE", f"comparison {expr.op} mixes integer and symbolic operands",
                        conn.name, conn.span)
        elif left == "sym":
            self._check_symbol(conn, expr.left, expr.right)
            self._check_symbol(conn, expr.right, expr.left)

    def _check_symbol(self, conn: BinaryConnectionDef, ref: Term, literal: Term) -> None:
        if not (isinstance(ref, AttrRef) and isinstance(literal, SymLit)):
            return
        kind = self._kind_on(conn, ref.side)
        attr_type = self.spec.types_by_name.get(kind.attribute_type_name(ref.attr) or "")
        if attr_type is not None and literal.name not in attr_type:
            self.report("EXPR_VALUE", f"{literal.name} is not a value of {attr_type.name} "
                        f"({ref.side.value}.{ref.attr})", conn.name, conn.span)

    def _term_type(self, conn: BinaryConnectionDef, term: Term, top: bool = False) -> Optional[str]:
        """Return "int", "sym" or None when the term already produced a diagnostic."""
        if isinstance(term, IntLit):
            return "int"
        if isinstance(term, SymLit):
            return "sym"
        if isinstance(term, (AttrRef, Sum)):
            kind = self._kind_on(conn, term.side)
            type_name = kind.attribute_type_name(term.attr)
            if type_name is None:
                self.report("UNKNOWN_REF", f"{kind.name} has no attribute {term.attr}",
                            conn.name, conn.span)
                return None
            attr_type = self.spec.types_by_name.get(type_name)
            if attr_type is None:
                return None
            if isinstance(term, Sum):
                if not top:
                    self.report("AGGREGATE_POSITION",
                                "sum may only appear directly as a comparison operand",
                                conn.name, conn.span)
                if not attr_type.numeric:
                    self.report("EXPR_TYPE", f"sum over symbolic attribute {term.attr}",
                                conn.name, conn.span)
                    return None
                return "int"
            return "int" if attr_type.numeric else "sym"
        if isinstance(term, Arith):
            left = self._term_type(conn, term.left)
            right = self._term_type(conn, term.right)
            if "sym" in (left, right):
                self.report("EXPR_TYPE", f"arithmetic {term.op} needs integer operands",
                            conn.name, conn.span)
                return None
            if left is None or right is None:
                return None
            return "int"
        return None


def well_formed(spec: ProblemSpec) -> List[Diagnostic]:
    """Check every structural invariant of ``spec``; an empty list means well-formed."""
    diagnostics = _Checker(spec).run()
    logger.debug("Well-formedness checked", kinds=len(spec.kinds), diagnostics=len(diagnostics))
    return diagnostics
