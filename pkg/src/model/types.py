"""Domain types shared by the parser, validator, bounds engine and solver.

All types are immutable after construction. Source spans are carried for
diagnostics but excluded from equality, so a reparsed spec compares equal to
the spec it was printed from.
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import product
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from src.model.diagnostics import SourceSpan
from src.model.errors import UnknownKindError
from src.model.expr import ConstraintExpr

Value = Union[int, str]


class ComponentClass(Enum):
    """Class of a component kind. BOTH is resolved per instance."""
    INPUT = "input"
    GENERATED = "generated"
    BOTH = "both"


@dataclass(frozen=True)
class AttributeTypeDef:
    """A closed attribute type: a finite ordered set of ground values."""
    name: str
    values: Tuple[Value, ...]
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    @property
    def numeric(self) -> bool:
        return all(isinstance(v, int) for v in self.values)

    def __contains__(self, value: object) -> bool:
        return value in self.values


@dataclass(frozen=True)
class CatalogueRow:
    """One manufacturable attribute tuple, in attribute declaration order."""
    values: Tuple[Value, ...] = ()

    def __len__(self) -> int:
        return len(self.values)

    def __str__(self) -> str:
        return "(" + ", ".join(str(v) for v in self.values) + ")"


@dataclass(frozen=True)
class ComponentKindDef:
    """A component kind ``C(id, x...)``.

    ``catalogue`` is None when the spec declares no catalogue for the kind; the
    kind then admits every combination of its attribute values.
    """
    name: str
    clazz: ComponentClass
    attributes: Tuple[Tuple[str, str], ...] = ()
    catalogue: Optional[Tuple[CatalogueRow, ...]] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)
    catalogue_span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    @property
    def attribute_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.attributes)

    def attribute_index(self, attr: str) -> int:
        return self.attribute_names.index(attr)

    def attribute_type_name(self, attr: str) -> Optional[str]:
        for name, type_name in self.attributes:
            if name == attr:
                return type_name
        return None


@dataclass(frozen=True)
class Cardinality:
    """Counting-quantifier bounds; ``upper`` None means unbounded."""
    lower: int
    upper: Optional[int] = None

    @property
    def bounded(self) -> bool:
        return self.upper is not None

    def admits(self, count: int) -> bool:
        return count >= self.lower and (self.upper is None or count <= self.upper)

    def __str__(self) -> str:
        upper = "*" if self.upper is None else str(self.upper)
        return f"[{self.lower},{upper}]"


@dataclass(frozen=True)
class BinaryConnectionDef:
    """A binary connection predicate ``left2right`` with its two directions.

    ``forward`` counts right partners per left component, ``backward`` counts
    left partners per right component. A self-loop declares ``forward`` only.
    """
    left: str
    right: str
    forward: Cardinality
    backward: Optional[Cardinality] = None
    forward_constraint: Optional[ConstraintExpr] = None
    backward_constraint: Optional[ConstraintExpr] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    @property
    def name(self) -> str:
        return f"{self.left}2{self.right}"

    @property
    def self_loop(self) -> bool:
        return self.left == self.right

    def directions(self) -> Iterator[Tuple[str, str, Cardinality, Optional[ConstraintExpr]]]:
        """Yield ``(from_kind, to_kind, cardinality, constraint)`` per declared direction."""
        yield self.left, self.right, self.forward, self.forward_constraint
        if self.backward is not None:
            yield self.right, self.left, self.backward, self.backward_constraint


@dataclass(frozen=True)
class OneToManyConnectionDef:
    """Bounds the total partner count of one ``left`` component across ``rights``."""
    left: str
    rights: Tuple[str, ...]
    card: Cardinality
    exclusive: bool = False
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    @property
    def name(self) -> str:
        return f"{self.left}->{{{','.join(self.rights)}}}"


@dataclass(frozen=True)
class ProblemSpec:
    """Domain knowledge: attribute types, kinds, catalogues and connection axioms."""
    attribute_types: Tuple[AttributeTypeDef, ...] = ()
    kinds: Tuple[ComponentKindDef, ...] = ()
    binary_connections: Tuple[BinaryConnectionDef, ...] = ()
    one_to_many: Tuple[OneToManyConnectionDef, ...] = ()

    @cached_property
    def types_by_name(self) -> Dict[str, AttributeTypeDef]:
        return {t.name: t for t in self.attribute_types}

    @cached_property
    def kinds_by_name(self) -> Dict[str, ComponentKindDef]:
        return {k.name: k for k in self.kinds}

    @cached_property
    def connections_by_name(self) -> Dict[str, BinaryConnectionDef]:
        return {c.name: c for c in self.binary_connections}

    @property
    def kind_names(self) -> Tuple[str, ...]:
        return tuple(k.name for k in self.kinds)

    def kind(self, name: str) -> ComponentKindDef:
        try:
            return self.kinds_by_name[name]
        except KeyError:
            raise UnknownKindError(f"Unknown component kind: {name}") from None

    def catalogue_of(self, kind_name: str) -> Tuple[CatalogueRow, ...]:
        """The kind's catalogue, expanding an implicit one to the full product."""
        kind = self.kind(kind_name)
        if kind.catalogue is not None:
            return kind.catalogue
        if not kind.attributes:
            return (CatalogueRow(()),)
        value_sets: List[Tuple[Value, ...]] = []
        for _, type_name in kind.attributes:
            attr_type = self.types_by_name.get(type_name)
            value_sets.append(attr_type.values if attr_type else ())
        return tuple(CatalogueRow(tuple(combo)) for combo in product(*value_sets))

    def connection_between(self, a: str, b: str) -> Optional[BinaryConnectionDef]:
        for conn in self.binary_connections:
            if {conn.left, conn.right} == {a, b}:
                return conn
        return None


def _freeze(mapping: Optional[Mapping]) -> Mapping:
    return MappingProxyType(dict(mapping or {}))


@dataclass(frozen=True)
class RequiredAtom:
    """A component that has to appear; ``None`` bindings are left open."""
    kind: str
    id: str
    bindings: Tuple[Optional[Value], ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def matches(self, row: CatalogueRow) -> bool:
        return all(b is None or b == v for b, v in zip(self.bindings, row.values))


@dataclass(frozen=True)
class ConnectionLiteral:
    """A ground connection atom asserted (positive) or denied."""
    connection: str
    left_id: str
    right_id: str
    positive: bool = True
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class InstanceSpec:
    """Instance knowledge: class assignments, id domain closures, required atoms, literals."""
    both_assignments: Mapping[str, ComponentClass] = field(default_factory=dict)
    input_domains: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    required_atoms: Tuple[RequiredAtom, ...] = ()
    connection_literals: Tuple[ConnectionLiteral, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "both_assignments", _freeze(self.both_assignments))
        object.__setattr__(
            self, "input_domains",
            _freeze({k: tuple(v) for k, v in (self.input_domains or {}).items()}))

    def __hash__(self) -> int:
        return hash((tuple(self.both_assignments.items()), tuple(self.input_domains.items()),
                     self.required_atoms, self.connection_literals))

    def required_ids(self, kind: str) -> Tuple[str, ...]:
        """Distinct required ids of ``kind`` in declaration order."""
        seen: Dict[str, None] = {}
        for atom in self.required_atoms:
            if atom.kind == kind:
                seen.setdefault(atom.id, None)
        return tuple(seen)


@dataclass(frozen=True)
class Bound:
    """An integer interval on a kind's component count; ``ub`` None is unbounded."""
    lb: int = 0
    ub: Optional[int] = None

    @property
    def consistent(self) -> bool:
        return self.ub is None or self.lb <= self.ub

    @property
    def finite(self) -> bool:
        return self.ub is not None

    def contains(self, count: int) -> bool:
        return count >= self.lb and (self.ub is None or count <= self.ub)

    def __str__(self) -> str:
        upper = "*" if self.ub is None else str(self.ub)
        return f"[{self.lb}, {upper}]"


@dataclass(frozen=True)
class ComponentInstance:
    id: str
    row: CatalogueRow = CatalogueRow(())


@dataclass(frozen=True)
class Configuration:
    """A finite model: component instances per kind and edges per connection.

    Instances are kept as sequences rather than id-keyed maps so that a
    duplicated id stays observable to the model checker.
    """
    instances: Mapping[str, Tuple[ComponentInstance, ...]] = field(default_factory=dict)
    edges: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "instances", _freeze({k: tuple(v) for k, v in (self.instances or {}).items()}))
        object.__setattr__(
            self, "edges", _freeze({k: frozenset(v) for k, v in (self.edges or {}).items()}))

    def __hash__(self) -> int:
        return hash((tuple(self.instances.items()), tuple(self.edges.items())))

    def count(self, kind: str) -> int:
        return len(self.instances.get(kind, ()))

    def ids(self, kind: str) -> Tuple[str, ...]:
        return tuple(inst.id for inst in self.instances.get(kind, ()))

    def to_dict(self, spec: ProblemSpec) -> Dict[str, object]:
        """The ``configurations[]`` entry of the solution document."""
        instances: Dict[str, List[Dict[str, object]]] = {}
        for kind in spec.kinds:
            names = kind.attribute_names
            instances[kind.name] = [
                {"id": inst.id, "attrs": dict(zip(names, inst.row.values))}
                for inst in self.instances.get(kind.name, ())
            ]
        edges = {
            conn.name: [list(pair) for pair in sorted(self.edges.get(conn.name, ()))]
            for conn in spec.binary_connections
        }
        return {"instances": instances, "edges": edges}
