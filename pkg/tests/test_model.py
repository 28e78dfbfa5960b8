"""
Test module for the core data model and structural well-formedness.
"""

import random
from collections import Counter

import pytest

from src.model.diagnostics import Diagnostic, SourceSpan
from src.model.errors import UnknownKindError
from src.model.expr import AttrRef, Compare, IntLit, Logical, Side, Sum, SymLit
from src.model.types import (
    AttributeTypeDef, BinaryConnectionDef, Bound, Cardinality, CatalogueRow, ComponentClass,
    ComponentKindDef, OneToManyConnectionDef, ProblemSpec,
)
from src.model.wellformed import Orientation, incident_connections, well_formed

SIZE = AttributeTypeDef("Size", (1, 2, 3, 4, 5))


def bin_packing_spec(thing_b_connection: bool = True) -> ProblemSpec:
    """The bin-packing domain built directly from model types."""
    thing_a = ComponentKindDef("ThingA", ComponentClass.INPUT, (("size", "Size"),))
    thing_b = ComponentKindDef("ThingB", ComponentClass.INPUT, (("size", "Size"),))
    bin_kind = ComponentKindDef("Bin", ComponentClass.GENERATED)
    connections = [BinaryConnectionDef(
        "ThingA", "Bin", Cardinality(1, 1), Cardinality(0, 5),
        backward_constraint=Compare("<=", Sum(Side.LEFT, "size"), IntLit(5)),
    )]
    if thing_b_connection:
        connections.append(BinaryConnectionDef(
            "ThingB", "Bin", Cardinality(1, 1), Cardinality(0, 2),
            backward_constraint=Compare("<=", Sum(Side.LEFT, "size"), IntLit(2)),
        ))
    return ProblemSpec(
        attribute_types=(SIZE,),
        kinds=(thing_a, thing_b, bin_kind),
        binary_connections=tuple(connections),
        one_to_many=(OneToManyConnectionDef("Bin", ("ThingA", "ThingB"), Cardinality(1, None)),),
    )


def codes(diagnostics):
    return Counter(d.code for d in diagnostics)


def test_cardinality_admits():
    """Test cardinality membership with and without an upper bound."""
    assert Cardinality(0, 5).admits(0)
    assert Cardinality(0, 5).admits(5)
    assert not Cardinality(1, 1).admits(2)
    assert Cardinality(1, None).admits(1000)
    assert not Cardinality(1, None).admits(0)


def test_bound_rendering_and_consistency():
    """Test bound text and the lb <= ub check."""
    assert str(Bound(10, 40)) == "[10, 40]"
    assert str(Bound(4, None)) == "[4, *]"
    assert Bound(5, 5).consistent
    assert not Bound(5, 4).consistent
    assert Bound(3, None).contains(100)


def test_implicit_catalogue_is_full_product():
    """Test that a kind without a catalogue admits every attribute value."""
    spec = bin_packing_spec()
    assert spec.catalogue_of("ThingA") == tuple(CatalogueRow((v,)) for v in (1, 2, 3, 4, 5))


def test_kind_without_attributes_has_empty_row():
    """Test the singleton empty row of an attribute-less kind."""
    assert bin_packing_spec().catalogue_of("Bin") == (CatalogueRow(()),)


def test_unknown_kind_raises():
    """Test lookup of an undeclared kind."""
    with pytest.raises(UnknownKindError):
        bin_packing_spec().kind("Crate")


def test_connection_predicate_name():
    """Test that connect A - B declares A2B."""
    spec = bin_packing_spec()
    assert [c.name for c in spec.binary_connections] == ["ThingA2Bin", "ThingB2Bin"]
    assert spec.connection_between("Bin", "ThingB").name == "ThingB2Bin"


def test_bin_packing_is_well_formed():
    """Test the canonical domain passes every structural check."""
    assert well_formed(bin_packing_spec()) == []


def test_one_to_many_needs_binary_connections():
    """Test OTM_MISSING_BINARY when a member kind has no binary connection."""
    diagnostics = well_formed(bin_packing_spec(thing_b_connection=False))
    assert codes(diagnostics) == Counter({"OTM_MISSING_BINARY": 1})
    assert diagnostics[0].entity == "Bin->{ThingA,ThingB}"


def test_cardinality_order_is_reported():
    """Test lower > upper on a binary direction."""
    spec = ProblemSpec(
        kinds=(ComponentKindDef("A", ComponentClass.INPUT), ComponentKindDef("B", ComponentClass.GENERATED)),
        binary_connections=(BinaryConnectionDef("A", "B", Cardinality(2, 1), Cardinality(1, 1)),),
    )
    assert codes(well_formed(spec)) == Counter({"CARD_ORDER": 1})


def test_structural_errors():
    """Test several independent structural errors in one spec."""
    spec = ProblemSpec(
        attribute_types=(AttributeTypeDef("Color", ("red", "red")), AttributeTypeDef("Empty", ())),
        kinds=(
            ComponentKindDef("A", ComponentClass.GENERATED, (("color", "Color"),),
                             catalogue=(CatalogueRow(("blue",)), CatalogueRow(("red", "red")))),
            ComponentKindDef("B", ComponentClass.GENERATED),
        ),
        binary_connections=(
            BinaryConnectionDef("A", "B", Cardinality(1, None), Cardinality(1, 1)),
            BinaryConnectionDef("B", "A", Cardinality(1, 1), Cardinality(1, 1)),
            BinaryConnectionDef("B", "B", Cardinality(0, 1), Cardinality(0, 1)),
        ),
    )
    found = codes(well_formed(spec))
    assert found["DUPLICATE_VALUE"] == 1
    assert found["EMPTY_TYPE"] == 1
    assert found["NO_INPUT_KIND"] == 1
    assert found["CATALOGUE_VALUE"] == 1
    assert found["CATALOGUE_ARITY"] == 1
    assert found["CARD_UNBOUNDED"] == 1
    assert found["DUPLICATE_CONNECTION"] == 1
    assert found["SELF_LOOP_DIRECTIONS"] == 1


def test_constraint_side_and_type_errors():
    """Test aggregate placement and typing of constraint formulas."""
    color = AttributeTypeDef("Color", ("red", "blue"))
    spec = ProblemSpec(
        attribute_types=(SIZE, color),
        kinds=(
            ComponentKindDef("Thing", ComponentClass.INPUT, (("size", "Size"), ("color", "Color"))),
            ComponentKindDef("Bin", ComponentClass.GENERATED, (("cap", "Size"),)),
        ),
        binary_connections=(BinaryConnectionDef(
            "Thing", "Bin", Cardinality(1, 1), Cardinality(1, 5),
            forward_constraint=Compare("<=", Sum(Side.LEFT, "size"), IntLit(5)),
            backward_constraint=Compare("<=", Sum(Side.LEFT, "color"), IntLit(2)),
        ),),
    )
    found = codes(well_formed(spec))
    assert found["AGGREGATE_SIDE"] == 1
    assert found["EXPR_TYPE"] == 1


def test_well_formed_is_order_independent():
    """Test that permuting declarations keeps the multiset of codes."""
    spec = ProblemSpec(
        attribute_types=(AttributeTypeDef("Color", ("red", "red")), SIZE),
        kinds=(
            ComponentKindDef("A", ComponentClass.INPUT),
            ComponentKindDef("B", ComponentClass.GENERATED),
            ComponentKindDef("C", ComponentClass.GENERATED),
        ),
        binary_connections=(
            BinaryConnectionDef("A", "B", Cardinality(3, 1), Cardinality(1, 1)),
            BinaryConnectionDef("A", "C", Cardinality(1, 1), Cardinality(1, None)),
            BinaryConnectionDef("C", "A", Cardinality(1, 1), Cardinality(1, 1)),
        ),
        one_to_many=(OneToManyConnectionDef("A", ("B",), Cardinality(0, 2)),),
    )
    expected = codes(well_formed(spec))
    rng = random.Random(7)
    for _ in range(10):
        fields = {name: list(getattr(spec, name))
                  for name in ("attribute_types", "kinds", "binary_connections", "one_to_many")}
        for values in fields.values():
            rng.shuffle(values)
        shuffled = ProblemSpec(**{name: tuple(values) for name, values in fields.items()})
        assert codes(well_formed(shuffled)) == expected


def test_incident_connections():
    """Test orientation tags, isolated kinds and self-loops."""
    spec = ProblemSpec(
        kinds=(
            ComponentKindDef("Task", ComponentClass.INPUT),
            ComponentKindDef("Worker", ComponentClass.GENERATED),
            ComponentKindDef("Idle", ComponentClass.GENERATED),
        ),
        binary_connections=(
            BinaryConnectionDef("Task", "Worker", Cardinality(1, 1), Cardinality(1, 3)),
            BinaryConnectionDef("Worker", "Worker", Cardinality(0, 1)),
        ),
    )
    assert incident_connections(spec, "Idle") == []
    worker = incident_connections(spec, "Worker")
    assert [i.orientation for i in worker] == [Orientation.RIGHT, Orientation.SELF_LOOP]
    assert worker[0].partner == "Task"
    assert worker[0].per_self == Cardinality(1, 3)
    assert worker[0].per_partner == Cardinality(1, 1)
    assert worker[1].per_partner is None
    with pytest.raises(UnknownKindError):
        incident_connections(spec, "Manager")


def test_diagnostic_codes_are_closed():
    """Test that an undocumented code cannot be constructed."""
    with pytest.raises(ValueError):
        Diagnostic(code="SOMETHING_ELSE", message="nope")


def test_diagnostic_render():
    """Test the one-line rendering of a located diagnostic."""
    diagnostic = Diagnostic(code="CARD_ORDER", message="bad", span=SourceSpan("a.loco", 3, 23))
    assert diagnostic.render() == "ERROR CARD_ORDER a.loco:3:23 bad"
    assert diagnostic.to_dict()["line"] == 3


def test_symbolic_constant_outside_attribute_type():
    """Test that a misspelled symbolic value is reported, not silently unequal."""
    color = AttributeTypeDef("Color", ("red", "blue"))

    def spec_with(value: str) -> ProblemSpec:
        is_value = Compare("=", AttrRef(Side.LEFT, "color"), SymLit(value))
        return ProblemSpec(
            attribute_types=(color,),
            kinds=(ComponentKindDef("Thing", ComponentClass.INPUT, (("color", "Color"),)),
                   ComponentKindDef("Bin", ComponentClass.GENERATED)),
            binary_connections=(BinaryConnectionDef(
                "Thing", "Bin", Cardinality(1, 1), Cardinality(1, 2),
                forward_constraint=Logical("or", is_value, Compare("!=", SymLit("blue"),
                                                                   AttrRef(Side.LEFT, "color"))),
            ),),
        )

    assert well_formed(spec_with("red")) == []
    diagnostics = well_formed(spec_with("gren"))
    assert codes(diagnostics) == Counter({"EXPR_VALUE": 1})
    assert "gren is not a value of Color" in diagnostics[0].message
