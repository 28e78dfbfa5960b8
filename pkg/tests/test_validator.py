"""
Test module for class resolution, the zero-lower-bound rule, level mappings
and instance validation.
"""

import pytest

from src.model.errors import MissingBothAssignmentError
from src.model.types import ComponentClass, InstanceSpec
from src.validator.admissibility import (
    check_zero_lower_bound_rule, compute_level_mapping, is_level_mapping,
)
from src.validator.classes import effective_classes
from src.validator.instance import validate_instance
from src.validator.pipeline import check_admissibility
from tests.spec_factory import PROPERTY_SEEDS, load_corpus, parse_spec, random_spec

BOTH_DOMAIN = """
component Machine class input
component Part class both
connect Machine - Part forward [1,2] backward [1,1]
"""


def codes(diagnostics):
    return [d.code for d in diagnostics]


def test_worst_case_classes_make_both_generated():
    """Test both kinds count as generated without an instance."""
    spec, _ = load_corpus("both_class.loco")
    assert effective_classes(spec) == {"Machine": ComponentClass.INPUT,
                                       "Part": ComponentClass.GENERATED}


def test_effective_classes_follow_the_instance():
    """Test both kinds resolve to the instance's assignment."""
    spec, _ = parse_spec(BOTH_DOMAIN + "instance { input Machine = 1  input Part = 2 }\n")
    inst = InstanceSpec(both_assignments={"Part": ComponentClass.INPUT})
    assert effective_classes(spec, inst)["Part"] is ComponentClass.INPUT


def test_missing_both_assignment_raises():
    """Test an unassigned both kind under a concrete instance."""
    spec, _ = parse_spec(BOTH_DOMAIN)
    with pytest.raises(MissingBothAssignmentError):
        effective_classes(spec, InstanceSpec())


def test_zero_lower_bound_rule_accepts_bin_packing():
    """Test that the one-to-many connection grounds Bin."""
    spec, _ = load_corpus("bin_packing.loco")
    assert check_zero_lower_bound_rule(spec) == []


def test_zero_lower_bound_rule_without_one_to_many():
    """Test that Bin is flagged once its one-to-many connection is gone."""
    spec, _ = load_corpus("bin_packing_no_otm.loco")
    diagnostics = check_zero_lower_bound_rule(spec)
    assert codes(diagnostics) == ["ZERO_LB_RULE"]
    assert diagnostics[0].entity == "Bin"


def test_zero_lower_bound_rule_on_generated_pair():
    """Test a generated kind whose only connection has lower bound 0."""
    spec, _ = load_corpus("infinite_model.loco")
    assert [d.entity for d in check_zero_lower_bound_rule(spec)] == ["C1"]


def test_level_mapping_of_bin_packing():
    """Test things on level 0 and Bin on level 1."""
    spec, _ = load_corpus("bin_packing.loco")
    mapping = compute_level_mapping(spec)
    assert mapping.ok
    assert dict(mapping.levels) == {"ThingA": 0, "ThingB": 0, "Bin": 1}
    assert is_level_mapping(spec, mapping.levels)


def test_mutually_grounded_kinds_are_unleveled():
    """Test that C2 and C3 cannot justify each other."""
    spec, inst = load_corpus("unleveled.loco")
    mapping = compute_level_mapping(spec)
    assert mapping.unleveled == frozenset({"C2", "C3"})
    assert not is_level_mapping(spec, {"C1": 0, "C2": 1, "C3": 2})
    assert codes(check_admissibility(spec, inst)) == ["UNLEVELED", "UNLEVELED"]


def test_self_loop_does_not_ground_a_kind():
    """Test that a self-loop alone never justifies a level."""
    spec, _ = parse_spec(
        "component In class input\ncomponent Node class generated\n"
        "connect Node - Node forward [1,2]\n"
        "connect In - Node forward [0,1] backward [0,1]\n")
    mapping = compute_level_mapping(spec)
    assert mapping.unleveled == frozenset({"Node"})


def test_level_mapping_through_a_chain():
    """Test levels grow by one along positive connections."""
    spec, _ = load_corpus("self_loop.loco")
    assert dict(compute_level_mapping(spec).levels) == {"Task": 0, "Worker": 1}
    spec, _ = parse_spec(
        "component A class input\ncomponent B class generated\ncomponent C class generated\n"
        "connect A - B forward [1,1] backward [1,1]\n"
        "connect B - C forward [0,1] backward [1,1]\n")
    mapping = compute_level_mapping(spec)
    assert dict(mapping.levels) == {"A": 0, "B": 1, "C": 2}
    assert is_level_mapping(spec, {"A": 0, "B": 1, "C": 3})
    assert not is_level_mapping(spec, {"A": 0, "B": 2, "C": 2})


@pytest.mark.parametrize("seed", PROPERTY_SEEDS)
def test_computed_levels_are_minimal(seed):
    """Test that lowering any generated kind's level breaks the mapping."""
    spec, _ = random_spec(seed)
    mapping = compute_level_mapping(spec)
    assert is_level_mapping(spec, mapping.levels)
    for kind, level in mapping.levels.items():
        if level > 1:
            lowered = dict(mapping.levels, **{kind: level - 1})
            assert not is_level_mapping(spec, lowered)


def test_instance_domains():
    """Test missing, misplaced and duplicated domains."""
    spec, _ = parse_spec(
        "component A class input\ncomponent B class input\ncomponent G class generated\n"
        "connect A - G forward [1,1] backward [1,1]\n"
        "connect B - G forward [0,1] backward [0,1]\n")
    inst = InstanceSpec(input_domains={"A": ("a1", "a1"), "G": ("g1",)})
    assert sorted(codes(validate_instance(spec, inst))) == [
        "DOMAIN_NOT_INPUT", "DUPLICATE_ID", "MISSING_DOMAIN"]


def test_instance_without_input_components():
    """Test NO_INPUT when every domain is empty."""
    spec, _ = parse_spec("component A class input\n")
    assert codes(validate_instance(spec, InstanceSpec(input_domains={"A": ()}))) == ["NO_INPUT"]


def test_required_atoms():
    """Test arity, value and catalogue checks on required atoms."""
    spec, inst = parse_spec(
        "type W = {1, 2, 3}\n"
        "component Item class input attributes (w: W)\n"
        "catalogue Item {(1); (2)}\n"
        "instance {\n"
        "  input Item = {i1, i2}\n"
        "  require Item(i1, 1, 2)\n"
        "  require Item(i1, 7)\n"
        "  require Item(i2, 3)\n"
        "  require Item(i3)\n"
        "}\n")
    assert codes(validate_instance(spec, inst)) == [
        "ATOM_BINDING", "ATOM_BINDING", "ATOM_BINDING", "UNKNOWN_REF"]


def test_conflicting_required_atoms():
    """Test two bindings of one id that no row satisfies together."""
    spec, inst = parse_spec(
        "type W = {1, 2}\n"
        "component Item class input attributes (w: W)\n"
        "instance { input Item = {i1}  require Item(i1, 1)  require Item(i1, 2) }\n")
    assert codes(validate_instance(spec, inst)) == ["LITERAL_CONFLICT"]


def test_conflicting_connection_literals():
    """Test assert and deny of the same edge, and ids outside the domain."""
    spec, inst = parse_spec(
        "component A class input\ncomponent G class generated\n"
        "connect A - G forward [1,1] backward [1,1]\n"
        "instance {\n"
        "  input A = {a1}\n"
        "  assert A2G(a1, g1)\n"
        "  deny A2G(a1, g1)\n"
        "  assert A2G(a9, g1)\n"
        "}\n")
    assert codes(validate_instance(spec, inst)) == ["LITERAL_CONFLICT", "UNKNOWN_REF"]


@pytest.mark.parametrize("name", [
    "bin_packing.loco", "small_bin_packing.loco", "three_thingb.loco", "two_thinga.loco",
    "conflict.loco", "input_only.loco", "both_class.loco", "self_loop.loco",
    "require_41_bins.loco",
])
def test_admissible_corpus(name):
    """Test that the admissible corpus files pass every check."""
    spec, inst = load_corpus(name)
    assert check_admissibility(spec, inst) == []


def test_inadmissible_corpus():
    """Test the corpus files that describe infinite models."""
    spec, inst = load_corpus("infinite_model.loco")
    assert codes(check_admissibility(spec, inst)) == ["ZERO_LB_RULE", "UNLEVELED"]
    spec, inst = load_corpus("bin_packing_no_otm.loco")
    assert codes(check_admissibility(spec, inst)) == ["ZERO_LB_RULE", "UNLEVELED"]


def test_structural_errors_stop_the_pipeline():
    """Test that later stages do not run on a malformed spec."""
    spec, inst = parse_spec(
        "component A class input\ncomponent G class generated\n"
        "connect A - G forward [1,1]\n"
        "instance { input A = 1 }\n")
    assert codes(check_admissibility(spec, inst)) == ["SELF_LOOP_DIRECTIONS"]
