"""
Test module for the DSL lexer, parser and serializer.
"""

import pytest

from src.dsl.lexer import LocoLexer
from src.dsl.parser import parse, parse_file, shorthand_ids
from src.dsl.serializer import format_expr, serialize
from src.model.expr import Arith, AttrRef, Compare, IntLit, Logical, Side, Sum, SymLit
from src.model.types import Cardinality, ComponentClass, ConnectionLiteral, RequiredAtom
from tests.spec_factory import corpus_files, load_corpus, parse_spec

MINIMAL = """
component Order class input
component Box class generated
connect Order - Box forward [1,1] backward [1,3]
instance { input Order = 2 }
"""


def error_codes(text: str):
    result = parse(text)
    assert not result.ok
    return [d.code for d in result.diagnostics]


def test_tokenize_keywords_and_operators():
    """Test that the hyphenated keyword wins over connect and minus."""
    tokens = LocoLexer().tokenize("connect-one-to-many Bin -> {A, B} [1,*]")
    assert [t.type for t in tokens[:4]] == ["CONNECT_OTM", "IDENT", "ARROW", "LBRACE"]
    assert tokens[1].span.column == 21


def test_lexer_reports_bad_characters():
    """Test LEX_ERROR with its location."""
    result = parse("component A class input\ncomponent B @ class generated\n")
    assert [d.code for d in result.diagnostics][0] == "LEX_ERROR"
    assert (result.diagnostics[0].span.line, result.diagnostics[0].span.column) == (2, 13)


def test_parse_canonical_bin_packing():
    """Test the bin-packing file yields 3 kinds, 2 connections and 1 one-to-many."""
    spec, inst = load_corpus("bin_packing.loco")
    assert spec.kind_names == ("ThingA", "ThingB", "Bin")
    assert len(spec.binary_connections) == 2
    assert len(spec.one_to_many) == 1

    thing_a = spec.connections_by_name["ThingA2Bin"]
    assert thing_a.forward == Cardinality(1, 1)
    assert thing_a.backward == Cardinality(0, 5)
    assert thing_a.forward_constraint is None
    assert thing_a.backward_constraint == Compare("<=", Sum(Side.LEFT, "size"), IntLit(5))

    otm = spec.one_to_many[0]
    assert (otm.left, otm.rights, otm.card, otm.exclusive) == (
        "Bin", ("ThingA", "ThingB"), Cardinality(1, None), False)
    assert inst.input_domains["ThingA"] == shorthand_ids("ThingA", 20)
    assert inst.input_domains["ThingB"][-1] == "ThingB_20"


def test_empty_input():
    """Test that empty text and comment-only text are SYNTAX_EMPTY."""
    assert error_codes("") == ["SYNTAX_EMPTY"]
    assert error_codes("# nothing here\n") == ["SYNTAX_EMPTY"]


def test_cardinality_order_span():
    """Test CARD_ORDER at the opening bracket of [2,1]."""
    result = parse("component A class input\ncomponent B class generated\n"
                   "connect A - B forward [2,1] backward [1,1]\n")
    assert [d.code for d in result.diagnostics] == ["CARD_ORDER"]
    span = result.diagnostics[0].span
    assert (span.line, span.column) == (3, 23)


def test_unbounded_binary_direction():
    """Test that '*' is rejected outside one-to-many connections."""
    codes = error_codes("component A class input\ncomponent B class generated\n"
                        "connect A - B forward [1,*] backward [1,1]\n")
    assert codes == ["CARD_UNBOUNDED"]


def test_unknown_aggregate():
    """Test that aggregates other than sum are refused."""
    codes = error_codes(
        "type S = {1, 2}\ncomponent A class input attributes (s: S)\ncomponent B class generated\n"
        "connect A - B forward [1,1] backward [1,2] where avg(left.s) <= 1\n")
    assert "UNKNOWN_AGGREGATE" in codes


def test_unresolved_references():
    """Test references to undeclared kinds, types and connections."""
    codes = error_codes(
        "component A class input attributes (w: Weight)\n"
        "connect A - Crate forward [1,1] backward [1,1]\n"
        "instance { input A = 1  deny A2Box(A_1, b) }\n")
    assert codes.count("UNRESOLVED_REF") == 3


def test_duplicate_declarations():
    """Test DUPLICATE_NAME for kinds and input domains."""
    codes = error_codes(
        "component A class input\ncomponent A class input\n"
        "instance { input A = 1  input A = 2 }\n")
    assert codes.count("DUPLICATE_NAME") == 2


def test_recovery_reports_several_errors():
    """Test that parsing resumes at the next declaration."""
    codes = error_codes(
        "component A klass input\n"
        "type T = {1, 2}\n"
        "connect A - A forward [1 1]\n"
        "component B class input\n")
    assert codes == ["SYNTAX_ERROR", "SYNTAX_ERROR"]


def test_where_attaches_to_preceding_direction():
    """Test forward and backward constraints land on their own direction."""
    spec, _ = parse_spec(
        "type S = {1, 2, 3}\n"
        "component A class input attributes (s: S)\n"
        "component B class generated attributes (cap: S)\n"
        "connect A - B forward [1,1] where left.s <= right.cap "
        "backward [1,3] where sum(left.s) <= right.cap\n"
        "instance { input A = 1 }\n")
    conn = spec.binary_connections[0]
    assert conn.forward_constraint == Compare("<=", AttrRef(Side.LEFT, "s"), AttrRef(Side.RIGHT, "cap"))
    assert conn.backward_constraint == Compare("<=", Sum(Side.LEFT, "s"), AttrRef(Side.RIGHT, "cap"))


def test_expression_precedence():
    """Test and binds tighter than or, and parenthesized formulas."""
    spec, _ = parse_spec(
        "type C = {red, blue}\ntype S = {1, 2}\n"
        "component A class input attributes (c: C, s: S)\n"
        "component B class generated attributes (s: S)\n"
        "connect A - B forward [1,1] where (left.c = red or left.s = 2) and "
        "(left.s + 1) * 2 > -3 backward [1,1]\n"
        "instance { input A = 1 }\n")
    expr = spec.binary_connections[0].forward_constraint
    left_c = Compare("=", AttrRef(Side.LEFT, "c"), SymLit("red"))
    left_s = Compare("=", AttrRef(Side.LEFT, "s"), IntLit(2))
    product = Arith("*", Arith("+", AttrRef(Side.LEFT, "s"), IntLit(1)), IntLit(2))
    assert expr == Logical("and", Logical("or", left_c, left_s), Compare(">", product, IntLit(-3)))


def test_instance_block():
    """Test domains, class assignments, required atoms and literals."""
    spec, inst = parse_spec(
        "type M = {steel, brass}\n"
        "component Machine class input\n"
        "component Part class both attributes (m: M)\n"
        "connect Machine - Part forward [1,2] backward [1,1]\n"
        "instance {\n"
        "  input Machine = {press, lathe}\n"
        "  generated Part\n"
        "  require Part(p1, _)\n"
        "  require Part(p2, brass)\n"
        "  assert Machine2Part(press, p1)\n"
        "  deny Machine2Part(lathe, p1)\n"
        "}\n")
    assert inst.input_domains["Machine"] == ("press", "lathe")
    assert inst.both_assignments == {"Part": ComponentClass.GENERATED}
    assert inst.required_atoms == (RequiredAtom("Part", "p1", (None,)),
                                   RequiredAtom("Part", "p2", ("brass",)))
    assert inst.connection_literals == (ConnectionLiteral("Machine2Part", "press", "p1", True),
                                        ConnectionLiteral("Machine2Part", "lathe", "p1", False))


def test_input_domain_on_both_kind_assigns_input():
    """Test that a domain on a both kind makes it input."""
    _, inst = load_corpus("both_class.loco")
    assert inst.both_assignments == {"Part": ComponentClass.GENERATED}
    _, inst = parse_spec("component P class both\ninstance { input P = 3 }\n")
    assert inst.both_assignments == {"P": ComponentClass.INPUT}


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_corpus_round_trip(path):
    """Test parse(serialize(parse(f))) equals parse(f) for every corpus file."""
    spec, inst = load_corpus(path.name)
    text = serialize(spec, inst)
    reparsed = parse(text)
    assert reparsed.ok, [d.render() for d in reparsed.diagnostics]
    assert (reparsed.spec, reparsed.instance) == (spec, inst)
    assert serialize(reparsed.spec, reparsed.instance) == text


def test_serialize_minimal_spec():
    """Test the canonical text of a minimal spec."""
    spec, inst = parse_spec(MINIMAL)
    assert serialize(spec, inst) == (
        "component Order class input\n"
        "component Box class generated\n"
        "\n"
        "connect Order - Box forward [1,1] backward [1,3]\n"
        "\n"
        "instance {\n"
        "  input Order = 2\n"
        "}\n")
    assert serialize(spec, inst) == serialize(spec, inst)


def test_serialize_empty_domain():
    """Test that an empty input domain survives a round trip."""
    spec, inst = load_corpus("three_thingb.loco")
    assert "input ThingA = 0" in serialize(spec, inst)


def test_format_expr_parentheses():
    """Test that only necessary parentheses are printed."""
    a = AttrRef(Side.RIGHT, "a")
    assert format_expr(Compare("<=", Arith("*", Arith("+", a, IntLit(1)), IntLit(2)), IntLit(5))) == \
        "(right.a + 1) * 2 <= 5"
    assert format_expr(Arith("-", IntLit(1), Arith("-", IntLit(2), IntLit(3)))) == "1 - (2 - 3)"
    assert format_expr(Arith("-", Arith("-", IntLit(1), IntLit(2)), IntLit(3))) == "1 - 2 - 3"
    x = Compare("=", a, IntLit(1))
    assert format_expr(Logical("and", Logical("or", x, x), x)) == \
        "(right.a = 1 or right.a = 1) and right.a = 1"
    assert format_expr(Logical("or", x, Logical("and", x, x))) == \
        "right.a = 1 or right.a = 1 and right.a = 1"


def test_parse_file_spans_carry_path(tmp_path):
    """Test that diagnostics of a file name that file."""
    path = tmp_path / "broken.loco"
    path.write_text("component A class input\nconnect A - B forward [2,1] backward [1,1]\n",
                    encoding="utf-8")
    result = parse_file(path)
    assert not result.ok
    assert all(d.span.file == str(path) for d in result.diagnostics)
    assert {d.code for d in result.diagnostics} == {"CARD_ORDER", "UNRESOLVED_REF"}
