"""Recursive-descent parser for the configuration DSL.

The parser produces a ``(ProblemSpec, InstanceSpec)`` pair or, when anything
is wrong, only diagnostics: a parse with errors never returns a spec.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Set, Tuple, Union

import structlog

from src.dsl.lexer import LocoLexer, Token
from src.model.diagnostics import Diagnostic, SourceSpan, has_errors
from src.model.expr import (
    COMPARISON_OPS, Arith, AttrRef, Compare, ConstraintExpr, IntLit, Logical, Side, Sum,
    SymLit, Term,
)
from src.model.types import (
    AttributeTypeDef, BinaryConnectionDef, Cardinality, CatalogueRow, ComponentClass,
    ComponentKindDef, ConnectionLiteral, InstanceSpec, OneToManyConnectionDef, ProblemSpec,
    RequiredAtom, Value,
)

logger = structlog.get_logger(__name__)

TOP_LEVEL = frozenset({"TYPE", "COMPONENT", "CATALOGUE", "CONNECT", "CONNECT_OTM", "INSTANCE"})

COMPARISON_TOKENS = {
    "EQ": "=", "NEQ": "!=", "LE": "<=", "LT": "<", "GE": ">=", "GT": ">",
}

CLASS_TOKENS = {
    "INPUT": ComponentClass.INPUT,
    "GENERATED": ComponentClass.GENERATED,
    "BOTH": ComponentClass.BOTH,
}


def shorthand_ids(kind: str, count: int) -> Tuple[str, ...]:
    """Ids named by the ``input K = n`` shorthand."""
    return tuple(f"{kind}_{k}" for k in range(1, count + 1))


@dataclass
class ParseResult:
    """Outcome of a parse: the spec pair, or diagnostics explaining why not."""
    spec: Optional[ProblemSpec] = None
    instance: Optional[InstanceSpec] = None
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.spec is not None


class _SyntaxError(Exception):
    def __init__(self, diagnostic: Diagnostic) -> None:
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


@dataclass
class _KindDecl:
    name: str
    clazz: ComponentClass
    attributes: List[Tuple[str, str]]
    span: SourceSpan


class _Parser:
    def __init__(self, tokens: List[Token], file: str) -> None:
        self.tokens = tokens
        self.file = file
        self.pos = 0
        self.diagnostics: List[Diagnostic] = []

        self.types: List[AttributeTypeDef] = []
        self.kinds: List[_KindDecl] = []
        self.catalogues: Dict[str, Tuple[List[CatalogueRow], SourceSpan]] = {}
        self.connections: List[BinaryConnectionDef] = []
        self.one_to_many: List[OneToManyConnectionDef] = []

        self.domains: Dict[str, Tuple[str, ...]] = {}
        self.domain_spans: Dict[str, SourceSpan] = {}
        self.generated_decls: List[Tuple[str, SourceSpan]] = []
        self.required: List[RequiredAtom] = []
        self.literals: List[ConnectionLiteral] = []
        self.instance_span: Optional[SourceSpan] = None

    # token helpers

    def peek(self, offset: int = 0) -> Optional[Token]:
        index = self.pos + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def at(self, *types: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.type in types

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def _end_span(self) -> SourceSpan:
        if self.tokens:
            last = self.tokens[-1].span
            return SourceSpan(self.file, last.line, last.column + last.length - 1, 1)
        return SourceSpan(self.file, 1, 1, 1)

    def error(self, message: str, tok: Optional[Token] = None, code: str = "SYNTAX_ERROR") -> _SyntaxError:
        span = tok.span if tok is not None else self._end_span()
        return _SyntaxError(Diagnostic(code=code, message=message, span=span))

    def expect(self, tok_type: str, what: str) -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}, found end of input")
        if tok.type != tok_type:
            raise self.error(f"expected {what}, found {tok.value!r}", tok)
        return self.advance()

    def report(self, code: str, message: str, span: SourceSpan) -> None:
        self.diagnostics.append(Diagnostic(code=code, message=message, span=span))

    def recover(self) -> None:
        """Skip to the next top-level keyword."""
        self.pos += 1
        while self.pos < len(self.tokens) and self.tokens[self.pos].type not in TOP_LEVEL:
            self.pos += 1

    # top level

    def parse(self) -> None:
        handlers: Dict[str, Callable[[], None]] = {
            "TYPE": self.parse_typedef,
            "COMPONENT": self.parse_kinddef,
            "CATALOGUE": self.parse_catalogue,
            "CONNECT": self.parse_binconn,
            "CONNECT_OTM": self.parse_otmconn,
            "INSTANCE": self.parse_instance,
        }
        while self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            handler = handlers.get(tok.type)
            try:
                if handler is None:
                    raise self.error(f"expected a declaration, found {tok.value!r}", tok)
                handler()
            except _SyntaxError as e:
                self.diagnostics.append(e.diagnostic)
                self.recover()

    def parse_literal(self) -> Value:
        tok = self.peek()
        if tok is not None and tok.type == "MINUS":
            self.advance()
            return -int(self.expect("INT", "an integer").value)
        if tok is not None and tok.type == "INT":
            return int(self.advance().value)
        if tok is not None and tok.type == "IDENT":
            return str(self.advance().value)
        raise self.error("expected an integer or symbolic value", tok)

    def parse_typedef(self) -> None:
        self.expect("TYPE", "'type'")
        name = self.expect("IDENT", "a type name")
        self.expect("EQ", "'='")
        self.expect("LBRACE", "'{'")
        values = [self.parse_literal()]
        while self.at("COMMA"):
            self.advance()
            values.append(self.parse_literal())
        self.expect("RBRACE", "'}'")
        self.types.append(AttributeTypeDef(str(name.value), tuple(values), span=name.span))

    def parse_kinddef(self) -> None:
        self.expect("COMPONENT", "'component'")
        name = self.expect("IDENT", "a component kind name")
        self.expect("CLASS", "'class'")
        tok = self.peek()
        if tok is None or tok.type not in CLASS_TOKENS:
            raise self.error("expected 'input', 'generated' or 'both'", tok)
        clazz = CLASS_TOKENS[self.advance().type]
        attributes: List[Tuple[str, str]] = []
        if self.at("ATTRIBUTES"):
            self.advance()
            self.expect("LPAREN", "'('")
            attributes.append(self.parse_attribute())
            while self.at("COMMA"):
                self.advance()
                attributes.append(self.parse_attribute())
            self.expect("RPAREN", "')'")
        self.kinds.append(_KindDecl(str(name.value), clazz, attributes, name.span))

    def parse_attribute(self) -> Tuple[str, str]:
        attr = self.expect("IDENT", "an attribute name")
        self.expect("COLON", "':'")
        type_name = self.expect("IDENT", "an attribute type name")
        return str(attr.value), str(type_name.value)

    def parse_catalogue(self) -> None:
        self.expect("CATALOGUE", "'catalogue'")
        name = self.expect("IDENT", "a component kind name")
        self.expect("LBRACE", "'{'")
        rows = [self.parse_row()]
        while self.at("SEMI"):
            self.advance()
            rows.append(self.parse_row())
        self.expect("RBRACE", "'}'")
        kind = str(name.value)
        if kind in self.catalogues:
            self.report("DUPLICATE_NAME", f"catalogue for {kind} declared twice", name.span)
            return
        self.catalogues[kind] = (rows, name.span)

    def parse_row(self) -> CatalogueRow:
        self.expect("LPAREN", "'('")
        values = [self.parse_literal()]
        while self.at("COMMA"):
            self.advance()
            values.append(self.parse_literal())
        self.expect("RPAREN", "')'")
        return CatalogueRow(tuple(values))

    def parse_card(self, allow_unbounded: bool) -> Cardinality:
        open_tok = self.expect("LBRACKET", "'['")
        lower = int(self.expect("INT", "a lower bound").value)
        self.expect("COMMA", "','")
        upper: Optional[int]
        if self.at("STAR"):
            star = self.advance()
            upper = None
            if not allow_unbounded:
                self.report("CARD_UNBOUNDED",
                            "'*' is only allowed as a one-to-many upper bound", star.span)
        else:
            upper = int(self.expect("INT", "an upper bound or '*'").value)
        self.expect("RBRACKET", "']'")
        if upper is not None and upper < 1:
            self.report("CARD_UPPER", f"upper bound {upper} must be at least 1", open_tok.span)
        if upper is not None and lower > upper:
            self.report("CARD_ORDER", f"cardinality [{lower},{upper}] has lower > upper",
                        open_tok.span)
        return Cardinality(lower, upper)

    def parse_binconn(self) -> None:
        start = self.expect("CONNECT", "'connect'")
        left = self.expect("IDENT", "a component kind name")
        self.expect("MINUS", "'-'")
        right = self.expect("IDENT", "a component kind name")
        self.expect("FORWARD", "'forward'")
        forward = self.parse_card(allow_unbounded=False)
        forward_constraint = self.parse_where()
        backward: Optional[Cardinality] = None
        backward_constraint: Optional[ConstraintExpr] = None
        if self.at("BACKWARD"):
            self.advance()
            backward = self.parse_card(allow_unbounded=False)
            backward_constraint = self.parse_where()
        self.connections.append(BinaryConnectionDef(
            left=str(left.value), right=str(right.value),
            forward=forward, backward=backward,
            forward_constraint=forward_constraint, backward_constraint=backward_constraint,
            span=start.span,
        ))

    def parse_where(self) -> Optional[ConstraintExpr]:
        if not self.at("WHERE"):
            return None
        self.advance()
        return self.parse_expr()

    def parse_otmconn(self) -> None:
        start = self.expect("CONNECT_OTM", "'connect-one-to-many'")
        left = self.expect("IDENT", "a component kind name")
        self.expect("ARROW", "'->'")
        self.expect("LBRACE", "'{'")
        rights = [str(self.expect("IDENT", "a component kind name").value)]
        while self.at("COMMA"):
            self.advance()
            rights.append(str(self.expect("IDENT", "a component kind name").value))
        self.expect("RBRACE", "'}'")
        card = self.parse_card(allow_unbounded=True)
        tok = self.peek()
        if tok is None or tok.type not in ("INCLUSIVE", "EXCLUSIVE"):
            raise self.error("expected 'inclusive' or 'exclusive'", tok)
        exclusive = self.advance().type == "EXCLUSIVE"
        self.one_to_many.append(OneToManyConnectionDef(
            left=str(left.value), rights=tuple(rights), card=card, exclusive=exclusive,
            span=start.span,
        ))

    # expressions

    def parse_expr(self) -> ConstraintExpr:
        node = self.parse_and()
        while self.at("OR"):
            self.advance()
            node = Logical("or", node, self.parse_and())
        return node

    def parse_and(self) -> ConstraintExpr:
        node = self.parse_bool_atom()
        while self.at("AND"):
            self.advance()
            node = Logical("and", node, self.parse_bool_atom())
        return node

    def parse_bool_atom(self) -> ConstraintExpr:
        if self.at("LPAREN"):
            # "(" opens either a parenthesized formula or an arithmetic term.
            saved = self.pos
            try:
                return self.parse_comparison()
            except _SyntaxError:
                self.pos = saved
            self.advance()
            node = self.parse_expr()
            self.expect("RPAREN", "')'")
            return node
        return self.parse_comparison()

    def parse_comparison(self) -> Compare:
        left = self.parse_term()
        tok = self.peek()
        if tok is None or tok.type not in COMPARISON_TOKENS:
            raise self.error("expected a comparison operator", tok)
        op = COMPARISON_TOKENS[self.advance().type]
        right = self.parse_term()
        return Compare(op, left, right)

    def parse_term(self) -> Term:
        node = self.parse_product()
        while self.at("PLUS", "MINUS"):
            op = "+" if self.advance().type == "PLUS" else "-"
            node = Arith(op, node, self.parse_product())
        return node

    def parse_product(self) -> Term:
        node = self.parse_unary()
        while self.at("STAR"):
            self.advance()
            node = Arith("*", node, self.parse_unary())
        return node

    def parse_unary(self) -> Term:
        if self.at("MINUS"):
            self.advance()
            return IntLit(-int(self.expect("INT", "an integer").value))
        return self.parse_primary()

    def parse_side(self) -> Side:
        tok = self.peek()
        if tok is None or tok.type not in ("LEFT", "RIGHT"):
            raise self.error("expected 'left' or 'right'", tok)
        return Side.LEFT if self.advance().type == "LEFT" else Side.RIGHT

    def parse_primary(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise self.error("expected an expression, found end of input")
        if tok.type == "INT":
            return IntLit(int(self.advance().value))
        if tok.type == "LPAREN":
            self.advance()
            node = self.parse_term()
            self.expect("RPAREN", "')'")
            return node
        if tok.type == "SUM":
            self.advance()
            self.expect("LPAREN", "'('")
            side = self.parse_side()
            self.expect("DOT", "'.'")
            attr = self.expect("IDENT", "an attribute name")
            self.expect("RPAREN", "')'")
            return Sum(side, str(attr.value))
        if tok.type in ("LEFT", "RIGHT"):
            side = self.parse_side()
            self.expect("DOT", "'.'")
            attr = self.expect("IDENT", "an attribute name")
            return AttrRef(side, str(attr.value))
        if tok.type == "IDENT":
            following = self.peek(1)
            if following is not None and following.type == "LPAREN":
                raise self.error(f"unknown aggregate {tok.value!r}; only sum is supported",
                                 tok, code="UNKNOWN_AGGREGATE")
            return SymLit(str(self.advance().value))
        raise self.error(f"expected an expression, found {tok.value!r}", tok)

    # instance knowledge

    def parse_instance(self) -> None:
        start = self.expect("INSTANCE", "'instance'")
        if self.instance_span is None:
            self.instance_span = start.span
        self.expect("LBRACE", "'{'")
        while not self.at("RBRACE"):
            tok = self.peek()
            if tok is None:
                raise self.error("expected '}' to close the instance block")
            if tok.type == "INPUT":
                self.parse_domain()
            elif tok.type == "GENERATED":
                self.advance()
                name = self.expect("IDENT", "a component kind name")
                self.generated_decls.append((str(name.value), name.span))
            elif tok.type == "REQUIRE":
                self.parse_require()
            elif tok.type in ("ASSERT", "DENY"):
                self.parse_literal_decl()
            else:
                raise self.error(f"unexpected {tok.value!r} in instance block", tok)
        self.expect("RBRACE", "'}'")

    def parse_domain(self) -> None:
        self.expect("INPUT", "'input'")
        name = self.expect("IDENT", "a component kind name")
        self.expect("EQ", "'='")
        kind = str(name.value)
        if self.at("INT"):
            ids = shorthand_ids(kind, int(self.advance().value))
        else:
            self.expect("LBRACE", "'{' or a count")
            id_list = [str(self.expect("IDENT", "an identifier").value)]
            while self.at("COMMA"):
                self.advance()
                id_list.append(str(self.expect("IDENT", "an identifier").value))
            self.expect("RBRACE", "'}'")
            ids = tuple(id_list)
        if kind in self.domains:
            self.report("DUPLICATE_NAME", f"input domain for {kind} declared twice", name.span)
            return
        self.domains[kind] = ids
        self.domain_spans[kind] = name.span

    def parse_require(self) -> None:
        self.expect("REQUIRE", "'require'")
        kind = self.expect("IDENT", "a component kind name")
        self.expect("LPAREN", "'('")
        ident = self.expect("IDENT", "an identifier")
        bindings: List[Optional[Value]] = []
        while self.at("COMMA"):
            self.advance()
            if self.at("UNDERSCORE"):
                self.advance()
                bindings.append(None)
            else:
                bindings.append(self.parse_literal())
        self.expect("RPAREN", "')'")
        self.required.append(RequiredAtom(str(kind.value), str(ident.value), tuple(bindings),
                                          span=kind.span))

    def parse_literal_decl(self) -> None:
        positive = self.advance().type == "ASSERT"
        conn = self.expect("IDENT", "a connection name")
        self.expect("LPAREN", "'('")
        left_id = self.expect("IDENT", "an identifier")
        self.expect("COMMA", "','")
        right_id = self.expect("IDENT", "an identifier")
        self.expect("RPAREN", "')'")
        self.literals.append(ConnectionLiteral(str(conn.value), str(left_id.value),
                                               str(right_id.value), positive, span=conn.span))

    # assembly

    def resolve(self) -> None:
        """Report duplicate declarations and names that resolve to nothing."""
        type_names: Set[str] = set()
        for attr_type in self.types:
            if attr_type.name in type_names:
                self.report("DUPLICATE_NAME", f"type {attr_type.name} declared twice", attr_type.span)
            type_names.add(attr_type.name)

        kind_names: Set[str] = set()
        for kind in self.kinds:
            if kind.name in kind_names:
                self.report("DUPLICATE_NAME", f"component {kind.name} declared twice", kind.span)
            kind_names.add(kind.name)
            for attr, type_name in kind.attributes:
                if type_name not in type_names:
                    self.report("UNRESOLVED_REF",
                                f"attribute {kind.name}.{attr} has unknown type {type_name}", kind.span)

        def check_kind(name: str, span: Optional[SourceSpan], where: str) -> None:
            if name not in kind_names:
                self.report("UNRESOLVED_REF", f"{where} references unknown component kind {name}",
                            span or self._end_span())

        for kind, (_, span) in self.catalogues.items():
            check_kind(kind, span, "catalogue")
        for conn in self.connections:
            check_kind(conn.left, conn.span, f"connection {conn.name}")
            check_kind(conn.right, conn.span, f"connection {conn.name}")
        for otm in self.one_to_many:
            for kind in (otm.left, *otm.rights):
                check_kind(kind, otm.span, f"one-to-many {otm.name}")
        for kind, span in self.domain_spans.items():
            check_kind(kind, span, "input domain")
        for kind, span in self.generated_decls:
            check_kind(kind, span, "class assignment")
        for atom in self.required:
            check_kind(atom.kind, atom.span, "required atom")
        connection_names = {c.name for c in self.connections}
        for literal in self.literals:
            if literal.connection not in connection_names:
                self.report("UNRESOLVED_REF", f"unknown connection {literal.connection}",
                            literal.span or self._end_span())

    def build(self) -> Tuple[ProblemSpec, InstanceSpec]:
        kinds = []
        for decl in self.kinds:
            rows, catalogue_span = self.catalogues.get(decl.name, (None, None))
            kinds.append(ComponentKindDef(
                name=decl.name, clazz=decl.clazz, attributes=tuple(decl.attributes),
                catalogue=tuple(rows) if rows is not None else None,
                span=decl.span, catalogue_span=catalogue_span,
            ))
        spec = ProblemSpec(
            attribute_types=tuple(self.types),
            kinds=tuple(kinds),
            binary_connections=tuple(self.connections),
            one_to_many=tuple(self.one_to_many),
        )
        classes = {k.name: k.clazz for k in self.kinds}
        both_assignments: Dict[str, ComponentClass] = {}
        for kind in self.domains:
            if classes.get(kind) is ComponentClass.BOTH:
                both_assignments[kind] = ComponentClass.INPUT
        for kind, _ in self.generated_decls:
            both_assignments[kind] = ComponentClass.GENERATED
        instance = InstanceSpec(
            both_assignments=both_assignments,
            input_domains=self.domains,
            required_atoms=tuple(self.required),
            connection_literals=tuple(self.literals),
            span=self.instance_span,
        )
        return spec, instance


def parse(text: str, file: str = "<string>") -> ParseResult:
    """Parse DSL source text.

    Args:
        text: The source text.
        file: Name used in diagnostic spans.

    Returns:
        ParseResult: the spec pair on success, otherwise only diagnostics.
    """
    lexer = LocoLexer(file)
    tokens = lexer.tokenize(text)
    diagnostics = list(lexer.diagnostics)
    if not tokens:
        if not diagnostics:
            diagnostics.append(Diagnostic(
                code="SYNTAX_EMPTY",
                message="empty specification; at least one input component kind is required",
                span=SourceSpan(file, 1, 1, 1),
            ))
        return ParseResult(diagnostics=diagnostics)

    parser = _Parser(tokens, file)
    parser.parse()
    parser.resolve()
    diagnostics.extend(parser.diagnostics)
    if has_errors(diagnostics):
        logger.info("Parse failed", file=file, errors=len(diagnostics))
        return ParseResult(diagnostics=diagnostics)
    spec, instance = parser.build()
    logger.debug("Parsed specification", file=file, kinds=len(spec.kinds),
                 connections=len(spec.binary_connections), one_to_many=len(spec.one_to_many))
    return ParseResult(spec=spec, instance=instance, diagnostics=diagnostics)


def parse_file(path: Union[str, Path]) -> ParseResult:
    """Read and parse a UTF-8 DSL file; spans carry the file's path.

    Raises:
        OSError: If the file cannot be read.
    """
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), file=str(path))
