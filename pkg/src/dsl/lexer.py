"""Tokenizer for the configuration DSL, built on ply.lex."""
from dataclasses import dataclass
from typing import List, Optional, Union

import structlog
from ply import lex

from src.model.diagnostics import Diagnostic, SourceSpan

logger = structlog.get_logger(__name__)

reserved = {
    "type": "TYPE",
    "component": "COMPONENT",
    "class": "CLASS",
    "input": "INPUT",
    "generated": "GENERATED",
    "both": "BOTH",
    "attributes": "ATTRIBUTES",
    "catalogue": "CATALOGUE",
    "connect": "CONNECT",
    "forward": "FORWARD",
    "backward": "BACKWARD",
    "where": "WHERE",
    "inclusive": "INCLUSIVE",
    "exclusive": "EXCLUSIVE",
    "instance": "INSTANCE",
    "require": "REQUIRE",
    "assert": "ASSERT",
    "deny": "DENY",
    "sum": "SUM",
    "left": "LEFT",
    "right": "RIGHT",
    "and": "AND",
    "or": "OR",
}


@dataclass(frozen=True)
class Token:
    type: str
    value: Union[str, int]
    span: SourceSpan


class LocoLexer:
    """Turns source text into a list of tokens plus LEX_ERROR diagnostics."""

    tokens = [
        "CONNECT_OTM",  # connect-one-to-many
        "IDENT",
        "INT",
        "ARROW",        # ->
        "NEQ",          # !=
        "LE",           # <=
        "GE",           # >=
        "LT",
        "GT",
        "EQ",
        "PLUS",
        "MINUS",
        "STAR",
        "COMMA",
        "SEMI",
        "COLON",
        "DOT",
        "LPAREN",
        "RPAREN",
        "LBRACKET",
        "RBRACKET",
        "LBRACE",
        "RBRACE",
        "UNDERSCORE",
    ] + list(reserved.values())

    t_ignore = " \t\r"
    t_ignore_COMMENT = r"\#[^\n]*"

    t_ARROW = r"->"
    t_NEQ = r"!="
    t_LE = r"<="
    t_GE = r">="
    t_LT = r"<"
    t_GT = r">"
    t_EQ = r"="
    t_PLUS = r"\+"
    t_MINUS = r"-"
    t_STAR = r"\*"
    t_COMMA = r","
    t_SEMI = r";"
    t_COLON = r":"
    t_DOT = r"\."
    t_LPAREN = r"\("
    t_RPAREN = r"\)"
    t_LBRACKET = r"\["
    t_RBRACKET = r"\]"
    t_LBRACE = r"\{"
    t_RBRACE = r"\}"

    def __init__(self, file: str = "<string>") -> None:
        self.file = file
        self.diagnostics: List[Diagnostic] = []
        self._text = ""
        self.lexer = lex.lex(module=self, errorlog=lex.NullLogger())

    # Function rules match in definition order, so the hyphenated keyword
    # has to come before IDENT.
    def t_CONNECT_OTM(self, t):
        r"connect-one-to-many(?![A-Za-z0-9_])"
        return t

    def t_IDENT(self, t):
        r"[A-Za-z_][A-Za-z0-9_]*"
        if t.value == "_":
            t.type = "UNDERSCORE"
        else:
            t.type = reserved.get(t.value, "IDENT")
        return t

    def t_INT(self, t):
        r"[0-9]+"
        t.value = int(t.value)
        return t

    def t_newline(self, t):
        r"\n+"
        t.lexer.lineno += len(t.value)

    def t_error(self, t):
        bad = t.value[0]
        self.diagnostics.append(Diagnostic(
            code="LEX_ERROR",
            message=f"unexpected character {bad!r}",
            span=self._span(t.lexer.lineno, t.lexpos, 1),
        ))
        t.lexer.skip(1)

    def _column(self, lexpos: int) -> int:
        line_start = self._text.rfind("\n", 0, lexpos) + 1
        return lexpos - line_start + 1

    def _span(self, line: int, lexpos: int, length: int) -> SourceSpan:
        return SourceSpan(self.file, line, self._column(lexpos), max(1, length))

    def tokenize(self, text: str) -> List[Token]:
        """Tokenize ``text``; lexical errors are collected in ``self.diagnostics``."""
        self._text = text
        self.diagnostics = []
        self.lexer.lineno = 1
        self.lexer.input(text)
        result: List[Token] = []
        while True:
            tok: Optional[lex.LexToken] = self.lexer.token()
            if tok is None:
                break
            span = self._span(tok.lineno, tok.lexpos, len(str(tok.value)))
            result.append(Token(tok.type, tok.value, span))
        logger.debug("Tokenized source", file=self.file, tokens=len(result),
                     errors=len(self.diagnostics))
        return result
