"""Textual DSL: lexer, parser and canonical serializer."""
from src.dsl.parser import ParseResult, parse, parse_file
from src.dsl.serializer import format_expr, serialize

__all__ = ["ParseResult", "parse", "parse_file", "serialize", "format_expr"]
