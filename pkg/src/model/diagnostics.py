from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional


class Severity(Enum):
    """Diagnostic severity."""
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    """A 1-based location in a source file."""
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


# Closed set of codes, grouped by the stage that emits them.
PARSE_CODES = frozenset({
    "LEX_ERROR", "SYNTAX_ERROR", "SYNTAX_EMPTY", "UNRESOLVED_REF",
    "DUPLICATE_NAME", "CARD_ORDER", "CARD_UPPER", "CARD_UNBOUNDED",
    "UNKNOWN_AGGREGATE",
})

WELL_FORMED_CODES = frozenset({
    "UNKNOWN_REF", "DUPLICATE_NAME", "EMPTY_TYPE", "DUPLICATE_VALUE",
    "CARD_ORDER", "CARD_UPPER", "CARD_UNBOUNDED", "SELF_LOOP_DIRECTIONS",
    "DUPLICATE_CONNECTION", "OTM_SELF_MEMBER", "OTM_TOO_FEW", "OTM_LOWER",
    "OTM_MISSING_BINARY", "CATALOGUE_EMPTY", "CATALOGUE_ARITY",
    "CATALOGUE_VALUE", "DUPLICATE_ROW", "EXPR_TYPE", "AGGREGATE_POSITION",
    "AGGREGATE_SIDE", "MIXED_AGGREGATE", "NO_INPUT_KIND", "EXPR_VALUE",
})

VALIDATOR_CODES = frozenset({
    "MISSING_BOTH_ASSIGNMENT", "ZERO_LB_RULE", "UNLEVELED", "NO_INPUT",
    "LITERAL_CONFLICT", "UNKNOWN_REF", "MISSING_DOMAIN", "DOMAIN_NOT_INPUT",
    "DUPLICATE_ID", "ATOM_BINDING",
})

ALL_CODES = PARSE_CODES | WELL_FORMED_CODES | VALIDATOR_CODES


@dataclass(frozen=True)
class Diagnostic:
    """A single finding about a spec, located when the entity has a span."""
    code: str
    message: str
    severity: Severity = Severity.ERROR
    span: Optional[SourceSpan] = None
    entity: Optional[str] = None

    def __post_init__(self) -> None:
        if self.code not in ALL_CODES:
            raise ValueError(f"Undocumented diagnostic code: {self.code}")

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def render(self, file: Optional[str] = None) -> str:
        """Render as ``SEVERITY CODE file:line:col message``."""
        if self.span is not None:
            where = f"{file or self.span.file}:{self.span.line}:{self.span.column}"
        else:
            where = file or "<spec>"
        return f"{self.severity.value.upper()} {self.code} {where} {self.message}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "entity": self.entity,
            "line": self.span.line if self.span else None,
            "column": self.span.column if self.span else None,
            "message": self.message,
        }


def has_errors(diagnostics: "list[Diagnostic]") -> bool:
    return any(d.is_error for d in diagnostics)
