"""JSON Schemas for the documents the CLI writes."""
from typing import Any, Dict

import jsonschema

from src.model.errors import LocoError

_UPPER = {"type": ["integer", "null"], "minimum": 0}
_HASH = {"type": "string", "pattern": "^[0-9a-f]{64}$"}

BOUND_ENTRY_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["kind", "lb", "ub"],
    "properties": {
        "kind": {"type": "string"},
        "lb": {"type": "integer", "minimum": 0},
        "ub": _UPPER,
        "class": {"enum": ["input", "generated"]},
    },
    "additionalProperties": False,
}

BOUNDS_REPORT_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Bounds report",
    "type": "object",
    "required": ["spec_hash", "verdict", "bounds"],
    "properties": {
        "spec_hash": _HASH,
        "verdict": {"const": "accept"},
        "bounds": {
            "type": "array",
            "items": {**BOUND_ENTRY_SCHEMA, "required": ["kind", "lb", "ub", "class"]},
        },
    },
    "additionalProperties": False,
}

REJECT_REPORT_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Bounds rejection",
    "type": "object",
    "required": ["spec_hash", "verdict", "certificate"],
    "properties": {
        "spec_hash": _HASH,
        "verdict": {"const": "reject"},
        "certificate": {
            "type": "object",
            "required": ["kind", "lb", "ub", "provenance"],
            "properties": {
                "kind": {"type": "string"},
                "lb": {"type": "integer"},
                "ub": {"type": "integer"},
                "provenance": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["source", "target", "lb", "ub"],
                        "properties": {
                            "source": {"type": "string"},
                            "target": {"type": "string"},
                            "lb": {"type": "integer", "minimum": 0},
                            "ub": _UPPER,
                        },
                        "additionalProperties": False,
                    },
                },
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

SOLUTION_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Solution document",
    "type": "object",
    "required": ["spec_hash", "bounds", "configurations"],
    "properties": {
        "spec_hash": _HASH,
        "bounds": {"type": "array", "items": BOUND_ENTRY_SCHEMA},
        "configurations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["instances", "edges"],
                "properties": {
                    "instances": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "required": ["id", "attrs"],
                                "properties": {
                                    "id": {"type": "string"},
                                    "attrs": {
                                        "type": "object",
                                        "additionalProperties": {"type": ["integer", "string"]},
                                    },
                                },
                                "additionalProperties": False,
                            },
                        },
                    },
                    "edges": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "items": {"type": "string"},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


class SchemaViolationError(LocoError):
    """Raised when a document about to be written does not match its schema."""

    code = "SCHEMA_VIOLATION"


def validate_document(document: Dict[str, Any], schema: Dict[str, Any]) -> None:
    """Validate ``document`` against ``schema``.

    Raises:
        SchemaViolationError: If the document does not conform.
    """
    try:
        jsonschema.validate(instance=document, schema=schema)
    except jsonschema.ValidationError as e:
        raise SchemaViolationError(f"{schema.get('title', 'document')}: {e.message}") from e
