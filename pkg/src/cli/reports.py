"""Structured documents and text renderings of pipeline results."""
import hashlib
import json
from typing import Any, Dict, Iterable, List, Sequence, Set, Tuple

from src.bounds.propagation import BoundsMap, RejectCertificate
from src.cli.schemas import (
    BOUNDS_REPORT_SCHEMA, REJECT_REPORT_SCHEMA, SOLUTION_SCHEMA, validate_document,
)
from src.dsl.serializer import serialize
from src.model.types import Configuration, InstanceSpec, ProblemSpec
from src.utils.formatting import (
    format_bounds_table, format_counts, format_vector, style,
)


def spec_hash(spec: ProblemSpec, inst: InstanceSpec) -> str:
    """SHA-256 of the canonical serialization."""
    return hashlib.sha256(serialize(spec, inst).encode("utf-8")).hexdigest()


def dump_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def _bound_entries(spec: ProblemSpec, bounds: BoundsMap, with_class: bool) -> List[Dict[str, Any]]:
    entries = []
    for kind in spec.kind_names:
        bound = bounds[kind]
        entry: Dict[str, Any] = {"kind": kind, "lb": bound.lb, "ub": bound.ub}
        if with_class:
            entry["class"] = bounds.classes[kind].value
        entries.append(entry)
    return entries


def bounds_report(spec: ProblemSpec, inst: InstanceSpec, bounds: BoundsMap) -> Dict[str, Any]:
    document = {
        "spec_hash": spec_hash(spec, inst),
        "verdict": "accept",
        "bounds": _bound_entries(spec, bounds, with_class=True),
    }
    validate_document(document, BOUNDS_REPORT_SCHEMA)
    return document


def reject_report(spec: ProblemSpec, inst: InstanceSpec, cert: RejectCertificate) -> Dict[str, Any]:
    document = {
        "spec_hash": spec_hash(spec, inst),
        "verdict": "reject",
        "certificate": cert.to_dict(),
    }
    validate_document(document, REJECT_REPORT_SCHEMA)
    return document


def solution_document(spec: ProblemSpec, inst: InstanceSpec, bounds: BoundsMap,
                      configurations: Sequence[Configuration]) -> Dict[str, Any]:
    """The ``solve`` output: spec hash, bounds and every configuration."""
    document = {
        "spec_hash": spec_hash(spec, inst),
        "bounds": _bound_entries(spec, bounds, with_class=False),
        "configurations": [config.to_dict(spec) for config in configurations],
    }
    validate_document(document, SOLUTION_SCHEMA)
    return document


def bounds_table(spec: ProblemSpec, bounds: BoundsMap, color: bool = False) -> List[str]:
    return format_bounds_table(((kind, str(bounds[kind])) for kind in spec.kind_names), color)


def certificate_lines(cert: RejectCertificate, color: bool = False) -> List[str]:
    """The rejection and the bound contributions that led to it."""
    header = style("REJECT", "red", "bold", enabled=color)
    lines = [f"{header} {cert.kind}: lb {cert.lb} > ub {cert.ub}"]
    lines.extend(f"  {step.source} -> {step.target} {step.bound}" for step in cert.provenance)
    return lines


def oracle_lines(generated: Sequence[str], vectors: Set[Tuple[int, ...]]) -> List[str]:
    """Per-kind projections of the feasible vectors, then the vectors themselves."""
    if not vectors:
        return []
    ordered: Iterable[Tuple[int, ...]] = sorted(vectors)
    lines = [
        f"{kind}: {format_counts({v[i] for v in vectors})}" for i, kind in enumerate(generated)
    ]
    lines.extend(format_vector(v) for v in ordered)
    return lines

