"""Count bounds for generated component kinds."""
from src.bounds.propagation import (
    BoundsMap, PropagationResult, ProvenanceStep, RejectCertificate, propagate,
)
from src.bounds.steps import binary_bound_step, one_to_many_bound_step, update_bounds

__all__ = [
    "BoundsMap",
    "PropagationResult",
    "ProvenanceStep",
    "RejectCertificate",
    "binary_bound_step",
    "one_to_many_bound_step",
    "propagate",
    "update_bounds",
]
