"""Semantic admissibility of specs and instances."""
from src.validator.admissibility import (
    LevelMapping, check_zero_lower_bound_rule, compute_level_mapping, is_level_mapping,
)
from src.validator.classes import effective_classes
from src.validator.instance import validate_instance
from src.validator.pipeline import check_admissibility

__all__ = [
    "LevelMapping",
    "check_admissibility",
    "check_zero_lower_bound_rule",
    "compute_level_mapping",
    "effective_classes",
    "is_level_mapping",
    "validate_instance",
]
