"""The ``check`` stage: every admissibility condition in one call."""
from typing import List

import structlog

from src.model.diagnostics import Diagnostic, has_errors
from src.model.types import InstanceSpec, ProblemSpec
from src.model.wellformed import well_formed
from src.validator.admissibility import (
    check_zero_lower_bound_rule, compute_level_mapping, level_diagnostics,
)
from src.validator.instance import validate_instance

logger = structlog.get_logger(__name__)


def check_admissibility(spec: ProblemSpec, inst: InstanceSpec) -> List[Diagnostic]:
    """Run well_formed, the zero-lower-bound rule, the level mapping and instance checks.

    Later stages assume a well-formed spec, so structural errors stop the run
    before them.
    """
    diagnostics = well_formed(spec)
    if has_errors(diagnostics):
        logger.info("Specification is not well-formed", errors=len(diagnostics))
        return diagnostics
    diagnostics.extend(check_zero_lower_bound_rule(spec))
    diagnostics.extend(level_diagnostics(spec, compute_level_mapping(spec)))
    diagnostics.extend(validate_instance(spec, inst))
    logger.info("Admissibility checked", diagnostics=len(diagnostics),
                admissible=not has_errors(diagnostics))
    return diagnostics
