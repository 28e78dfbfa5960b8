from typing import Optional


class LocoError(Exception):
    """Base exception for configuration-logic errors.

    Every error carries a stable ``code`` so the CLI and tests can match on it
    without parsing messages.
    """

    code = "LOCO_ERROR"

    def __init__(self, message: str, code: Optional[str] = None) -> None:
        super().__init__(message)
        if code is not None:
            self.code = code


class UnknownKindError(LocoError):
    """Raised when an operation names a component kind the spec does not declare."""

    code = "UNKNOWN_KIND"


class MissingBothAssignmentError(LocoError):
    """Raised when a kind of class both has no input/generated assignment."""

    code = "MISSING_BOTH_ASSIGNMENT"


class ContractError(LocoError):
    """Raised when an operation is called outside its precondition."""

    code = "CONTRACT"


class PropagationFuelError(LocoError):
    """Raised when bound propagation exceeds its step budget."""

    code = "PROPAGATION_FUEL"
