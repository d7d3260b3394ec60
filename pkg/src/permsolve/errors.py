"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class PermsolveError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(PermsolveError):
    """A caller-supplied parameter violates a documented precondition."""


class DimensionMismatchError(InvalidParameterError):
    """Operands have incompatible shapes (M, N or L disagree)."""


class GuardViolationError(PermsolveError):
    """An instance exceeds a combinatorial feasibility guard (e.g. (N!)^(L-1))."""


class ContractError(PermsolveError):
    """A numeric or data contract was violated at runtime."""


class DocumentError(ContractError):
    """A serialized document is malformed; carries a location when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UndefinedSNRError(ContractError):
    """SNR requested against an all-zero reference matrix."""


class InternalContradictionError(ContractError):
    """A mathematically guaranteed step failed; indicates a bug or bad input."""
