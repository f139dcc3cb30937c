"""Exception types. Every error carries a short diagnostic code."""


class FinslerError(Exception):
    code = "E_GENERIC"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self):
        return f"{self.code}: {super().__str__()}"


class DimensionError(FinslerError, ValueError):
    code = "E_DIMENSION"


class DomainError(FinslerError, ValueError):
    """A vector lies outside the subspace an inner product is defined on."""

    code = "E_DOMAIN"


class ValidationError(FinslerError, ValueError):
    """A structural invariant (Jacobi, SPD, norm bound, ...) is violated."""

    code = "E_VALIDATION"


class DegenerateDirection(FinslerError, ValueError):
    """Raised where a direction must be nonzero (``y = 0`` or ``X_m = 0``)."""

    code = "E_DEGENERATE"


class ModelError(FinslerError, ValueError):
    """Model-file diagnostic. Syntax problems use ``E_SYNTAX``; semantic ones
    keep the code of the underlying check (``E_X_NORM``, ``E_NOT_SPD``, ...)."""

    code = "E_SYNTAX"

    def __init__(self, message, line=0, column=0, code=None):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}", code)
