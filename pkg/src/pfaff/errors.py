"""Exception types shared across the engine."""


class PfaffError(Exception):
    """Base class for every error raised by this package."""


class ParseError(PfaffError):
    """Malformed DSL input.  Carries the offending position."""

    def __init__(self, message, line, column, expected=None):
        self.line = line
        self.column = column
        self.expected = expected
        detail = f"{message} at line {line}, column {column}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class UnknownIdentifierError(ParseError):
    """Identifier not declared as a variable, scalar, or function."""

    def __init__(self, name, line, column):
        self.name = name
        super().__init__(f"unknown identifier '{name}'", line, column)


class UnboundVariableError(PfaffError):
    """Evaluation point does not bind every free symbol."""


class DomainError(PfaffError):
    """Evaluation hit a singularity (division by zero, log of zero, ...)."""


class VarietyMismatchError(PfaffError):
    """Operands live on different varieties."""


class VarietyDimensionError(PfaffError):
    """Operation requires a specific number of base variables."""


class DegreeError(PfaffError):
    """Form has the wrong degree for this operation."""


class NotAntisymmetricError(PfaffError):
    """Matrix fails the antisymmetry tolerance."""


class SizeUnsupportedError(PfaffError):
    """Matrix size or mode count outside the supported range."""


class NotPTD3Error(PfaffError):
    """The spinor combination experiment needs a Pfaff dimension 3 action."""


class DecompositionFailure(PfaffError):
    """Work 1-form does not split as -dP plus fluctuation terms."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class UnknownExampleError(PfaffError):
    """Requested example name is not registered."""

    def __init__(self, name, suggestions=()):
        self.name = name
        self.suggestions = tuple(suggestions)
        msg = f"unknown example '{name}'"
        if self.suggestions:
            msg += "; did you mean: " + ", ".join(self.suggestions)
        super().__init__(msg)


class EngineInvariantError(PfaffError):
    """An identity the engine guarantees by construction failed; a bug."""
