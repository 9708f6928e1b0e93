"""Exception hierarchy shared by all modules."""


class OpertoneError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(OpertoneError, ValueError):
    """Malformed matrix or argument (non-square, non-finite, not Hermitian)."""


class EigenError(OpertoneError):
    """Eigendecomposition failed to converge or violated its residual contract."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DomainError(OpertoneError, ValueError):
    """A point or spectrum lies outside the analyticity region of a function."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class PreconditionError(OpertoneError):
    """Neither the strip nor the half-plane hypothesis holds for (X, f)."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class GeometryError(OpertoneError):
    """No admissible contour can be placed around the spectrum."""


class AccuracyError(OpertoneError):
    """Quadrature hit its node cap before reaching the requested tolerance."""

    def __init__(self, message, cauchy_difference=None):
        super().__init__(message)
        self.cauchy_difference = cauchy_difference


class SpecSyntaxError(OpertoneError, ValueError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SpecConstraintError(OpertoneError, ValueError):
    def __init__(self, message, field):
        super().__init__(f"{field}: {message}")
        self.field = field


class SamplerError(OpertoneError):
    """Rejection sampling exhausted its retry budget."""


class CampaignError(OpertoneError):
    """Too many per-trial engine failures in a verification campaign."""
