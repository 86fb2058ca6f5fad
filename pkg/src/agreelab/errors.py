"""Exception types shared across the package."""


class AgreeLabError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(AgreeLabError):
    """Shapes, sizes, or indices do not line up."""


class NegativeMass(AgreeLabError):
    """A probability entry is negative beyond tolerance."""


class NotNormalized(AgreeLabError):
    """Total probability mass is not 1 within tolerance."""


class EmptyAxes(AgreeLabError):
    """A marginal was requested over an empty set of axes."""


class ZeroProbabilityConditioning(AgreeLabError):
    """Conditioning set has no prior mass, so the posterior is undefined."""


class ZeroMassCell(AgreeLabError):
    """A partition cell carries no prior mass."""


class InvalidState(AgreeLabError):
    """An ontic state index is out of range."""


class ParameterOutOfRange(AgreeLabError):
    """A scenario parameter violates its admissible range."""


class BadWeights(AgreeLabError):
    """Mixture weights are negative or do not sum to 1."""


class NoConvergence(AgreeLabError):
    """An iterative protocol exceeded its round budget."""


class ParseError(AgreeLabError):
    """Scenario text could not be parsed."""


class ValidationError(AgreeLabError):
    """Scenario or model content is structurally invalid.

    `field` locates the offending entry when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
