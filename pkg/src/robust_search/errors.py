"""Exception types shared across the package."""


class SearchError(Exception):
    """Base class for errors raised by robust_search."""


class DimensionError(SearchError, ValueError):
    """Operands disagree on dimension, or a dimension is not a power of two."""


class CapabilityError(SearchError):
    """Requested size exceeds what a dense representation supports."""


class DegenerateError(SearchError, ValueError):
    """The oracle acts trivially on the initial state, so no search direction exists."""


class DivergenceError(SearchError, ValueError):
    """A predicted quantity has a vanishing denominator."""


class ConfigError(SearchError, ValueError):
    """Invalid experiment configuration. ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
