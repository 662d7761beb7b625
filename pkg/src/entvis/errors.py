"""Exception types shared across the package."""


class ZeroState(ValueError):
    """Every amplitude is numerically zero, so no direction can be defined."""


class NotNormalized(ValueError):
    """A state or coefficient vector deviates from unit norm beyond tolerance."""


class ParseError(ValueError):
    """A state document is malformed or violates the file schema."""


class InsufficientShots(ValueError):
    """Too few measurement repetitions for the requested estimate."""
