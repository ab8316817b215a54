"""Exception types raised by the laboratory."""


class NonFiniteError(ValueError):
    """A field contains NaN or Inf samples."""


class VacuumError(ValueError):
    """The density drops below the vacuum threshold."""


class WindingError(ValueError):
    """A wave function winds around a torus cycle, so no periodic phase exists."""


class ResolutionError(ValueError):
    """A field is not resolved by the grid (spectrum does not decay)."""


class InversionError(RuntimeError):
    """A torus map could not be inverted."""
