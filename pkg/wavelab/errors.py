"""Typed errors raised across the wavelab layers.

Every error derives from :class:`WaveLabError` and from the builtin exception
closest to its meaning, so callers may catch either.
"""

from __future__ import annotations


class WaveLabError(Exception):
    """Base class for all wavelab errors."""


# ---------------------------------------------------------------------------
# Numerical layer
# ---------------------------------------------------------------------------


class PoleAtZeroMean(WaveLabError, ValueError):
    """A multiplier singular at ξ=0 was applied to a field with nonzero mean."""


class IndexOutOfRange(WaveLabError, IndexError):
    """A dyadic block index outside the grid's range was requested."""


class GridMismatch(WaveLabError, ValueError):
    """Two operands live on different grids."""


class NotHolomorphic(WaveLabError, ValueError):
    """Values handed to a HoloField carry positive-frequency or mean content."""


class UnsupportedRho(WaveLabError, ValueError):
    """Symbolic calculus requested at a regularity the calculus does not implement."""


class InsufficientRange(WaveLabError, ValueError):
    """Fewer than three usable packet frequencies for a slope fit."""


class DegenerateSurface(WaveLabError, RuntimeError):
    """|1 + W_α| dropped below the degeneracy threshold."""

    def __init__(self, min_modulus: float, threshold: float) -> None:
        self.min_modulus = min_modulus
        self.threshold = threshold
        super().__init__(
            f"Surface parametrisation degenerated: inf|1+W_alpha| = {min_modulus:.3e} "
            f"is below the threshold {threshold:g}."
        )


class NewtonNoConvergence(WaveLabError, RuntimeError):
    """Newton inversion of the flattening map failed to converge."""

    def __init__(self, iterations: int, residual: float) -> None:
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Newton inversion did not converge after {iterations} iterations "
            f"(residual {residual:.3e})."
        )


# ---------------------------------------------------------------------------
# Configuration and I/O
# ---------------------------------------------------------------------------


class ConfigError(WaveLabError, ValueError):
    """Base class for configuration problems; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(message)


class ParseError(ConfigError):
    """The configuration text is not valid JSON, or an override is malformed."""


class SchemaError(ConfigError):
    """Unknown key or wrongly typed value."""


class RangeError(ConfigError):
    """A value lies outside its admissible range."""


class IoError(WaveLabError, OSError):
    """A report, series or checkpoint could not be read or written."""
