"""Discrete Fourier backbone for wavelab.

Holds the periodic grid, the field containers, the holomorphic projections,
Fourier multipliers and the linear dispersion operators. Everything above this
layer works either with :class:`ComplexField` objects or, in hot loops, with
plain ndarrays through :class:`SpectralOps`.

Transforms use the ``norm="forward"`` convention: a coefficient is the grid
mean of ``f·exp(-iξα)``, so the zero coefficient is the mean of ``f``.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING, Callable, Union

import numpy as np
import scipy.fft as sfft

from wavelab.errors import GridMismatch, NotHolomorphic, PoleAtZeroMean

if TYPE_CHECKING:
    from wavelab.waterwave import PhysParams

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------

DEFAULT_DEALIAS: float = 2.0 / 3.0

_HOLO_TOL: float = 1e-10
_POLE_TOL: float = 1e-12
_THREADS_ENV: str = "WAVE_LAB_THREADS"

Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``WAVE_LAB_THREADS`` (default 1)."""
    raw = os.environ.get(_THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on one period with its signed wavenumber set (fft order)."""

    n_points: int
    period: float = 2.0 * np.pi

    def __post_init__(self) -> None:
        n = self.n_points
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValueError(f"n_points must be an integer, got {n!r}.")
        if n < 4 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 4, got {n}.")
        if not float(self.period) > 0.0:
            raise ValueError(f"period must be positive, got {self.period!r}.")
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "period", float(self.period))

    @property
    def dx(self) -> float:
        return self.period / self.n_points

    @property
    def fundamental(self) -> float:
        """Smallest nonzero wavenumber 2π/period."""
        return 2.0 * np.pi / self.period

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dx

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers m, with wavenumber ξ = m·2π/period."""
        return np.rint(np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)).astype(int)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return self.modes * self.fundamental

    @cached_property
    def holo_mask(self) -> np.ndarray:
        """Strictly negative modes, Nyquist excluded."""
        return (self.modes < 0) & (self.modes != -self.nyquist_index)

    @cached_property
    def antiholo_mask(self) -> np.ndarray:
        return self.modes > 0

    def cutoff_mode(self, rule: float = DEFAULT_DEALIAS) -> int:
        """Largest retained |m| under the given truncation fraction."""
        if not 0.0 < rule <= 1.0:
            raise ValueError(f"dealias rule must lie in (0, 1], got {rule!r}.")
        return min(int(np.floor(rule * self.n_points / 2 + 1e-12)), self.nyquist_index - 1)

    def dealias_mask(self, rule: float = DEFAULT_DEALIAS) -> np.ndarray:
        return np.abs(self.modes) <= self.cutoff_mode(rule)

    def mode_index(self, m: int) -> int:
        """Array position of integer mode *m*."""
        if abs(m) > self.nyquist_index:
            raise IndexError(f"mode {m} is not resolved on {self.n_points} points.")
        return m % self.n_points

    def forward(self, values: np.ndarray) -> np.ndarray:
        return sfft.fft(values, norm="forward", workers=fft_workers())

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return sfft.ifft(coeffs, norm="forward", workers=fft_workers())

    def integrate(self, values: np.ndarray) -> complex:
        """Trapezoid quadrature over one period (spectrally exact)."""
        return complex(self.period * np.mean(values))

    def check_same(self, other: "PeriodicGrid") -> None:
        if self != other:
            raise GridMismatch(f"Grid mismatch: {self} vs {other}.")


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples on a grid, stored as normalized Fourier coefficients."""

    grid: PeriodicGrid
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coefficients, dtype=complex)
        if coeffs.shape != (self.grid.n_points,):
            raise ValueError(
                f"Expected {self.grid.n_points} coefficients, got shape {coeffs.shape}."
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_values(cls, grid: PeriodicGrid, values: np.ndarray) -> "ComplexField":
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n_points,):
            raise ValueError(f"Expected {grid.n_points} samples, got shape {values.shape}.")
        return cls(grid, grid.forward(values))

    @classmethod
    def from_function(
        cls, grid: PeriodicGrid, fn: Callable[[np.ndarray], np.ndarray]
    ) -> "ComplexField":
        return cls.from_values(grid, fn(grid.nodes))

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> "ComplexField":
        return cls(grid, np.zeros(grid.n_points, dtype=complex))

    # -- views --------------------------------------------------------------

    @cached_property
    def values(self) -> np.ndarray:
        vals = self.grid.inverse(self.coefficients)
        vals.setflags(write=False)
        return vals

    @property
    def mean(self) -> complex:
        return complex(self.coefficients[0])

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.period * np.sum(np.abs(self.coefficients) ** 2)))

    def coefficient(self, m: int) -> complex:
        """Coefficient of integer mode *m*."""
        return complex(self.coefficients[self.grid.mode_index(m)])

    # -- algebra ------------------------------------------------------------

    def conj(self) -> ComplexField:
        c = self.coefficients
        return ComplexField(self.grid, np.conj(c[(-np.arange(c.size)) % c.size]))

    def real(self) -> ComplexField:
        return (self + self.conj()) * 0.5

    def imag(self) -> ComplexField:
        return (self - self.conj()) * (-0.5j)

    def _coeffs_of(self, other: ComplexField) -> np.ndarray:
        self.grid.check_same(other.grid)
        return other.coefficients

    def __add__(self, other: object) -> ComplexField:
        if isinstance(other, ComplexField):
            return ComplexField(self.grid, self.coefficients + self._coeffs_of(other))
        return NotImplemented

    def __sub__(self, other: object) -> ComplexField:
        if isinstance(other, ComplexField):
            return ComplexField(self.grid, self.coefficients - self._coeffs_of(other))
        return NotImplemented

    def __neg__(self) -> ComplexField:
        return ComplexField(self.grid, -self.coefficients)

    def __mul__(self, other: object) -> ComplexField:
        """Scalar scaling, or the pointwise (undealiased) product of two fields."""
        if isinstance(other, ComplexField):
            self.grid.check_same(other.grid)
            return ComplexField.from_values(self.grid, self.values * other.values)
        if np.isscalar(other):
            return ComplexField(self.grid, self.coefficients * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> ComplexField:
        if np.isscalar(other):
            return ComplexField(self.grid, self.coefficients / other)
        return NotImplemented


class HoloField(ComplexField):
    """Field supported on strictly negative wavenumbers (zero mean, no Nyquist).

    Construction validates the support within a relative tolerance and then
    stores the cleaned coefficients, so the invariant holds exactly.
    """

    def __post_init__(self) -> None:
        super().__post_init__()
        coeffs = np.array(self.coefficients)
        keep = self.grid.holo_mask
        leak = np.abs(coeffs[~keep])
        scale = max(1.0, float(np.max(np.abs(coeffs), initial=0.0)))
        if leak.size and float(leak.max()) > _HOLO_TOL * scale:
            raise NotHolomorphic(
                f"Field has non-holomorphic content of size {leak.max():.3e}; "
                "use project_holo to project it first."
            )
        coeffs[~keep] = 0.0
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_values(cls, grid: PeriodicGrid, values: np.ndarray) -> "HoloField":
        return cls(grid, grid.forward(np.asarray(values, dtype=complex)))


# ---------------------------------------------------------------------------
# Projections and multipliers
# ---------------------------------------------------------------------------


def project_holo(f: ComplexField) -> HoloField:
    """𝐏 with the zero mode removed: keeps ξ<0 only."""
    return HoloField(f.grid, np.where(f.grid.holo_mask, f.coefficients, 0.0))


def project_antiholo(f: ComplexField) -> ComplexField:
    """𝐏̄ with the zero mode removed: keeps ξ>0 only."""
    return ComplexField(f.grid, np.where(f.grid.antiholo_mask, f.coefficients, 0.0))


def hilbert(f: ComplexField) -> ComplexField:
    """Hilbert transform, multiplier −i·sgn(ξ) (zero at ξ=0 and at Nyquist)."""
    sgn = np.sign(f.grid.modes).astype(float)
    sgn[f.grid.nyquist_index] = 0.0
    return ComplexField(f.grid, f.coefficients * (-1j * sgn))


def derivative(order: int = 1) -> Callable[[np.ndarray], np.ndarray]:
    return lambda xi: (1j * xi) ** order


def antiderivative() -> Callable[[np.ndarray], np.ndarray]:
    return lambda xi: 1.0 / (1j * xi)


def abs_power(s: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda xi: np.abs(xi) ** s


def sign() -> Callable[[np.ndarray], np.ndarray]:
    return np.sign


def _sample_multiplier(grid: PeriodicGrid, m: Multiplier) -> np.ndarray:
    if callable(m):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            factors = np.asarray(m(grid.wavenumbers), dtype=complex)
    else:
        factors = np.asarray(m, dtype=complex)
    return np.broadcast_to(factors, (grid.n_points,)).copy()


def apply_multiplier(f: ComplexField, m: Multiplier) -> ComplexField:
    """Coefficient-wise product with m(ξ); Nyquist is zeroed.

    Raises
    ------
    PoleAtZeroMean
        If m is singular at ξ=0 and *f* has a nonzero mean.
    """
    factors = _sample_multiplier(f.grid, m)
    if not np.isfinite(factors[0]):
        scale = max(1.0, float(np.max(np.abs(f.coefficients))))
        if abs(f.coefficients[0]) > _POLE_TOL * scale:
            raise PoleAtZeroMean(
                f"Multiplier is singular at xi=0 but the field has mean {f.mean:.3e}."
            )
        factors[0] = 0.0
    factors[f.grid.nyquist_index] = 0.0
    return ComplexField(f.grid, f.coefficients * factors)


def dealias(f: ComplexField, rule: float = DEFAULT_DEALIAS) -> ComplexField:
    """Zero every coefficient with |m| above rule × Nyquist (Nyquist always)."""
    return ComplexField(f.grid, np.where(f.grid.dealias_mask(rule), f.coefficients, 0.0))


# ---------------------------------------------------------------------------
# Linear dispersion
# ---------------------------------------------------------------------------


def _ell(params: "PhysParams", xi: np.ndarray) -> np.ndarray:
    a = np.abs(xi)
    return np.sqrt(params.sigma * a**3 + params.g * a + 0.25 * params.gamma**2)


def dispersion_weight(
    params: "PhysParams", which: str = "L"
) -> Callable[[np.ndarray], np.ndarray]:
    """Multiplier ℓ(ξ) = √(σ|ξ|³ + g|ξ| + γ²/4) (``"L"``) or ℓ(ξ)/|ξ| (``"M"``).

    The ``"M"`` multiplier has a pole at ξ=0; :func:`apply_multiplier` raises
    :class:`PoleAtZeroMean` on fields with nonzero mean.
    """
    if which == "L":
        return lambda xi: _ell(params, np.asarray(xi, dtype=float))
    if which == "M":
        return lambda xi: _ell(params, np.asarray(xi, dtype=float)) / np.abs(xi)
    raise ValueError(f"which must be 'L' or 'M', got {which!r}.")


def dispersion_weight_dxi(params: "PhysParams") -> Callable[[np.ndarray], np.ndarray]:
    """Closed-form ∂_ξ ℓ(ξ) = (3σξ|ξ| + g·sgn ξ) / (2ℓ(ξ))."""

    def dell(xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return (3.0 * params.sigma * xi * np.abs(xi) + params.g * np.sign(xi)) / (
            2.0 * _ell(params, xi)
        )

    return dell


def dispersion_roots(params: "PhysParams", xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The two roots −γ/2 ± ℓ(ξ) of τ² + γτ + gξ + σξ³ = 0 (ξ ≤ 0)."""
    ell = _ell(params, np.asarray(xi, dtype=float))
    return -0.5 * params.gamma + ell, -0.5 * params.gamma - ell


# ---------------------------------------------------------------------------
# SpectralOps
# ---------------------------------------------------------------------------


class SpectralOps:
    """Grid-bound ndarray kernels used inside the nonlinear right-hand sides.

    ``holo``/``antiholo`` implement the literal projections ½(I ∓ iH): the zero
    mode is split in halves so that ``holo(u) + antiholo(u)`` equals the
    dealiased ``u`` exactly. Both also apply the dealiasing mask.
    """

    def __init__(self, grid: PeriodicGrid, dealias_rule: float = DEFAULT_DEALIAS) -> None:
        self.grid = grid
        self.dealias_rule = dealias_rule
        keep = grid.dealias_mask(dealias_rule)
        self.keep: np.ndarray = keep.astype(float)

        modes = grid.modes
        self._holo = np.where(keep & (modes < 0), 1.0, 0.0)
        self._holo[0] = 0.5
        self._antiholo = np.where(keep & (modes > 0), 1.0, 0.0)
        self._antiholo[0] = 0.5
        self._closure = np.where((modes <= 0) & (modes != -grid.nyquist_index), 1.0, 0.0)

        ik = 1j * grid.wavenumbers
        ik[grid.nyquist_index] = 0.0
        self.ik: np.ndarray = ik
        inv = np.zeros_like(ik)
        nonzero = np.abs(ik) > 0
        inv[nonzero] = 1.0 / ik[nonzero]
        self.inv_ik: np.ndarray = inv

    # -- transforms ---------------------------------------------------------

    def fft(self, u: np.ndarray) -> np.ndarray:
        return self.grid.forward(u)

    def ifft(self, c: np.ndarray) -> np.ndarray:
        return self.grid.inverse(c)

    # -- projections --------------------------------------------------------

    def holo(self, u: np.ndarray) -> np.ndarray:
        return self.ifft(self.fft(u) * self._holo)

    def antiholo(self, u: np.ndarray) -> np.ndarray:
        return self.ifft(self.fft(u) * self._antiholo)

    def dealias(self, u: np.ndarray) -> np.ndarray:
        return self.ifft(self.fft(u) * self.keep)

    def reproject(self, u: np.ndarray) -> np.ndarray:
        """Drop positive modes and Nyquist; the zero mode and the band are untouched."""
        return self.ifft(self.fft(u) * self._closure)

    # -- calculus -----------------------------------------------------------

    def dx(self, u: np.ndarray) -> np.ndarray:
        return self.ifft(self.fft(u) * self.ik)

    def antiderivative(self, u: np.ndarray) -> np.ndarray:
        """Zero-mean primitive; the mean of *u* is discarded."""
        return self.ifft(self.fft(u) * self.inv_ik)

    def integrate(self, u: np.ndarray) -> complex:
        return self.grid.integrate(u)


@lru_cache(maxsize=32)
def spectral_ops(grid: PeriodicGrid, dealias_rule: float = DEFAULT_DEALIAS) -> SpectralOps:
    """Shared :class:`SpectralOps` per (grid, rule); instances are read-only."""
    logger.debug("Building spectral kernels for n=%d rule=%.4f", grid.n_points, dealias_rule)
    return SpectralOps(grid, dealias_rule)
