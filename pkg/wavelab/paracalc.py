"""Executable paradifferential calculus on a periodic grid.

A :class:`Symbol` is a callable ``a(α, ξ)`` sampled on the grid's nodes for a
vector of wavenumbers. ``T_a`` is assembled as a dense kernel acting on
Fourier coefficients::

    (T_a u)^(η + θ) = Σ_η χ(θ, η) â(θ, η) ψ(η) û(η)

with θ wrapped modulo the grid, so that pointwise products on the grid and the
paraproduct pieces share the same aliasing and the balanced remainder closes
exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Iterable, Optional, Union

import numpy as np
import scipy.fft as sfft

from wavelab.errors import InsufficientRange, UnsupportedRho
from wavelab.littlewood_paley import decomposition_for, smooth_step
from wavelab.spectral import ComplexField, PeriodicGrid, fft_workers

logger = logging.getLogger(__name__)

SymbolFn = Callable[[np.ndarray], np.ndarray]
FieldOp = Callable[[ComplexField], ComplexField]

_COMPOSE_RHOS: tuple[float, ...] = (1.0, 1.5, 2.0)
_ADJOINT_RHOS: tuple[float, ...] = (1.0, 1.5)
_FD_REL_STEP: float = 1e-4

DEFAULT_TRUNCATION_OFFSET: int = 3
DEFAULT_PROBE_FLOOR: float = 1e-9

# ---------------------------------------------------------------------------
# Cutoffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cutoffs:
    """Low-high cutoff χ(θ, η) and high-pass ψ(η).

    χ = 1 for |θ| ≤ ε₁(1+|η|), χ = 0 for |θ| ≥ ε₂(1+|η|);
    ψ = 0 for |η| ≤ 1/5, ψ = 1 for |η| ≥ 1/4.
    """

    eps1: float = 0.1
    eps2: float = 0.3
    psi_low: float = 0.2
    psi_high: float = 0.25

    def __post_init__(self) -> None:
        if not 0.0 < self.eps1 < self.eps2 < 1.0:
            raise ValueError(
                f"cutoffs need 0 < eps1 < eps2 < 1, got eps1={self.eps1}, eps2={self.eps2}."
            )

    def chi(self, theta: np.ndarray, eta: np.ndarray) -> np.ndarray:
        ratio = np.abs(theta) / (1.0 + np.abs(eta))
        return 1.0 - smooth_step((ratio - self.eps1) / (self.eps2 - self.eps1))

    def psi(self, eta: np.ndarray) -> np.ndarray:
        return smooth_step(
            (np.abs(np.asarray(eta, dtype=float)) - self.psi_low) / (self.psi_high - self.psi_low)
        )


DEFAULT_CUTOFFS = Cutoffs()

# ---------------------------------------------------------------------------
# Symbol
# ---------------------------------------------------------------------------


def _fd_step(xi: np.ndarray) -> np.ndarray:
    a = np.abs(xi)
    return np.minimum(_FD_REL_STEP * np.maximum(1.0, a), 0.25 * np.where(a > 0, a, 1.0))


@dataclass(frozen=True, eq=False)
class Symbol:
    """A symbol a(α, ξ) of declared order and regularity.

    ``fn`` maps a 1-D array of wavenumbers to samples of shape
    (n_points, len(xi)) (or anything broadcastable to it). ``dxi_fn`` is an
    optional closed form of ∂_ξ a; otherwise ξ-derivatives use central finite
    differences with a step proportional to |ξ|.
    """

    grid: PeriodicGrid
    order: float
    regularity: float
    fn: SymbolFn
    dxi_fn: Optional[SymbolFn] = None
    label: str = ""

    # -- constructors -------------------------------------------------------

    @classmethod
    def multiplier(
        cls,
        grid: PeriodicGrid,
        m: Callable[[np.ndarray], np.ndarray],
        order: float,
        dm: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        label: str = "",
    ) -> "Symbol":
        """ξ-only symbol m(ξ)."""
        dxi = (lambda xi: np.asarray(dm(xi))[None, :]) if dm is not None else None
        return cls(grid, order, np.inf, lambda xi: np.asarray(m(xi))[None, :], dxi, label)

    @classmethod
    def coefficient(
        cls,
        grid: PeriodicGrid,
        values: Union[ComplexField, np.ndarray],
        regularity: float = np.inf,
        label: str = "",
    ) -> "Symbol":
        """α-only symbol of order 0."""
        if isinstance(values, ComplexField):
            grid.check_same(values.grid)
            values = values.values
        col = np.asarray(values, dtype=complex).reshape(-1, 1).copy()
        return cls(
            grid,
            0.0,
            regularity,
            lambda xi: col,
            lambda xi: np.zeros((1, np.size(xi))),
            label,
        )

    @classmethod
    def zero(cls, grid: PeriodicGrid, order: float = 0.0) -> "Symbol":
        return cls(grid, order, np.inf, lambda xi: np.zeros((1, np.size(xi))),
                   lambda xi: np.zeros((1, np.size(xi))), "0")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, xi: Union[float, np.ndarray]) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.asarray(self.fn(xi), dtype=complex)
        return np.array(np.broadcast_to(out, (self.grid.n_points, xi.size)))

    # -- derivatives --------------------------------------------------------

    def dxi(self, k: int = 1) -> "Symbol":
        """∂_ξ^k a (closed form when available, central differences otherwise)."""
        if k == 0:
            return self
        if self.dxi_fn is not None:
            first = Symbol(self.grid, self.order - 1, self.regularity, self.dxi_fn, None,
                           f"dxi({self.label})")
        else:
            fn = self.fn

            def fd(xi: np.ndarray) -> np.ndarray:
                h = _fd_step(xi)
                return (np.asarray(fn(xi + h)) - np.asarray(fn(xi - h))) / (2.0 * h)

            first = Symbol(self.grid, self.order - 1, self.regularity, fd, None,
                           f"dxi({self.label})")
        return first.dxi(k - 1)

    def dalpha(self, k: int = 1) -> "Symbol":
        """∂_α^k a, spectrally along the grid."""
        if k == 0:
            return self
        ik = 1j * self.grid.wavenumbers
        ik[self.grid.nyquist_index] = 0.0
        factor = (ik**k)[:, None]

        def lift(f: Optional[SymbolFn]) -> Optional[SymbolFn]:
            if f is None:
                return None

            def g(xi: np.ndarray) -> np.ndarray:
                samples = np.broadcast_to(
                    np.asarray(f(xi), dtype=complex), (self.grid.n_points, np.size(xi))
                )
                coeffs = sfft.fft(samples, axis=0, norm="forward", workers=fft_workers())
                return sfft.ifft(coeffs * factor, axis=0, norm="forward", workers=fft_workers())

            return g

        return Symbol(self.grid, self.order, self.regularity - k, lift(self.fn),
                      lift(self.dxi_fn), f"dalpha^{k}({self.label})")

    def conj(self) -> "Symbol":
        fn, dfn = self.fn, self.dxi_fn
        return Symbol(
            self.grid,
            self.order,
            self.regularity,
            lambda xi: np.conj(fn(xi)),
            (lambda xi: np.conj(dfn(xi))) if dfn is not None else None,
            f"conj({self.label})",
        )

    def power(self, p: float) -> "Symbol":
        """a^p (principal branch), order scaled by p."""
        fn, dfn = self.fn, self.dxi_fn

        def dpow(xi: np.ndarray) -> np.ndarray:
            base = np.asarray(fn(xi), dtype=complex)
            return p * base ** (p - 1.0) * np.asarray(dfn(xi))

        return Symbol(
            self.grid,
            self.order * p,
            self.regularity,
            lambda xi: np.asarray(fn(xi), dtype=complex) ** p,
            dpow if dfn is not None else None,
            f"({self.label})^{p:g}",
        )

    # -- algebra ------------------------------------------------------------

    def _combine(self, other: "Symbol", op: str) -> "Symbol":
        self.grid.check_same(other.grid)
        f, g = self.fn, other.fn
        df, dg = self.dxi_fn, other.dxi_fn
        both = df is not None and dg is not None
        reg = min(self.regularity, other.regularity)
        if op == "+":
            return Symbol(self.grid, max(self.order, other.order), reg,
                          lambda xi: np.asarray(f(xi)) + np.asarray(g(xi)),
                          (lambda xi: np.asarray(df(xi)) + np.asarray(dg(xi))) if both else None,
                          f"{self.label}+{other.label}")
        if op == "-":
            return Symbol(self.grid, max(self.order, other.order), reg,
                          lambda xi: np.asarray(f(xi)) - np.asarray(g(xi)),
                          (lambda xi: np.asarray(df(xi)) - np.asarray(dg(xi))) if both else None,
                          f"{self.label}-{other.label}")
        return Symbol(
            self.grid,
            self.order + other.order,
            reg,
            lambda xi: np.asarray(f(xi)) * np.asarray(g(xi)),
            (lambda xi: np.asarray(df(xi)) * np.asarray(g(xi))
             + np.asarray(f(xi)) * np.asarray(dg(xi))) if both else None,
            f"({self.label})*({other.label})",
        )

    def scale(self, c: complex) -> "Symbol":
        f, df = self.fn, self.dxi_fn
        return Symbol(self.grid, self.order, self.regularity,
                      lambda xi: c * np.asarray(f(xi)),
                      (lambda xi: c * np.asarray(df(xi))) if df is not None else None,
                      f"{c}*{self.label}")

    def __add__(self, other: object) -> "Symbol":
        if isinstance(other, Symbol):
            return self._combine(other, "+")
        return NotImplemented

    def __sub__(self, other: object) -> "Symbol":
        if isinstance(other, Symbol):
            return self._combine(other, "-")
        return NotImplemented

    def __mul__(self, other: object) -> "Symbol":
        if isinstance(other, Symbol):
            return self._combine(other, "*")
        if np.isscalar(other):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self) -> "Symbol":
        return self.scale(-1.0)


# ---------------------------------------------------------------------------
# Paradifferential operators
# ---------------------------------------------------------------------------


def paradiff_matrix(a: Symbol, cutoffs: Cutoffs = DEFAULT_CUTOFFS) -> np.ndarray:
    """Dense kernel K with (T_a u)^ = K @ û on normalized coefficients."""
    grid = a.grid
    n = grid.n_points
    xi = grid.wavenumbers
    psi = cutoffs.psi(xi)
    psi[grid.nyquist_index] = 0.0
    active = psi > 0.0

    samples = np.zeros((n, n), dtype=complex)
    if np.any(active):
        samples[:, active] = a(xi[active])
    ahat = sfft.fft(samples, axis=0, norm="forward", workers=fft_workers())

    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    theta_idx = (rows - cols) % n
    chi = cutoffs.chi(xi[theta_idx], xi[None, :])
    return chi * ahat[theta_idx, cols] * psi[None, :]


def paradiff_apply(
    a: Symbol, u: ComplexField, cutoffs: Cutoffs = DEFAULT_CUTOFFS
) -> ComplexField:
    """T_a u."""
    a.grid.check_same(u.grid)
    return ComplexField(u.grid, paradiff_matrix(a, cutoffs) @ u.coefficients)


def paradiff_adjoint_apply(
    a: Symbol, u: ComplexField, cutoffs: Cutoffs = DEFAULT_CUTOFFS
) -> ComplexField:
    """(T_a)* u with respect to the L² pairing."""
    a.grid.check_same(u.grid)
    return ComplexField(u.grid, paradiff_matrix(a, cutoffs).conj().T @ u.coefficients)


def _truncated_paraproduct(a: ComplexField, u: ComplexField, offset: int) -> ComplexField:
    dec = decomposition_for(a.grid)
    a_blocks = dec.block_values(a)
    u_blocks = dec.block_values(u)
    low = np.cumsum(a_blocks, axis=0)
    out = np.zeros(a.grid.n_points, dtype=complex)
    for k in range(offset, dec.max_index + 1):
        out += low[k - offset] * u_blocks[k]
    return ComplexField.from_values(a.grid, out)


def paraproduct(
    a: ComplexField,
    u: ComplexField,
    variant: str = "standard",
    *,
    cutoffs: Cutoffs = DEFAULT_CUTOFFS,
    offset: int = DEFAULT_TRUNCATION_OFFSET,
) -> ComplexField:
    """Low-high paraproduct T_a u.

    ``variant="truncated"`` gives Ṫ_a u = Σ_k (Σ_{j ≤ k-N} P_j a)·P_k u with
    offset N.
    """
    a.grid.check_same(u.grid)
    if variant == "standard":
        return paradiff_apply(Symbol.coefficient(a.grid, a), u, cutoffs)
    if variant == "truncated":
        return _truncated_paraproduct(a, u, offset)
    raise ValueError(f"variant must be 'standard' or 'truncated', got {variant!r}.")


def balanced_pi(
    a: ComplexField, u: ComplexField, cutoffs: Cutoffs = DEFAULT_CUTOFFS
) -> ComplexField:
    """Π(a, u) = au − T_a u − T_u a, with the undealiased grid product."""
    a.grid.check_same(u.grid)
    return a * u - paraproduct(a, u, cutoffs=cutoffs) - paraproduct(u, a, cutoffs=cutoffs)


def reality_defect(a: Symbol, u: ComplexField, cutoffs: Cutoffs = DEFAULT_CUTOFFS) -> float:
    """‖Re(T_a u) − T_a(Re u)‖_{L²}; vanishes for real symbols even in ξ."""
    k = paradiff_matrix(a, cutoffs)
    lhs = ComplexField(u.grid, k @ u.coefficients).real()
    rhs = ComplexField(u.grid, k @ u.real().coefficients)
    return (lhs - rhs).l2_norm()


# ---------------------------------------------------------------------------
# Symbolic calculus
# ---------------------------------------------------------------------------


def symbol_compose(a: Symbol, b: Symbol, rho: float) -> Symbol:
    """a♯b = Σ_{j<ρ} ((−i)^j / j!) ∂_ξ^j a · ∂_α^j b."""
    if not any(np.isclose(rho, r) for r in _COMPOSE_RHOS):
        raise UnsupportedRho(f"composition implemented for rho in {_COMPOSE_RHOS}, got {rho}.")
    out = a * b
    j = 1
    while j < rho - 1e-12:
        out = out + (a.dxi(j) * b.dalpha(j)) * ((-1j) ** j / factorial(j))
        j += 1
    return Symbol(out.grid, a.order + b.order, min(a.regularity, b.regularity), out.fn,
                  out.dxi_fn, f"{a.label}#{b.label}")


def symbol_adjoint(a: Symbol, rho: float) -> Symbol:
    """a* = Σ_{j<ρ} (1 / (i^j j!)) ∂_ξ^j ∂_α^j ā."""
    if not any(np.isclose(rho, r) for r in _ADJOINT_RHOS):
        raise UnsupportedRho(f"adjoint implemented for rho in {_ADJOINT_RHOS}, got {rho}.")
    abar = a.conj()
    out = abar
    j = 1
    while j < rho - 1e-12:
        out = out + abar.dxi(j).dalpha(j) * (1.0 / (1j**j * factorial(j)))
        j += 1
    return Symbol(out.grid, a.order, a.regularity, out.fn, out.dxi_fn, f"{a.label}*")


def _column_zygmund(grid: PeriodicGrid, samples: np.ndarray, rho: float) -> np.ndarray:
    """C^ρ_* norm of every column of *samples* (shape n_points × m)."""
    dec = decomposition_for(grid)
    coeffs = sfft.fft(samples, axis=0, norm="forward", workers=fft_workers())
    best = np.zeros(samples.shape[1])
    for k in range(dec.max_index + 1):
        block = sfft.ifft(coeffs * dec.blocks[k][:, None], axis=0, norm="forward")
        best = np.maximum(best, 2.0 ** (k * rho) * np.abs(block).max(axis=0))
    return best


def seminorm(a: Symbol, m: float, rho: float) -> float:
    """M^m_ρ(a): sup over k ≤ 3/2+ρ and sampled |ξ| ≥ 1/2."""
    grid = a.grid
    xi = grid.wavenumbers
    xi = xi[(np.abs(xi) >= 0.5) & (np.arange(xi.size) != grid.nyquist_index)]
    best = 0.0
    for k in range(int(np.floor(1.5 + abs(rho))) + 1):
        samples = a.dxi(k)(xi)
        if rho == 0:
            norms = np.abs(samples).max(axis=0)
        else:
            norms = _column_zygmund(grid, samples, rho)
        best = max(best, float(np.max((1.0 + np.abs(xi)) ** (k - m) * norms)))
    return best


# ---------------------------------------------------------------------------
# Order probes
# ---------------------------------------------------------------------------


def wave_packet(grid: PeriodicGrid, k: int) -> ComplexField:
    """Unit-L² packet exp(cos α − 1)·e^{−i 2^k α} (α rescaled to the period)."""
    phase = grid.nodes * grid.fundamental
    values = np.exp(np.cos(phase) - 1.0) * np.exp(-1j * 2**k * phase)
    f = ComplexField.from_values(grid, values)
    return f / f.l2_norm()


def usable_levels(grid: PeriodicGrid, k_range: Iterable[int]) -> list[int]:
    return [k for k in k_range if k >= 0 and 2**k <= grid.n_points // 4]


def probe_norms(op: FieldOp, grid: PeriodicGrid, k_range: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
    """L² norms of op(u_k) for every usable packet level."""
    ks = usable_levels(grid, k_range)
    norms = np.array([op(wave_packet(grid, k)).l2_norm() for k in ks])
    return np.asarray(ks, dtype=float), norms


def fit_slope(ks: np.ndarray, norms: np.ndarray, floor: float = DEFAULT_PROBE_FLOOR) -> float:
    if len(ks) < 3:
        raise InsufficientRange(f"need at least 3 usable packet levels, got {len(ks)}.")
    return float(np.polyfit(ks, np.log2(np.maximum(norms, floor)), 1)[0])


def order_probe(
    op: FieldOp,
    k_range: Iterable[int],
    grid: PeriodicGrid,
    floor: float = DEFAULT_PROBE_FLOOR,
) -> float:
    """Least-squares slope of log₂‖op u_k‖ against k.

    Norms below *floor* (relative to the unit packets) are clipped, so an
    operator that vanishes up to roundoff reports a slope near zero.
    """
    ks, norms = probe_norms(op, grid, k_range)
    slope = fit_slope(ks, norms, floor)
    logger.debug("order probe over k=%s: norms=%s slope=%.3f", ks, norms, slope)
    return slope


@dataclass
class OperatorCache:
    """Memoized kernels for repeated application of the same symbols."""

    cutoffs: Cutoffs = DEFAULT_CUTOFFS
    _kernels: dict[int, np.ndarray] = field(default_factory=dict)

    def kernel(self, a: Symbol) -> np.ndarray:
        key = id(a)
        if key not in self._kernels:
            self._kernels[key] = paradiff_matrix(a, self.cutoffs)
        return self._kernels[key]

    def apply(self, a: Symbol, u: ComplexField) -> ComplexField:
        return ComplexField(u.grid, self.kernel(a) @ u.coefficients)
