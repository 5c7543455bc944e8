"""Gravity-capillary water waves with constant vorticity in holomorphic coordinates.

Two equivalent formulations are evaluated here:

* the (W, Q) system, holomorphic position and velocity potential, which the
  time stepper integrates;
* the differentiated (𝐖, R) system with 𝐖 = W_α and R = Q_α/(1+W_α), which
  the reduction layer and the diagnostics work with.

Inside the nonlinear formulas the projections are the literal ½(I ∓ iH)
from :class:`~wavelab.spectral.SpectralOps`, so 𝐏 + 𝐏̄ is the identity on
the dealiased band. The mean of W is a physical offset of the surface and is
carried next to the zero-mean field as ``mean_W``; the mean of Q is a gauge
and is dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, fields
from typing import Union

import numpy as np

from wavelab.errors import DegenerateSurface
from wavelab.spectral import (
    DEFAULT_DEALIAS,
    ComplexField,
    HoloField,
    PeriodicGrid,
    SpectralOps,
    project_holo,
    spectral_ops,
)

logger = logging.getLogger(__name__)

DEGENERACY_THRESHOLD: float = 0.1

_IMAG_TOL: float = 1e-10

# ---------------------------------------------------------------------------
# Parameters and states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhysParams:
    """Gravity g ≥ 0, surface tension σ > 0 and constant vorticity γ."""

    g: float = 1.0
    sigma: float = 1.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not self.g >= 0.0:
            raise ValueError(f"gravity g must be >= 0, got {self.g}.")
        if not self.sigma > 0.0:
            raise ValueError(f"surface tension sigma must be > 0, got {self.sigma}.")
        if not np.isfinite(self.gamma):
            raise ValueError(f"vorticity gamma must be finite, got {self.gamma}.")


def _check_surface(one_plus_wa: np.ndarray) -> None:
    modulus = float(np.min(np.abs(one_plus_wa)))
    if modulus < DEGENERACY_THRESHOLD:
        raise DegenerateSurface(modulus, DEGENERACY_THRESHOLD)


def _primitive(grid: PeriodicGrid, coeffs: np.ndarray) -> HoloField:
    """Zero-mean holomorphic antiderivative."""
    out = np.zeros(grid.n_points, dtype=complex)
    mask = grid.holo_mask
    out[mask] = coeffs[mask] / (1j * grid.wavenumbers[mask])
    return HoloField(grid, out)


def _derivative(f: ComplexField) -> ComplexField:
    ik = 1j * f.grid.wavenumbers
    ik[f.grid.nyquist_index] = 0.0
    return ComplexField(f.grid, f.coefficients * ik)


@dataclass(frozen=True, eq=False)
class WaveState:
    """Holomorphic position W (plus its mean) and velocity potential Q at time t.

    Raises
    ------
    DegenerateSurface
        If inf |1 + W_α| < 0.1.
    """

    W: HoloField
    Q: HoloField
    params: PhysParams
    t: float = 0.0
    mean_W: complex = 0.0

    def __post_init__(self) -> None:
        self.W.grid.check_same(self.Q.grid)
        object.__setattr__(self, "mean_W", complex(self.mean_W))
        _check_surface(1.0 + _derivative(self.W).values)

    @property
    def grid(self) -> PeriodicGrid:
        return self.W.grid

    @classmethod
    def from_values(
        cls,
        grid: PeriodicGrid,
        w_values: np.ndarray,
        q_values: np.ndarray,
        params: PhysParams,
        t: float = 0.0,
    ) -> "WaveState":
        """Project arbitrary samples; the mean of W is kept, that of Q dropped."""
        w = ComplexField.from_values(grid, w_values)
        q = ComplexField.from_values(grid, q_values)
        return cls(project_holo(w), project_holo(q), params, t, w.mean)

    @classmethod
    def from_coefficients(
        cls,
        grid: PeriodicGrid,
        w_coeffs: np.ndarray,
        q_coeffs: np.ndarray,
        params: PhysParams,
        t: float = 0.0,
    ) -> "WaveState":
        w = ComplexField(grid, w_coeffs)
        return cls(project_holo(w), project_holo(ComplexField(grid, q_coeffs)), params, t, w.mean)

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """(Ŵ with mean_W at the zero mode, Q̂)."""
        w = np.array(self.W.coefficients)
        w[0] = self.mean_W
        return w, np.array(self.Q.coefficients)

    def full_W(self) -> ComplexField:
        w, _ = self.coefficients()
        return ComplexField(self.grid, w)

    def differentiate(self) -> "DiffState":
        """(𝐖, R) = (W_α, Q_α/(1+W_α))."""
        wa = project_holo(_derivative(self.W))
        qa = _derivative(self.Q).values
        r = ComplexField.from_values(self.grid, qa / (1.0 + wa.values))
        return DiffState(wa, project_holo(r), self.params, self.t, self.mean_W)


@dataclass(frozen=True, eq=False)
class DiffState:
    """Differentiated unknowns 𝐖 = W_α and R = Q_α/(1+W_α)."""

    Wa: HoloField
    R: HoloField
    params: PhysParams
    t: float = 0.0
    mean_W: complex = 0.0

    def __post_init__(self) -> None:
        self.Wa.grid.check_same(self.R.grid)
        object.__setattr__(self, "mean_W", complex(self.mean_W))
        _check_surface(1.0 + self.Wa.values)

    @property
    def grid(self) -> PeriodicGrid:
        return self.Wa.grid

    def primitive_W(self) -> ComplexField:
        """W = ∂⁻¹𝐖 + mean_W."""
        w = np.array(_primitive(self.grid, self.Wa.coefficients).coefficients)
        w[0] = self.mean_W
        return ComplexField(self.grid, w)

    def integrate(self) -> WaveState:
        """Inverse of :meth:`WaveState.differentiate` with zero-mean primitives."""
        grid = self.grid
        w = _primitive(grid, self.Wa.coefficients)
        qa = ComplexField.from_values(grid, self.R.values * (1.0 + self.Wa.values))
        q = _primitive(grid, qa.coefficients)
        return WaveState(w, q, self.params, self.t, self.mean_W)

    def differentiate(self) -> "DiffState":
        return self


AnyState = Union[WaveState, DiffState]

# ---------------------------------------------------------------------------
# Array-level formulas
# ---------------------------------------------------------------------------


def _wq_aux(o: SpectralOps, params: PhysParams, W: np.ndarray, Q: np.ndarray) -> dict[str, np.ndarray]:
    P = o.holo
    gamma = params.gamma
    Wa = o.dx(W)
    Qa = o.dx(Q)
    one = 1.0 + Wa
    _check_surface(one)
    J = np.abs(one) ** 2
    F = P((Qa - np.conj(Qa)) / J)
    F1 = P(W / np.conj(one) + np.conj(W) / one)
    T1 = P(W * np.conj(Qa) / np.conj(one) - np.conj(W) * Qa / one)
    return {
        "Wa": Wa,
        "Qa": Qa,
        "J": J,
        "F": F,
        "F1": F1,
        "F_gamma": F - 0.5j * gamma * F1,
        "T1": T1,
    }


def wq_tendency(
    o: SpectralOps, params: PhysParams, W: np.ndarray, Q: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Values of (W_t, Q_t); W includes its mean, Q_t's mean is removed.

    Raises
    ------
    DegenerateSurface
        If inf |1 + W_α| < 0.1.
    """
    P = o.holo
    g, sigma, gamma = params.g, params.sigma, params.gamma
    aux = _wq_aux(o, params, W, Q)
    Wa, Qa, J = aux["Wa"], aux["Qa"], aux["J"]
    one = 1.0 + Wa

    dW = -one * aux["F_gamma"] - 0.5j * gamma * W
    capillary = P(np.imag(o.dx(Wa) / (np.sqrt(J) * one)))
    dQ = (
        1j * g * W
        - aux["F_gamma"] * Qa
        - 1j * gamma * Q
        - P(np.abs(Qa) ** 2 / J)
        + 0.5j * gamma * aux["T1"]
        + 2.0 * sigma * capillary
    )
    dW = o.reproject(dW)
    dQ = o.reproject(dQ)
    return dW, dQ - np.mean(dQ)


def _wr_aux(
    o: SpectralOps, params: PhysParams, Wb: np.ndarray, R: np.ndarray, W: np.ndarray
) -> dict[str, np.ndarray]:
    P, Pb = o.holo, o.antiholo
    gamma = params.gamma
    one = 1.0 + Wb
    _check_surface(one)
    J = np.abs(one) ** 2
    Y = Wb / one
    Ra = o.dx(R)
    Ya = o.dx(Y)
    Rc, Wbc, Wc, Yc = np.conj(R), np.conj(Wb), np.conj(W), np.conj(Y)

    a = 1j * (Pb(Rc * Ra) - P(R * np.conj(Ra)))
    N = P(W * np.conj(Ra) - Wbc * R) + Pb(Wc * Ra - Wb * Rc)
    a1 = R + Rc - N
    b = P(R / np.conj(one)) + Pb(Rc / one)
    b1 = P(W / np.conj(one)) - Pb(Wc / one)
    M = Pb(Rc * Ya - Ra * Yc) + P(R * np.conj(Ya) - np.conj(Ra) * Y)
    M1 = o.dx(P(W * Yc)) - o.dx(Pb(Wc * Y))
    return {
        "J": J,
        "Y": Y,
        "Ra": Ra,
        "a": a,
        "a1": a1,
        "N": N,
        "a_gamma": a + 0.5 * gamma * a1,
        "b": b,
        "b1": b1,
        "b_gamma": b - 0.5j * gamma * b1,
        "M": M,
        "M1": M1,
        "M_gamma": M - 0.5j * gamma * M1,
    }


def wr_tendency(
    o: SpectralOps, params: PhysParams, Wb: np.ndarray, R: np.ndarray, W: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Values of (𝐖_t, R_t) for the differentiated system."""
    P = o.holo
    g, sigma, gamma = params.g, params.sigma, params.gamma
    aux = _wr_aux(o, params, Wb, R, W)
    one = 1.0 + Wb
    J, Ra, bu = aux["J"], aux["Ra"], aux["b_gamma"]
    Wba = o.dx(Wb)

    dWb = (
        -bu * Wba
        - one * Ra / np.conj(one)
        + one * aux["M_gamma"]
        + 0.5j * gamma * Wb * (Wb - np.conj(Wb))
    )
    capillary = o.dx(P(np.imag(Wba / (np.sqrt(J) * one))))
    dR = (
        -bu * Ra
        - 1j * gamma * R
        + 1j * (g * Wb - aux["a"]) / one
        + 2.0 * sigma * capillary / one
        + 0.5j * gamma * (R * Wb + np.conj(R) * Wb + aux["N"]) / one
    )
    return o.reproject(dWb), o.reproject(dR)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AuxBundle:
    """Auxiliary functions of one state; the ``*_gamma`` entries carry the vorticity corrections."""

    J: ComplexField
    Y: ComplexField
    F: ComplexField
    F1: ComplexField
    F_gamma: ComplexField
    T1: ComplexField
    a: ComplexField
    a1: ComplexField
    N: ComplexField
    a_gamma: ComplexField
    b: ComplexField
    b1: ComplexField
    b_gamma: ComplexField
    M: ComplexField
    M1: ComplexField
    M_gamma: ComplexField

    def max_imag(self, name: str) -> float:
        return float(np.max(np.abs(np.imag(getattr(self, name).values))))


def _ops(grid: PeriodicGrid, dealias_rule: float = DEFAULT_DEALIAS) -> SpectralOps:
    return spectral_ops(grid, dealias_rule)


def compute_aux(state: AnyState, dealias_rule: float = DEFAULT_DEALIAS) -> AuxBundle:
    """Every auxiliary function of *state*.

    Raises
    ------
    DegenerateSurface
        If inf |1 + 𝐖| < 0.1.
    """
    if isinstance(state, DiffState):
        diff, wave = state, state.integrate()
    else:
        wave, diff = state, state.differentiate()
    grid = wave.grid
    o = _ops(grid, dealias_rule)
    W = wave.full_W().values
    wq = _wq_aux(o, wave.params, W, wave.Q.values)
    wr = _wr_aux(o, diff.params, diff.Wa.values, diff.R.values, diff.primitive_W().values)
    merged = {**wq, **wr}
    values = {f.name: ComplexField.from_values(grid, merged[f.name]) for f in fields(AuxBundle)}
    return AuxBundle(**values)


def rhs_WQ(
    state: WaveState, dealias_rule: float = DEFAULT_DEALIAS
) -> tuple[ComplexField, ComplexField]:
    """(dW/dt, dQ/dt); dW/dt's zero mode is the tendency of ``mean_W``."""
    o = _ops(state.grid, dealias_rule)
    dW, dQ = wq_tendency(o, state.params, state.full_W().values, state.Q.values)
    return ComplexField.from_values(state.grid, dW), ComplexField.from_values(state.grid, dQ)


def rhs_WR(
    state: DiffState, dealias_rule: float = DEFAULT_DEALIAS
) -> tuple[ComplexField, ComplexField]:
    """(d𝐖/dt, dR/dt)."""
    o = _ops(state.grid, dealias_rule)
    dWb, dR = wr_tendency(
        o, state.params, state.Wa.values, state.R.values, state.primitive_W().values
    )
    return ComplexField.from_values(state.grid, dWb), ComplexField.from_values(state.grid, dR)


def linear_operator(params: PhysParams, xi: np.ndarray) -> np.ndarray:
    """Per-mode 2×2 generator A(ξ) of the linearized system, shape (len(xi), 2, 2)."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(xi.shape + (2, 2), dtype=complex)
    out[..., 0, 1] = -1j * xi
    out[..., 1, 0] = 1j * (params.g + params.sigma * xi**2)
    out[..., 1, 1] = -1j * params.gamma
    return out


def rhs_linear(state: WaveState) -> tuple[ComplexField, ComplexField]:
    """(−q_α, −iγq + igw − iσw_αα) on the zero-mean fields."""
    p = state.params
    xi = state.grid.wavenumbers
    w, q = state.W.coefficients, state.Q.coefficients
    dw = -1j * xi * q
    dq = -1j * p.gamma * q + 1j * (p.g + p.sigma * xi**2) * w
    return ComplexField(state.grid, dw), ComplexField(state.grid, dq)


def conserved(state: WaveState) -> tuple[float, float]:
    """Energy 𝓔 and horizontal momentum 𝓟, by spectrally exact quadrature."""
    grid = state.grid
    p = state.params
    o = _ops(grid)
    W = state.full_W().values
    Q = state.Q.values
    Wa = o.dx(W)
    Qa = o.dx(Q)
    one = 1.0 + Wa
    absW2 = np.abs(W) ** 2

    # Real by Parseval; the pointwise integrand is not.
    kinetic = _real_integral("Kinetic energy", grid.integrate(-1j * Q * np.conj(Qa)))
    potential = (
        4.0 * p.sigma * (np.abs(one) - 1.0 - np.real(Wa))
        + np.real(
            p.g * absW2 * one
            + p.gamma * Qa * np.imag(W) ** 2
            - (p.gamma**2 / 2j) * absW2 * W * one
        )
    )
    momentum = (
        -1j * (Q * np.conj(Wa) - np.conj(Q) * Wa)
        - p.gamma * absW2
        + 0.5 * p.gamma * (W**2 * np.conj(Wa) + np.conj(W) ** 2 * Wa)
    )
    energy = kinetic + float(grid.integrate(potential).real)
    return energy, _real_integral("Momentum", grid.integrate(momentum))


def _real_integral(name: str, value: complex) -> float:
    """Real part of *value*, warning when the imaginary part is not roundoff."""
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > _IMAG_TOL * scale:
        logger.warning("%s integral has imaginary part %.3e", name, value.imag)
    return float(value.real)


def linear_energy(w: ComplexField, q: ComplexField, sigma: float, g: float = 0.0) -> float:
    """σ‖w‖²_{Ḣ¹} + ‖q‖²_{Ḣ^{1/2}} (+ g‖w‖²_{L²})."""
    w.grid.check_same(q.grid)
    xi = w.grid.wavenumbers
    wc2 = np.abs(w.coefficients) ** 2
    total = np.sum((sigma * xi**2 + g) * wc2 + np.abs(xi) * np.abs(q.coefficients) ** 2)
    return float(w.grid.period * total)


def ubalpha_residual(state: DiffState, dealias_rule: float = DEFAULT_DEALIAS) -> float:
    """sup |b̲_α − (R_α/(1+𝐖̄) + R̄_α/(1+𝐖) − i(γ/2)(𝐖−𝐖̄) − M̲)|."""
    o = _ops(state.grid, dealias_rule)
    Wb, R = state.Wa.values, state.R.values
    aux = _wr_aux(o, state.params, Wb, R, state.primitive_W().values)
    one = 1.0 + Wb
    Ra = aux["Ra"]
    lhs = o.dx(aux["b_gamma"])
    rhs = (
        o.dealias(Ra / np.conj(one) + np.conj(Ra) / one)
        - 0.5j * state.params.gamma * (Wb - np.conj(Wb))
        - aux["M_gamma"]
    )
    return float(np.max(np.abs(lhs - rhs)))


def holo_defect(W: ComplexField, Q: ComplexField) -> float:
    """Positive-frequency (and Nyquist) L² mass of (W, Q) relative to the total."""
    W.grid.check_same(Q.grid)
    bad = ~(W.grid.modes <= 0) | (W.grid.modes == -W.grid.nyquist_index)
    total = np.sum(np.abs(W.coefficients) ** 2) + np.sum(np.abs(Q.coefficients) ** 2)
    if total == 0.0:
        return 0.0
    leak = np.sum(np.abs(W.coefficients[bad]) ** 2) + np.sum(np.abs(Q.coefficients[bad]) ** 2)
    return float(np.sqrt(leak / total))
