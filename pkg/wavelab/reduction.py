"""Reduction of the differentiated system to a single paradifferential equation.

The pipeline goes state → Wahlén variables (η, ζ) → symbols λ, k of the
paralinearized system → symmetrizers p, q, c → scalar unknown Φ → elliptic
weight ℘, plus the flattening change of variable that makes the leading
dispersive coefficient constant. Every step is an evaluable object so the
order claims can be checked on wave packets.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from wavelab.errors import NewtonNoConvergence
from wavelab.paracalc import (
    DEFAULT_CUTOFFS,
    Cutoffs,
    OperatorCache,
    Symbol,
    fit_slope,
    paradiff_apply,
    probe_norms,
    wave_packet,
)
from wavelab.spectral import (
    DEFAULT_DEALIAS,
    ComplexField,
    HoloField,
    PeriodicGrid,
    dispersion_weight,
    dispersion_weight_dxi,
    project_holo,
    spectral_ops,
)
from wavelab.waterwave import DiffState, PhysParams, _primitive, _wr_aux, rhs_WR, wr_tendency

logger = logging.getLogger(__name__)

NEWTON_MAX_ITER: int = 50
NEWTON_TOL: float = 1e-13

DECLARED_ORDERS: dict[str, float] = {
    "ell": 1.5,
    "c": 0.0,
    "q": 0.0,
    "p_half": 0.5,
    "p_minus_half": -0.5,
}

# ---------------------------------------------------------------------------
# Symbol builders
# ---------------------------------------------------------------------------


def _coef(grid: PeriodicGrid, values: np.ndarray, label: str) -> Symbol:
    return Symbol.coefficient(grid, np.asarray(values, dtype=complex), label=label)


def _xi(grid: PeriodicGrid, power: int = 1) -> Symbol:
    return Symbol.multiplier(
        grid,
        lambda xi: xi.astype(complex) ** power,
        float(power),
        dm=lambda xi: power * xi.astype(complex) ** (power - 1),
        label=f"xi^{power}",
    )


def _inv_xi(grid: PeriodicGrid) -> Symbol:
    def inv(xi: np.ndarray) -> np.ndarray:
        safe = np.where(xi == 0, 1.0, xi)
        return np.where(xi == 0, 0.0, 1.0 / safe).astype(complex)

    return Symbol.multiplier(grid, inv, -1.0, dm=lambda xi: -inv(xi) ** 2, label="1/xi")


def _ell(grid: PeriodicGrid, params: PhysParams) -> Symbol:
    return Symbol.multiplier(
        grid,
        dispersion_weight(params, "L"),
        1.5,
        dm=dispersion_weight_dxi(params),
        label="ell",
    )


def _with_order(a: Symbol, order: float, label: str) -> Symbol:
    return Symbol(a.grid, order, a.regularity, a.fn, a.dxi_fn, label)


# ---------------------------------------------------------------------------
# Wahlén variables
# ---------------------------------------------------------------------------


def wahlen(state: DiffState) -> tuple[HoloField, HoloField]:
    """(η, ζ) = (𝐖, R − iγW/2), with W the zero-mean primitive of 𝐖."""
    w = _primitive(state.grid, state.Wa.coefficients)
    zeta = state.R - w * (0.5j * state.params.gamma)
    return state.Wa, project_holo(zeta)


def unwahlen(
    eta: HoloField, zeta: HoloField, params: PhysParams, t: float = 0.0, mean_W: complex = 0.0
) -> DiffState:
    """Inverse of :func:`wahlen`."""
    w = _primitive(eta.grid, eta.coefficients)
    r = zeta + w * (0.5j * params.gamma)
    return DiffState(eta, project_holo(r), params, t, mean_W)


# ---------------------------------------------------------------------------
# Symbols of the paralinearized system
# ---------------------------------------------------------------------------


def _surface(state: DiffState) -> dict[str, np.ndarray]:
    o = spectral_ops(state.grid)
    wb = state.Wa.values
    one = 1.0 + wb
    J = np.abs(one) ** 2
    Y = wb / one
    A = (1.0 - np.conj(Y)) * one
    return {"Wb": wb, "one": one, "J": J, "Y": Y, "A": A, "A_a": o.dx(A), "Wb_a": o.dx(wb)}


def symbols_lambda_k(state: DiffState) -> tuple[Symbol, Symbol]:
    """λ (order 1) and k (order 2) of the paralinearized (η, ζ) system."""
    grid, p = state.grid, state.params
    s = _surface(state)
    J_half = np.sqrt(s["J"])
    one_minus_y = 1.0 - s["Y"]

    lam = _coef(grid, 1j * s["A"], "iA") * _xi(grid) + _coef(grid, s["A_a"], "A_a")
    lam = _with_order(lam, 1.0, "lambda")

    k2 = _coef(grid, -1j * p.sigma * one_minus_y**2 / J_half, "k2") * _xi(grid, 2)
    k1 = _coef(grid, 3.0 * p.sigma * one_minus_y**3 * s["Wb_a"] / J_half, "k1") * _xi(grid)
    k0 = _coef(grid, np.full(grid.n_points, -1j * p.g), "-ig")
    kk = k2 + k1 + k0
    if p.gamma != 0.0:
        kk = kk + _inv_xi(grid) * (0.25j * p.gamma**2)
    return lam, _with_order(kk, 2.0, "k")


# ---------------------------------------------------------------------------
# Symmetrizers
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymmetrizerSet:
    """ℓ, c = J^{-3/4}, q = J^{1/4}, p = p^{(1/2)} + p^{(-1/2)} on one state."""

    state: DiffState
    ell: Symbol
    c: Symbol
    q: Symbol
    p_half: Symbol
    p_minus_half: Symbol

    @property
    def grid(self) -> PeriodicGrid:
        return self.state.grid

    @cached_property
    def p(self) -> Symbol:
        return _with_order(self.p_half + self.p_minus_half, 0.5, "p")

    def by_name(self, name: str) -> Symbol:
        return getattr(self, name)


def build_symmetrizers(state: DiffState, params: Optional[PhysParams] = None) -> SymmetrizerSet:
    """Assemble the symmetrizers; q^{(-1)} is normalized to zero."""
    params = params or state.params
    grid = state.grid
    o = spectral_ops(grid)
    s = _surface(state)
    J = s["J"]
    one_minus_y = 1.0 - s["Y"]
    one_bar = np.conj(s["one"])

    ell = _ell(grid, params)
    c_vals = J ** (-0.75)
    q_vals = J**0.25
    c = _coef(grid, c_vals, "c")
    q = _coef(grid, q_vals, "q")

    lead = _coef(grid, -one_minus_y * one_bar / np.sqrt(J), "p_lead")
    p_half = _with_order(lead * (_inv_xi(grid) * ell), 0.5, "p_half")

    dell = ell.dxi()
    c_a = _coef(grid, o.dx(c_vals), "c_a")
    q_a = _coef(grid, o.dx(q_vals), "q_a")
    A_a = _coef(grid, s["A_a"], "A_a")
    inner = (
        dell * c_a * q * 0.5j
        + c * dell * q_a * 1j
        + p_half.dxi() * A_a * _xi(grid) * 1j
        + p_half * A_a * 1j
    )
    prefactor = _coef(grid, one_bar * one_minus_y, "p_pre") * _inv_xi(grid)
    p_minus_half = _with_order(prefactor * inner, -0.5, "p_minus_half")

    return SymmetrizerSet(state, ell, c, q, p_half, p_minus_half)


def _sqrt_ell_multiplier(grid: PeriodicGrid, params: PhysParams) -> np.ndarray:
    m = np.sqrt(dispersion_weight(params, "L")(grid.wavenumbers)).astype(complex)
    m[grid.nyquist_index] = 0.0
    return m


@dataclass
class _Relations:
    """Dense kernels of both equivalence relations on one state."""

    sym: SymmetrizerSet
    lam: Symbol
    k: Symbol
    cutoffs: Cutoffs = DEFAULT_CUTOFFS
    cache: OperatorCache = field(init=False)
    half: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.cache = OperatorCache(self.cutoffs)
        self.half = _sqrt_ell_multiplier(self.sym.grid, self.sym.state.params)

    def _lcl(self, u: ComplexField) -> ComplexField:
        v = ComplexField(u.grid, u.coefficients * self.half)
        v = self.cache.apply(self.sym.c, v)
        return ComplexField(u.grid, v.coefficients * self.half)

    def first(self, u: ComplexField) -> ComplexField:
        """i T_p T_λ u − L^{1/2} T_c L^{1/2} T_q u."""
        left = self.cache.apply(self.sym.p, self.cache.apply(self.lam, u)) * 1j
        return left - self._lcl(self.cache.apply(self.sym.q, u))

    def second(self, u: ComplexField) -> ComplexField:
        """i T_q T_k u − L^{1/2} T_c L^{1/2} T_p u."""
        left = self.cache.apply(self.sym.q, self.cache.apply(self.k, u)) * 1j
        return left - self._lcl(self.cache.apply(self.sym.p, u))


def relation_operators(
    state: DiffState, sym: Optional[SymmetrizerSet] = None, cutoffs: Cutoffs = DEFAULT_CUTOFFS
) -> _Relations:
    sym = sym or build_symmetrizers(state)
    lam, k = symbols_lambda_k(state)
    return _Relations(sym, lam, k, cutoffs)


def equivalence_residual(
    state: DiffState,
    which: str,
    k_range: Iterable[int],
    sym: Optional[SymmetrizerSet] = None,
    cutoffs: Cutoffs = DEFAULT_CUTOFFS,
) -> float:
    """Fitted growth order of the residual of one equivalence relation.

    Raises
    ------
    InsufficientRange
        If fewer than three packet levels fit on the grid.
    """
    if which not in ("first", "second"):
        raise ValueError(f"which must be 'first' or 'second', got {which!r}.")
    rel = relation_operators(state, sym, cutoffs)
    op = rel.first if which == "first" else rel.second
    ks, norms = probe_norms(op, state.grid, k_range)
    slope = fit_slope(ks, norms)
    logger.info("equivalence relation %s: norms=%s slope=%.3f", which, norms, slope)
    return slope


# ---------------------------------------------------------------------------
# Φ and the elliptic weight
# ---------------------------------------------------------------------------


def symmetrized_pair(
    state: DiffState, sym: SymmetrizerSet, cutoffs: Cutoffs = DEFAULT_CUTOFFS
) -> tuple[ComplexField, ComplexField]:
    """(U, V) = (T_p η, T_q ζ)."""
    eta, zeta = wahlen(state)
    return paradiff_apply(sym.p, eta, cutoffs), paradiff_apply(sym.q, zeta, cutoffs)


def build_phi(
    state: DiffState, sym: SymmetrizerSet, cutoffs: Cutoffs = DEFAULT_CUTOFFS
) -> ComplexField:
    """Φ = Re T_q(R − iγW/2) + i Im T_p 𝐖."""
    state.grid.check_same(sym.grid)
    u, v = symmetrized_pair(state, sym, cutoffs)
    return v.real() + u.imag() * 1j


def elliptic_weight(sym: SymmetrizerSet, s: float) -> Symbol:
    """℘ = (cℓ)^{2s/3}, of order s."""
    if not s > 0:
        raise ValueError(f"elliptic weight index must be positive, got {s}.")
    return _with_order((sym.c * sym.ell).power(2.0 * s / 3.0), s, f"wp_{s:g}")


def weighted_phi(
    state: DiffState, sym: SymmetrizerSet, s: float, cutoffs: Cutoffs = DEFAULT_CUTOFFS
) -> ComplexField:
    """T_℘ Φ."""
    return paradiff_apply(elliptic_weight(sym, s), build_phi(state, sym, cutoffs), cutoffs)


def commutator_defect(sym: SymmetrizerSet, s: float) -> float:
    """sup |∂_ξ℘·∂_α(cℓ) − ∂_α℘·∂_ξ(cℓ)| over sampled |ξ| ≥ 1/2.

    Scaled by max(1, sup |∂_ξ℘·∂_α(cℓ)|) so the value is comparable across
    grids whose top wavenumber differs.
    """
    wp = elliptic_weight(sym, s)
    cl = sym.c * sym.ell
    xi = sym.grid.wavenumbers
    xi = xi[(np.abs(xi) >= 0.5) & (np.arange(xi.size) != sym.grid.nyquist_index)]
    lhs = wp.dxi()(xi) * cl.dalpha()(xi)
    rhs = wp.dalpha()(xi) * cl.dxi()(xi)
    scale = max(1.0, float(np.max(np.abs(lhs))))
    return float(np.max(np.abs(lhs - rhs))) / scale


# ---------------------------------------------------------------------------
# Paralinearization
# ---------------------------------------------------------------------------


def _source_terms(
    state: DiffState, dealias_rule: float, cutoffs: Cutoffs
) -> tuple[ComplexField, ComplexField]:
    """(principal, G) for 𝐖_t + T_b̲ 𝐖_α + ∂_α T_A R = G."""
    grid = state.grid
    o = spectral_ops(grid, dealias_rule)
    aux = _wr_aux(o, state.params, state.Wa.values, state.R.values, state.primitive_W().values)
    s = _surface(state)
    b_sym = Symbol.coefficient(grid, aux["b_gamma"], label="b")
    a_sym = Symbol.coefficient(grid, s["A"], label="A")
    wb_a = ComplexField.from_values(grid, s["Wb_a"])
    transport = paradiff_apply(b_sym, wb_a, cutoffs)
    coupling = ComplexField.from_values(grid, o.dx(paradiff_apply(a_sym, state.R, cutoffs).values))
    principal = transport + coupling
    dwb, _ = rhs_WR(state, dealias_rule)
    return principal, dwb + principal


def paralinearization_gap(
    state: DiffState,
    k_range: Iterable[int],
    eps: float = 1e-3,
    dealias_rule: float = DEFAULT_DEALIAS,
    cutoffs: Cutoffs = DEFAULT_CUTOFFS,
) -> tuple[float, float]:
    """Slopes (principal, source) of the 𝐖-equation response to packets.

    Each packet u_k perturbs both 𝐖 and R by ε·u_k; the slopes are fitted to
    the L² norms of the perturbation of the principal part and of G.
    """
    grid = state.grid
    base_principal, base_g = _source_terms(state, dealias_rule, cutoffs)
    ks: list[float] = []
    principal_norms: list[float] = []
    source_norms: list[float] = []
    for k in k_range:
        if 2**k > grid.n_points // 4:
            continue
        u = project_holo(wave_packet(grid, k)) * eps
        bumped = DiffState(
            project_holo(state.Wa + u), project_holo(state.R + u), state.params, state.t, state.mean_W
        )
        principal, g = _source_terms(bumped, dealias_rule, cutoffs)
        ks.append(float(k))
        principal_norms.append((principal - base_principal).l2_norm() / eps)
        source_norms.append((g - base_g).l2_norm() / eps)
    k_arr = np.asarray(ks)
    return fit_slope(k_arr, np.asarray(principal_norms)), fit_slope(k_arr, np.asarray(source_norms))


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------


def _interpolate(grid: PeriodicGrid, coeffs: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Trigonometric interpolant of *coeffs* at arbitrary points."""
    alpha = np.asarray(alpha, dtype=float)
    phases = np.exp(1j * np.multiply.outer(alpha, grid.wavenumbers))
    c = np.array(coeffs, dtype=complex)
    c[grid.nyquist_index] = 0.0
    return phases @ c


@dataclass(frozen=True, eq=False)
class Flattening:
    """χ(α) = ∫₀^α J^{1/2}, its inverse κ, and the flattened transport coefficient b̃.

    χ descends to the torus: χ(α + L) = χ(α) + m·L with m the mean of J^{1/2},
    so the image of one cell is a cell of length m·L.
    """

    grid: PeriodicGrid
    slope: float
    chi_coeffs: np.ndarray
    jhalf_coeffs: np.ndarray
    chi_t_slope: float
    chi_t_coeffs: np.ndarray
    b_coeffs: np.ndarray

    @property
    def image_period(self) -> float:
        return self.slope * self.grid.period

    @cached_property
    def image_grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.grid.n_points, self.image_period)

    def chi_at(self, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        return self.slope * alpha + _interpolate(self.grid, self.chi_coeffs, alpha).real

    def chi_alpha_at(self, alpha: np.ndarray) -> np.ndarray:
        return _interpolate(self.grid, self.jhalf_coeffs, alpha).real

    def chi_t_at(self, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        return self.chi_t_slope * alpha + _interpolate(self.grid, self.chi_t_coeffs, alpha).real

    @property
    def chi(self) -> np.ndarray:
        return self.chi_at(self.grid.nodes)

    def kappa_at(self, beta: np.ndarray) -> np.ndarray:
        """κ(β) by Newton iteration on χ(α) = β.

        Raises
        ------
        NewtonNoConvergence
            If the residual is not below the tolerance after 50 iterations.
        """
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        cells = np.floor(beta / self.image_period)
        local = beta - cells * self.image_period
        alpha = local / self.slope
        tol = NEWTON_TOL * max(1.0, self.image_period)
        residual = np.inf
        for _ in range(NEWTON_MAX_ITER):
            f = self.chi_at(alpha) - local
            residual = float(np.max(np.abs(f)))
            if residual < tol:
                return alpha + cells * self.grid.period
            alpha = alpha - f / self.chi_alpha_at(alpha)
        raise NewtonNoConvergence(NEWTON_MAX_ITER, residual)

    @cached_property
    def kappa(self) -> np.ndarray:
        """κ on the uniform nodes of the image grid."""
        return self.kappa_at(self.image_grid.nodes)

    @property
    def b_tilde_ramp(self) -> float:
        """Linear rate of b̃ in β: the stretching rate ṁ/m of the image cell."""
        return self.chi_t_slope / self.slope

    @cached_property
    def b_tilde_values(self) -> np.ndarray:
        """(b̲∘κ)(∂_αχ∘κ) + ∂_tχ∘κ on the image nodes, ramp included."""
        k = self.kappa
        return (
            _interpolate(self.grid, self.b_coeffs, k).real * self.chi_alpha_at(k)
            + self.chi_t_at(k)
        )

    @cached_property
    def b_tilde(self) -> ComplexField:
        """Periodic part of b̃ on the image grid.

        ∂_tχ gains ``chi_t_slope·L`` per cell, so b̃ itself is
        ``b_tilde_ramp·β`` plus this field; only the latter is expanded.
        """
        ramp = self.b_tilde_ramp * self.image_grid.nodes
        return ComplexField.from_values(self.image_grid, self.b_tilde_values - ramp)

    def inversion_defect(self) -> float:
        """sup |κ(χ(α)) − α| over the nodes."""
        nodes = self.grid.nodes
        return float(np.max(np.abs(self.kappa_at(self.chi_at(nodes)) - nodes)))

    def chain_rule_defect(self) -> float:
        """sup |∂_βκ · (∂_αχ∘κ) − 1| on the image grid."""
        img = self.image_grid
        periodic = self.kappa - img.nodes / self.slope
        c = img.forward(periodic)
        ik = 1j * img.wavenumbers
        ik[img.nyquist_index] = 0.0
        dkappa = 1.0 / self.slope + img.inverse(c * ik).real
        return float(np.max(np.abs(dkappa * self.chi_alpha_at(self.kappa) - 1.0)))


def _primitive_with_slope(grid: PeriodicGrid, values: np.ndarray) -> tuple[float, np.ndarray]:
    """Split ∫₀^α f into slope·α plus a periodic part vanishing at α=0."""
    c = grid.forward(values)
    slope = float(np.real(c[0]))
    ik = 1j * grid.wavenumbers
    out = np.zeros_like(c)
    nz = (grid.modes != 0) & (np.arange(grid.n_points) != grid.nyquist_index)
    out[nz] = c[nz] / ik[nz]
    out[0] = -np.sum(out)
    return slope, out


def flatten(state: DiffState, dealias_rule: float = DEFAULT_DEALIAS) -> Flattening:
    """Flattening diffeomorphism of *state* with the transported coefficient.

    ∂_tχ is assembled from the 𝐖 tendency of the differentiated system.

    Raises
    ------
    DegenerateSurface
        Propagated from the tendency.
    NewtonNoConvergence
        From the inversion of χ.
    """
    grid = state.grid
    o = spectral_ops(grid, dealias_rule)
    wb = state.Wa.values
    W = state.primitive_W().values
    one = 1.0 + wb
    jhalf = np.abs(one)
    slope, chi_coeffs = _primitive_with_slope(grid, jhalf)

    dwb, _ = wr_tendency(o, state.params, wb, state.R.values, W)
    chi_t_density = np.real(np.conj(one) * dwb) / jhalf
    t_slope, chi_t_coeffs = _primitive_with_slope(grid, chi_t_density)

    aux = _wr_aux(o, state.params, wb, state.R.values, W)
    flat = Flattening(
        grid=grid,
        slope=slope,
        chi_coeffs=chi_coeffs,
        jhalf_coeffs=grid.forward(jhalf),
        chi_t_slope=t_slope,
        chi_t_coeffs=chi_t_coeffs,
        b_coeffs=grid.forward(np.real(aux["b_gamma"])),
    )
    logger.debug("flattening: image period %.6f (slope %.6f)", flat.image_period, slope)
    return flat
