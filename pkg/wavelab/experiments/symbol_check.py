"""``symbol-check``: order probes for the calculus and the water-wave symbols.

Every check turns an order statement into a slope fitted to
log₂‖op u_k‖ over packet levels k. Operators that vanish on every packet
(below :data:`VANISH`) are reported as such instead of fitting noise.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from wavelab.config import AnalysisConfig, RunConfig
from wavelab.experiments.report import Report
from wavelab.paracalc import (
    Cutoffs,
    FieldOp,
    OperatorCache,
    Symbol,
    fit_slope,
    probe_norms,
    symbol_adjoint,
    symbol_compose,
)
from wavelab.presets import grid_from, wavy_state
from wavelab.reduction import (
    DECLARED_ORDERS,
    build_symmetrizers,
    commutator_defect,
    elliptic_weight,
    flatten,
    paralinearization_gap,
    relation_operators,
    symbols_lambda_k,
)
from wavelab.spectral import ComplexField, HoloField, PeriodicGrid
from wavelab.waterwave import DiffState, compute_aux, ubalpha_residual

logger = logging.getLogger(__name__)

VANISH: float = 1e-9
SLACK: float = 0.3
COMPOSE_RHO: float = 2.0
ADJOINT_RHO: float = 1.5
RELATION_BOUNDS: dict[str, float] = {"first": 0.3, "second": 0.8}
WEIGHT_SLACK: float = 0.2
GAP_BOUND: float = 0.2
INVERSION_BOUND: float = 1e-11
CHAIN_RULE_BOUND: float = 1e-10
COMMUTATOR_BOUND: float = 1e-10
IDENTITY_BOUND: float = 1e-10


def cutoffs_from(analysis: AnalysisConfig) -> Cutoffs:
    return Cutoffs(eps1=analysis.eps1, eps2=analysis.eps2)


def k_range(analysis: AnalysisConfig) -> range:
    return range(analysis.k_min, analysis.k_max + 1)


def packet_grid(cfg: RunConfig) -> PeriodicGrid:
    """The configured grid, enlarged until the top packet level is usable."""
    return grid_from(cfg, max(cfg.grid.n_points, 4 * 2**cfg.analysis.k_max))


def probe_symbols(grid: PeriodicGrid) -> dict[str, Symbol]:
    """b(α), iξ·b(α) and |ξ|^{3/2}·c(α) with smooth real b, c."""
    alpha = grid.nodes * grid.fundamental
    b = 1.0 + 0.3 * np.cos(alpha) + 0.2 * np.sin(2.0 * alpha)
    c = 1.0 + 0.25 * np.sin(alpha)
    b_sym = Symbol.coefficient(grid, b, label="b")
    c_sym = Symbol.coefficient(grid, c, label="c")
    i_xi = Symbol.multiplier(
        grid, lambda xi: 1j * xi, 1.0, dm=lambda xi: 1j * np.ones_like(xi), label="i*xi"
    )
    abs_xi = Symbol.multiplier(
        grid,
        lambda xi: np.abs(xi) ** 1.5,
        1.5,
        dm=lambda xi: 1.5 * np.sign(xi) * np.abs(xi) ** 0.5,
        label="|xi|^1.5",
    )
    return {"b": b_sym, "i*xi*b": i_xi * b_sym, "|xi|^1.5*c": abs_xi * c_sym}


def probe(op: FieldOp, grid: PeriodicGrid, levels: range) -> tuple[Optional[float], float]:
    """(slope, peak norm); the slope is ``None`` when *op* vanishes on every packet."""
    ks, norms = probe_norms(op, grid, levels)
    peak = float(np.max(norms)) if norms.size else 0.0
    if peak < VANISH:
        return None, peak
    return fit_slope(ks, norms), peak


def _upper(report: Report, name: str, slope: Optional[float], peak: float, bound: float) -> None:
    if slope is None:
        report.add(f"{name}:vanishes", peak, VANISH)
    else:
        report.add(name, slope, bound, note=f"peak {peak:.3e}")


def _matches(report: Report, name: str, slope: Optional[float], peak: float,
             order: float, tol: float) -> None:
    if slope is None:
        report.add(f"{name}:vanishes", peak, VANISH)
    else:
        report.add(name, slope, order, "==", tol=tol)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def check_calculus(report: Report, grid: PeriodicGrid, levels: range, cutoffs: Cutoffs) -> None:
    cache = OperatorCache(cutoffs)
    symbols = probe_symbols(grid)
    for na, a in symbols.items():
        for nb, b in symbols.items():
            ab = symbol_compose(a, b, COMPOSE_RHO)

            def op(u, a=a, b=b, ab=ab):
                return cache.apply(a, cache.apply(b, u)) - cache.apply(ab, u)

            slope, peak = probe(op, grid, levels)
            bound = a.order + b.order - COMPOSE_RHO + SLACK
            _upper(report, f"compose[{na},{nb}]", slope, peak, bound)

    for na, a in symbols.items():
        star = symbol_adjoint(a, ADJOINT_RHO)
        kernel = cache.kernel(a).conj().T

        def adj(u, star=star, kernel=kernel):
            return ComplexField(u.grid, kernel @ u.coefficients) - cache.apply(star, u)

        slope, peak = probe(adj, grid, levels)
        _upper(report, f"adjoint[{na}]", slope, peak, a.order - ADJOINT_RHO + SLACK)


def check_water_wave_symbols(
    report: Report, state: DiffState, levels: range, cutoffs: Cutoffs, sobolev_index: float
) -> None:
    grid = state.grid
    cache = OperatorCache(cutoffs)
    sym = build_symmetrizers(state)
    lam, k = symbols_lambda_k(state)
    named = {name: sym.by_name(name) for name in DECLARED_ORDERS}
    named.update({"lambda": lam, "k": k})
    for name, a in named.items():
        slope, peak = probe(lambda u, a=a: cache.apply(a, u), grid, levels)
        _matches(report, f"order[{name}]", slope, peak, a.order, SLACK)

    rel = relation_operators(state, sym, cutoffs)
    for which, bound in RELATION_BOUNDS.items():
        slope, peak = probe(getattr(rel, which), grid, levels)
        _upper(report, f"relation[{which}]", slope, peak, bound)

    weight = elliptic_weight(sym, sobolev_index)
    slope, peak = probe(lambda u: cache.apply(weight, u), grid, levels)
    _matches(report, f"order[weight s={sobolev_index:g}]", slope, peak, sobolev_index, WEIGHT_SLACK)
    report.add("weight_commutator", commutator_defect(sym, sobolev_index), COMMUTATOR_BOUND)


def check_flattening(report: Report, state: DiffState) -> None:
    flat = flatten(state)
    report.add("flatten_inversion", flat.inversion_defect(), INVERSION_BOUND)
    report.add("flatten_chain_rule", flat.chain_rule_defect(), CHAIN_RULE_BOUND)

    # On a flat surface χ = α and ∂_tχ = −Re(R − R(0)).
    grid = state.grid
    zero = HoloField(grid, np.zeros(grid.n_points))
    level = DiffState(zero, state.R, state.params)
    b_low = compute_aux(level).b_gamma.values.real
    r = state.R.values.real
    expected = b_low - (r - r[0])
    got = flatten(level).b_tilde_values
    report.add("flatten_flat_transport", float(np.max(np.abs(got - expected))), INVERSION_BOUND)

    # At rest ∂_tχ vanishes and b̃ = b̲.
    rest = DiffState(zero, zero, state.params)
    got = flatten(rest).b_tilde_values
    b_low = compute_aux(rest).b_gamma.values.real
    report.add("flatten_at_rest", float(np.max(np.abs(got - b_low))), INVERSION_BOUND)


def run_symbol_check(cfg: RunConfig, out_dir: Path) -> Report:
    report = Report("symbol-check")
    grid = packet_grid(cfg)
    analysis = cfg.analysis
    levels = k_range(analysis)
    cutoffs = cutoffs_from(analysis)

    check_calculus(report, grid, levels, cutoffs)
    state = wavy_state(grid, cfg.params, cfg.experiment.wavy_target, analysis.zygmund_eps)
    logger.info("Wavy state with C^{1+eps} norm %g on n=%d", cfg.experiment.wavy_target, grid.n_points)
    check_water_wave_symbols(report, state, levels, cutoffs, analysis.sobolev_index)

    principal, source = paralinearization_gap(state, levels, cutoffs=cutoffs)
    report.add("paralinearization_gap", principal - source, GAP_BOUND, ">=",
               note=f"principal {principal:.3f}, source {source:.3f}")
    report.add("ubalpha_relation", ubalpha_residual(state), IDENTITY_BOUND)
    check_flattening(report, state)

    report.payload = {
        "n_points": grid.n_points,
        "levels": list(levels),
        "wavy_target": cfg.experiment.wavy_target,
    }
    return report
