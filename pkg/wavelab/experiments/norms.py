"""``norms``: every norm of one state, plus the decomposition self-checks."""

from __future__ import annotations

import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np

from wavelab.config import RunConfig
from wavelab.engine import diagnose
from wavelab.experiments.report import Report
from wavelab.littlewood_paley import (
    besov_norm,
    decomposition_for,
    sobolev_norm,
    zygmund_norm,
)
from wavelab.paracalc import fit_slope
from wavelab.presets import build_initial
from wavelab.spectral import ComplexField, PeriodicGrid

logger = logging.getLogger(__name__)

PARTITION_BOUND: float = 1e-13
PARSEVAL_BOUND: float = 1e-12
SCALING_TOL: float = 0.1


def partition_defect(grid: PeriodicGrid) -> float:
    """sup |Σ_k P_k − 1| over the grid's wavenumbers."""
    return float(np.max(np.abs(decomposition_for(grid).blocks.sum(axis=0) - 1.0)))


def parseval_defect(f: ComplexField) -> float:
    """Relative gap between ∫|f|² on the nodes and period·Σ|f̂|²."""
    physical = float(np.real(f.grid.integrate(np.abs(f.values) ** 2)))
    spectral = f.grid.period * float(np.sum(np.abs(f.coefficients) ** 2))
    return abs(physical - spectral) / max(spectral, 1e-300)


def zygmund_scaling(grid: PeriodicGrid, s: float, levels: range) -> float:
    """Fitted exponent of ‖e^{−i2^kα}‖_{C^s_*} against k; equals s for dyadic modes."""
    ks, norms = [], []
    for k in levels:
        if 2**k > grid.cutoff_mode():
            continue
        c = np.zeros(grid.n_points, dtype=complex)
        c[grid.mode_index(-(2**k))] = 1.0
        ks.append(k + np.log2(grid.fundamental))
        norms.append(zygmund_norm(ComplexField(grid, c), s))
    return fit_slope(np.asarray(ks), np.asarray(norms))


def field_norms(f: ComplexField, s: float, r: float) -> dict[str, float]:
    return {
        "L2": f.l2_norm(),
        f"H^{s:g}": sobolev_norm(f, s),
        f"B^{s:g}_2,2": besov_norm(f, s, 2.0, 2.0),
        f"C^{r:g}_*": zygmund_norm(f, r),
    }


def run_norms(cfg: RunConfig, out_dir: Path) -> Report:
    report = Report("norms")
    state = build_initial(cfg)
    grid = state.grid
    analysis = cfg.analysis
    s, r = analysis.sobolev_index, analysis.holder_index
    diff = state.differentiate()

    report.add("partition_of_unity", partition_defect(grid), PARTITION_BOUND)
    report.add("parseval", max(parseval_defect(state.W), parseval_defect(state.Q)), PARSEVAL_BOUND)
    levels = range(0, analysis.k_max + 1)
    report.add(f"zygmund_scaling[s={r:g}]", zygmund_scaling(grid, r, levels), r, "==", tol=SCALING_TOL)

    fields = {"W": state.W, "Q": state.Q, "Wa": diff.Wa, "R": diff.R}
    report.payload = {
        "t": float(state.t),
        "n_points": grid.n_points,
        "fields": {name: field_norms(f, s, r) for name, f in fields.items()},
        "record": asdict(diagnose(state, analysis)),
    }
    logger.info("Norms of %s state on n=%d", cfg.initial.kind, grid.n_points)
    return report
