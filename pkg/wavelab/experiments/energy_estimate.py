"""``energy-estimate``: empirical constant in d/dt‖X‖ ≤ C(1 + ℬ)‖X‖.

X = (𝐖, R) is measured in H^{s+½} × H^s with the 𝐖 part weighted by σ, the
combination whose linear flow is nearly norm preserving. The time
derivative is taken from the differentiated system itself, so no finite
differences in t enter.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from wavelab.config import RunConfig
from wavelab.experiments.report import Report
from wavelab.littlewood_paley import control_norms
from wavelab.presets import build_initial
from wavelab.spectral import fft_workers
from wavelab.timestepper import StepperConfig, run
from wavelab.waterwave import WaveState, rhs_WR

logger = logging.getLogger(__name__)

VARIATION_BOUND: float = 0.2


def growth_ratio(state: WaveState, s: float, eps: float) -> float:
    """|d/dt‖X‖| / ((1 + ℬ)‖X‖) at one instant."""
    diff = state.differentiate()
    grid = state.grid
    sigma = state.params.sigma
    weight = 1.0 + grid.wavenumbers**2
    w_hi, w_lo = sigma * weight ** (s + 0.5), weight**s

    x_w, x_r = diff.Wa.coefficients, diff.R.coefficients
    dw, dr = (f.coefficients for f in rhs_WR(diff))
    sq = np.sum(w_hi * np.abs(x_w) ** 2 + w_lo * np.abs(x_r) ** 2)
    if sq == 0.0:
        return 0.0
    rate = np.sum(w_hi * np.real(np.conj(x_w) * dw) + w_lo * np.real(np.conj(x_r) * dr))
    norm = math.sqrt(grid.period * sq)
    d_norm = grid.period * rate / norm
    _, big_b = control_norms(diff, eps)
    return abs(float(d_norm)) / ((1.0 + big_b) * norm)


def ensemble_member(cfg: RunConfig, n_points: int, seed: int, config: StepperConfig) -> float:
    """Largest growth ratio seen along one run; NaN when the run aborted."""
    analysis = cfg.analysis
    ratios: list[float] = []

    def observe(_step: int, snap: WaveState, _leak: float) -> None:
        ratios.append(growth_ratio(snap, analysis.sobolev_index, analysis.zygmund_eps))

    result = run(build_initial(cfg, n_points=n_points, seed=seed), config, observe)
    if result.aborted:
        logger.warning("Ensemble member n=%d seed=%d aborted: %s", n_points, seed, result.reason)
        return math.nan
    return max(ratios)


def run_energy_estimate(cfg: RunConfig, out_dir: Path) -> Report:
    report = Report("energy-estimate")
    exp = cfg.experiment
    config = replace(cfg.stepper, t_end=exp.t_end)
    seeds = [cfg.initial.seed + i for i in range(exp.ensemble)]
    jobs = [(n, seed) for n in exp.resolutions for seed in seeds]

    with ThreadPoolExecutor(max_workers=fft_workers()) as pool:
        maxima = list(pool.map(lambda job: ensemble_member(cfg, job[0], job[1], config), jobs))

    constants: dict[int, float] = {}
    for n in exp.resolutions:
        constants[n] = float(np.max([m for (jn, _), m in zip(jobs, maxima) if jn == n]))
        # Any finite C passes; an aborted member makes it NaN.
        report.add(f"constant[n={n}]", constants[n], math.inf, note="finite")
    values = list(constants.values())
    if len(values) >= 2:
        variation = (max(values) - min(values)) / max(values) if max(values) > 0 else 0.0
        report.add("constant_variation", variation, VARIATION_BOUND)

    report.payload = {
        "sobolev_index": cfg.analysis.sobolev_index,
        "ensemble": exp.ensemble,
        "constants": {str(n): c for n, c in constants.items()},
    }
    return report
