"""``conserve``: drift of energy and momentum, and its scaling with dt."""

from __future__ import annotations

import logging
from dataclasses import replace
from pathlib import Path

import numpy as np

from wavelab.config import RunConfig
from wavelab.experiments.report import Report
from wavelab.presets import build_initial
from wavelab.timestepper import StepperConfig, resolve_dt, run
from wavelab.waterwave import WaveState, conserved

logger = logging.getLogger(__name__)

DRIFT_BOUND: float = 1e-6
EXPECTED_ORDER: float = 4.0
ORDER_TOL: float = 0.3
DRIFT_FLOOR: float = 1e-13


def drift(initial: WaveState, config: StepperConfig) -> tuple[float, float]:
    """Relative drift of (𝓔, 𝓟) over one run; 𝓟 is scaled by max(|𝓟₀|, |𝓔₀|)."""
    e0, p0 = conserved(initial)
    result = run(initial, config)
    if result.aborted:
        return float("nan"), float("nan")
    e1, p1 = conserved(result.final)
    return abs(e1 - e0) / abs(e0), abs(p1 - p0) / max(abs(p0), abs(e0))


def drift_slope(dts: list[float], drifts: list[float]) -> float:
    return float(np.polyfit(np.log2(dts), np.log2(np.maximum(drifts, DRIFT_FLOOR)), 1)[0])


def check_order(report: Report, dts: list[float], drifts: list[float]) -> float:
    """Adds ``energy_drift_order`` (slope 4 ± 0.3) when at least two drifts clear the floor."""
    resolved = [(dt, d) for dt, d in zip(dts, drifts) if d > DRIFT_FLOOR]
    if len(resolved) < 2:
        logger.info("Energy drift at the roundoff floor; order fit skipped")
        return float("nan")
    slope = drift_slope([r[0] for r in resolved], [r[1] for r in resolved])
    report.add("energy_drift_order", slope, EXPECTED_ORDER, "==", tol=ORDER_TOL)
    return slope


def run_conserve(cfg: RunConfig, out_dir: Path) -> Report:
    report = Report("conserve")
    initial = build_initial(cfg)
    base_dt = resolve_dt(initial.grid, initial.params, cfg.stepper)
    dts = [base_dt / 2**i for i in range(cfg.experiment.dt_halvings + 1)]
    e_drifts: list[float] = []
    p_drifts: list[float] = []
    for dt in dts:
        de, dp = drift(initial, replace(cfg.stepper, dt=dt, diagnostics_stride=10**9))
        logger.info("dt=%.3e: energy drift %.3e, momentum drift %.3e", dt, de, dp)
        e_drifts.append(de)
        p_drifts.append(dp)

    report.add("energy_drift", e_drifts[0], DRIFT_BOUND)
    report.add("momentum_drift", p_drifts[0], DRIFT_BOUND)
    slope = check_order(report, dts, e_drifts)
    report.payload = {
        "dt": dts,
        "energy_drift": e_drifts,
        "momentum_drift": p_drifts,
        "energy_drift_slope": slope if np.isfinite(slope) else None,
    }
    return report
