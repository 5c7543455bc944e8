"""``dispersion``: measured oscillation frequencies against −γ/2 ± ℓ(ξ).

Small-amplitude W data excites both branches of every listed mode. Each
snapshot is projected onto the eigenvectors (1, −τ±/ξ) of the linear
generator, and the unwrapped phase of each projection is fitted linearly in
time.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from wavelab.config import RunConfig
from wavelab.experiments.report import Report
from wavelab.presets import grid_from
from wavelab.spectral import HoloField, PeriodicGrid, dispersion_roots
from wavelab.timestepper import StepperConfig, run, stability_ceiling
from wavelab.waterwave import PhysParams, WaveState

logger = logging.getLogger(__name__)

AMPLITUDE: float = 1e-6
SAMPLES: int = 64


def measure_frequencies(
    grid: PeriodicGrid, params: PhysParams, modes: tuple[int, ...], scheme: str = "if_rk4"
) -> dict[int, tuple[float, float]]:
    """Fitted (τ₊, τ₋) per mode from a short nonlinear run."""
    xi = -np.asarray(modes, dtype=float) * grid.fundamental
    plus, minus = dispersion_roots(params, xi)
    tau_max = float(np.max(np.abs(np.concatenate([plus, minus]))))
    dt = min(0.5 * stability_ceiling(grid, params, scheme), 0.5 / tau_max)

    coeffs = np.zeros(grid.n_points, dtype=complex)
    for k in modes:
        coeffs[grid.mode_index(-k)] = AMPLITUDE
    zero = HoloField(grid, np.zeros(grid.n_points))
    state = WaveState(HoloField(grid, coeffs), zero, params)

    times: list[float] = []
    samples: list[np.ndarray] = []

    def observe(_step: int, snap: WaveState, _leak: float) -> None:
        times.append(snap.t)
        samples.append(
            np.array([[snap.W.coefficient(-k), snap.Q.coefficient(-k)] for k in modes])
        )

    config = StepperConfig(dt=dt, scheme=scheme, t_end=SAMPLES * dt, diagnostics_stride=1)
    run(state, config, observe)
    t = np.asarray(times)
    data = np.asarray(samples)

    out: dict[int, tuple[float, float]] = {}
    for i, k in enumerate(modes):
        basis = np.array([[1.0, 1.0], [-plus[i] / xi[i], -minus[i] / xi[i]]], dtype=complex)
        proj = np.linalg.solve(basis, data[:, i, :].T)
        fitted = [
            float(np.polyfit(t, np.unwrap(np.angle(proj[j])), 1)[0]) for j in range(2)
        ]
        out[k] = (fitted[0], fitted[1])
    return out


def run_dispersion(cfg: RunConfig, out_dir: Path) -> Report:
    report = Report("dispersion")
    grid = grid_from(cfg)
    modes = cfg.experiment.modes
    rows = []
    for g, sigma, gamma in cfg.experiment.param_sets:
        params = PhysParams(g, sigma, gamma)
        measured = measure_frequencies(grid, params, modes, cfg.stepper.scheme)
        xi = -np.asarray(modes, dtype=float) * grid.fundamental
        plus, minus = dispersion_roots(params, xi)
        for i, k in enumerate(modes):
            for branch, predicted, got in (("+", plus[i], measured[k][0]), ("-", minus[i], measured[k][1])):
                rel = abs(got - predicted) / abs(predicted)
                report.add(
                    f"tau{branch}[g={g:g},sigma={sigma:g},gamma={gamma:g},k={k}]",
                    rel,
                    cfg.experiment.tolerance,
                )
                rows.append(
                    {"g": g, "sigma": sigma, "gamma": gamma, "k": k, "branch": branch,
                     "predicted": float(predicted), "measured": got, "rel_error": rel}
                )
    report.payload = {"rows": rows}
    return report
