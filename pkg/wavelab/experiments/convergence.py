"""``convergence``: solutions from frequency-truncated data P_{<N}(initial).

The successive 𝓗^{3/2} distances between the solutions for consecutive N
must shrink as N grows.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from wavelab.config import RunConfig
from wavelab.experiments.report import Report
from wavelab.littlewood_paley import product_norm
from wavelab.presets import build_initial, grid_from, truncate
from wavelab.spectral import fft_workers
from wavelab.timestepper import RunResult, StepperConfig, run
from wavelab.waterwave import WaveState

logger = logging.getLogger(__name__)

DISTANCE_INDEX: float = 1.5


def _solve(initial: WaveState, n: int, config: StepperConfig) -> RunResult:
    result = run(truncate(initial, n), config)
    if result.aborted:
        logger.warning("Truncation N=%d aborted at t=%.6f: %s", n, result.final.t, result.reason)
    return result


def distance(a: WaveState, b: WaveState, s: float = DISTANCE_INDEX) -> float:
    """‖(𝐖, R)_a − (𝐖, R)_b‖ in 𝓗^s."""
    da, db = a.differentiate(), b.differentiate()
    return product_norm((da.Wa - db.Wa, da.R - db.R), s, "H")


def run_convergence(cfg: RunConfig, out_dir: Path) -> Report:
    report = Report("convergence")
    grid = grid_from(cfg)
    # Random data spread over the whole resolved band, so every truncation level bites.
    wide = replace(cfg, initial=replace(cfg.initial, modes=grid.cutoff_mode(), truncation=None))
    initial = build_initial(wide)
    config = replace(cfg.stepper, t_end=cfg.experiment.t_end, diagnostics_stride=10**9)
    levels = sorted(cfg.experiment.truncations)

    with ThreadPoolExecutor(max_workers=fft_workers()) as pool:
        results = list(pool.map(lambda n: _solve(initial, n, config), levels))

    for n, result in zip(levels, results):
        report.add(f"aborted[N={n}]", float(result.aborted), 0.0, note=result.reason)
    finals = [result.final for result in results]

    distances = [distance(finals[i + 1], finals[i]) for i in range(len(finals) - 1)]
    for i in range(len(distances) - 1):
        ratio = distances[i + 1] / distances[i] if distances[i] > 0 else float("inf")
        report.add(f"shrink[N={levels[i + 1]}->{levels[i + 2]}]", ratio, 1.0)

    report.payload = {
        "t": cfg.experiment.t_end,
        "truncations": levels,
        "distances": distances,
    }
    logger.info("Successive distances: %s", distances)
    return report
