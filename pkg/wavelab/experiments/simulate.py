"""``simulate``: one configured run with diagnostics, series and checkpoint."""

from __future__ import annotations

import logging
from pathlib import Path

from wavelab.config import RunConfig
from wavelab.engine import SimulationEngine
from wavelab.experiments.report import Report
from wavelab.presets import build_initial

logger = logging.getLogger(__name__)

HOLO_DEFECT_BOUND: float = 1e-12


def run_simulate(cfg: RunConfig, out_dir: Path) -> Report:
    report = Report("simulate")
    engine = SimulationEngine(cfg, out_dir)
    initial = build_initial(cfg)
    engine.start_session()
    try:
        result = engine.run(initial)
    finally:
        engine.stop_session()
    series = engine.export_series()

    report.add("aborted", float(result.aborted), 0.0, note=result.reason)
    if cfg.stepper.reproject_each_step and engine.records:
        report.add("holo_defect", max(r.holo_defect for r in engine.records), HOLO_DEFECT_BOUND)
    first, last = engine.records[0], engine.records[-1]
    report.payload = {
        "steps": result.steps,
        "t_final": float(result.final.t),
        "energy_drift": abs(last.E - first.E) / max(abs(first.E), 1e-300),
        "series": str(series),
        "checkpoint": str(engine.last_checkpoint),
    }
    return report
