"""CLI commands. Each takes a validated :class:`RunConfig` and an output
directory and returns a :class:`Report` whose criteria decide the exit status."""

from __future__ import annotations

from pathlib import Path
from typing import Callable

from wavelab.config import RunConfig
from wavelab.experiments.conserve import run_conserve
from wavelab.experiments.convergence import run_convergence
from wavelab.experiments.dispersion import run_dispersion
from wavelab.experiments.energy_estimate import run_energy_estimate
from wavelab.experiments.norms import run_norms
from wavelab.experiments.report import Criterion, Report
from wavelab.experiments.simulate import run_simulate
from wavelab.experiments.symbol_check import run_symbol_check

Command = Callable[[RunConfig, Path], Report]

COMMANDS: dict[str, Command] = {
    "simulate": run_simulate,
    "dispersion": run_dispersion,
    "conserve": run_conserve,
    "symbol-check": run_symbol_check,
    "norms": run_norms,
    "convergence": run_convergence,
    "energy-estimate": run_energy_estimate,
}

__all__ = ["COMMANDS", "Command", "Criterion", "Report"]
