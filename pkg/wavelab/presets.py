"""Initial-data presets and state builders used by the experiments."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from wavelab.checkpoint import read_checkpoint
from wavelab.config import InitialConfig, RunConfig
from wavelab.littlewood_paley import decomposition_for, zygmund_norm
from wavelab.spectral import ComplexField, HoloField, PeriodicGrid, project_holo
from wavelab.waterwave import DiffState, PhysParams, WaveState

logger = logging.getLogger(__name__)


def grid_from(cfg: RunConfig, n_points: Optional[int] = None) -> PeriodicGrid:
    return PeriodicGrid(n_points or cfg.grid.n_points, cfg.grid.period)


def _mode(grid: PeriodicGrid, k: int) -> np.ndarray:
    """Coefficient vector of e^{−ikα} (in units of the fundamental)."""
    c = np.zeros(grid.n_points, dtype=complex)
    c[grid.mode_index(-k)] = 1.0
    return c


def single_mode(
    grid: PeriodicGrid, params: PhysParams, k: int, eps: float, target: str = "W"
) -> WaveState:
    """ε·e^{−ikα} in W or in Q; the other field is zero."""
    c = eps * _mode(grid, k)
    zero = HoloField(grid, np.zeros(grid.n_points))
    field = HoloField(grid, c)
    if target == "W":
        return WaveState(field, zero, params)
    if target == "Q":
        return WaveState(zero, field, params)
    raise ValueError(f"target must be 'W' or 'Q', got {target!r}.")


def _random_coeffs(
    grid: PeriodicGrid, rng: np.random.Generator, decay_rate: float, modes: int
) -> np.ndarray:
    m = np.arange(1, modes + 1)
    amp = np.exp(-decay_rate * m) * (rng.standard_normal(modes) + 1j * rng.standard_normal(modes))
    c = np.zeros(grid.n_points, dtype=complex)
    c[[grid.mode_index(-k) for k in m]] = amp
    return c


def random_smooth(
    grid: PeriodicGrid,
    params: PhysParams,
    seed: int,
    decay_rate: float,
    eps: float,
    modes: int = 16,
) -> WaveState:
    """Random holomorphic (W, Q) with |ĉ(−m)| ~ e^{−rate·m}, scaled to sup|W| = sup|Q| = ε.

    The seed is expanded with :class:`numpy.random.SeedSequence` into one
    stream per field, so W and Q are reproducible independently.
    """
    modes = min(modes, grid.cutoff_mode())
    w_seq, q_seq = np.random.SeedSequence(seed).spawn(2)
    w = _random_coeffs(grid, np.random.default_rng(w_seq), decay_rate, modes)
    q = _random_coeffs(grid, np.random.default_rng(q_seq), decay_rate, modes)
    w *= eps / np.max(np.abs(grid.inverse(w)))
    q *= eps / np.max(np.abs(grid.inverse(q)))
    return WaveState(HoloField(grid, w), HoloField(grid, q), params)


def from_checkpoint(path: Path) -> WaveState:
    return read_checkpoint(Path(path))


def wavy_state(
    grid: PeriodicGrid, params: PhysParams, target: float, eps: float = 1.0 / 16.0
) -> DiffState:
    """Smooth few-mode (𝐖, R) with ‖𝐖‖_{C^{1+ε}_*} equal to *target*."""
    alpha = grid.nodes * grid.fundamental
    shape = np.exp(-1j * alpha) + 0.4 * np.exp(-2j * alpha) + 0.15 * np.exp(-3j * alpha)
    wb = ComplexField.from_values(grid, shape)
    if target == 0:
        zero = HoloField(grid, np.zeros(grid.n_points))
        return DiffState(zero, zero, params)
    scale = target / zygmund_norm(wb, 1.0 + eps)
    r = ComplexField.from_values(grid, 0.5 * scale * np.exp(-1j * alpha) * (1.0 + 0.3 * np.exp(-1j * alpha)))
    return DiffState(project_holo(wb * scale), project_holo(r), params)


def truncate(state: WaveState, n: int) -> WaveState:
    """P_{<N} applied to W and Q; the mean of W is kept."""
    dec = decomposition_for(state.grid)
    top = min(n, dec.max_index + 1)
    mult = dec.blocks[:top].sum(axis=0)
    return WaveState(
        HoloField(state.grid, state.W.coefficients * mult),
        HoloField(state.grid, state.Q.coefficients * mult),
        state.params,
        state.t,
        state.mean_W,
    )


def build_initial(cfg: RunConfig, n_points: Optional[int] = None, seed: Optional[int] = None) -> WaveState:
    """Initial state described by ``cfg.initial``."""
    init: InitialConfig = cfg.initial
    params = cfg.params
    if init.kind == "from_checkpoint":
        state = from_checkpoint(Path(init.path or ""))
    else:
        grid = grid_from(cfg, n_points)
        if init.kind == "single_mode":
            state = single_mode(grid, params, init.k, init.eps, init.target)
        elif init.kind == "wavy":
            state = wavy_state(grid, params, init.eps).integrate()
        else:
            state = random_smooth(
                grid, params, init.seed if seed is None else seed, init.decay_rate, init.eps, init.modes
            )
    if init.truncation is not None:
        state = truncate(state, init.truncation)
    logger.info("Initial data: %s on n=%d", init.kind, state.grid.n_points)
    return state
