"""Shared fixtures: small grids, parameter sets and reproducible states."""

from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from wavelab.config import RunConfig, config_from_dict
from wavelab.presets import random_smooth
from wavelab.spectral import ComplexField, HoloField, PeriodicGrid
from wavelab.waterwave import DiffState, PhysParams, WaveState


@pytest.fixture
def grid() -> PeriodicGrid:
    return PeriodicGrid(64)


@pytest.fixture
def fine_grid() -> PeriodicGrid:
    return PeriodicGrid(128)


@pytest.fixture
def params() -> PhysParams:
    return PhysParams(g=1.0, sigma=1.0, gamma=0.0)


@pytest.fixture
def vortical() -> PhysParams:
    return PhysParams(g=1.0, sigma=1.0, gamma=2.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def small_state(grid: PeriodicGrid, params: PhysParams) -> WaveState:
    return random_smooth(grid, params, seed=0, decay_rate=0.5, eps=1e-2, modes=8)


@pytest.fixture
def zero_state(grid: PeriodicGrid, params: PhysParams) -> WaveState:
    zero = HoloField(grid, np.zeros(grid.n_points))
    return WaveState(zero, zero, params)


def _random_field(grid: PeriodicGrid, rng: np.random.Generator, modes: int = 8) -> ComplexField:
    c = np.zeros(grid.n_points, dtype=complex)
    for m in range(-modes, modes + 1):
        c[grid.mode_index(m)] = np.exp(-0.4 * abs(m)) * (rng.standard_normal() + 1j * rng.standard_normal())
    return ComplexField(grid, c)


@pytest.fixture
def flat_diff(grid: PeriodicGrid, params: PhysParams, rng: np.random.Generator) -> DiffState:
    """𝐖 = 0 with a random holomorphic R."""
    zero = HoloField(grid, np.zeros(grid.n_points))
    r = np.zeros(grid.n_points, dtype=complex)
    for m in range(1, 6):
        r[grid.mode_index(-m)] = 0.05 * np.exp(-0.5 * m) * (rng.standard_normal() + 1j * rng.standard_normal())
    return DiffState(zero, HoloField(grid, r), params)


@pytest.fixture
def make_field(rng: np.random.Generator) -> Callable[..., ComplexField]:
    """Smooth complex fields with both signs of frequency and a mean."""
    return lambda grid, modes=8: _random_field(grid, rng, modes)


@pytest.fixture
def tiny_config() -> Callable[..., RunConfig]:
    """Defaults on a 32-point grid, with per-section overrides."""

    def build(**sections: dict) -> RunConfig:
        raw: dict = {"grid": {"n_points": 32}}
        for name, values in sections.items():
            raw.setdefault(name, {}).update(values)
        return config_from_dict(raw)

    return build
