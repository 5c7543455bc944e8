"""Method-of-lines integration of the (W, Q) system.

The unknown is the pair of coefficient arrays (Ŵ with the mean of W at the
zero mode, Q̂). The linear part is advanced by the exact per-mode exponential
of A(ξ); the remainder N(u) = rhs(u) − A u is dealiased and treated
explicitly, either in the integrating-factor (Lawson) form or by plain RK4
on the same split system.

Stability ceilings (dt ≤ C / max|Ω|, Ω = −γ/2 ± ℓ(ξ) over resolved ξ < 0):
``if_rk4`` uses C = 8.0, ``rk4`` uses C = 2.8, the imaginary-axis reach of
classical RK4. The default dt is half the ceiling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from wavelab.errors import DegenerateSurface, RangeError
from wavelab.spectral import (
    DEFAULT_DEALIAS,
    PeriodicGrid,
    dispersion_roots,
    spectral_ops,
)
from wavelab.waterwave import PhysParams, WaveState, linear_operator, wq_tendency

logger = logging.getLogger(__name__)

SCHEMES: tuple[str, ...] = ("if_rk4", "rk4")
_CEILING_CONSTANT: dict[str, float] = {"if_rk4": 8.0, "rk4": 2.8}

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepperConfig:
    dt: Optional[float] = None
    scheme: str = "if_rk4"
    reproject_each_step: bool = True
    dealias_rule: float = DEFAULT_DEALIAS
    t_end: float = 1.0
    diagnostics_stride: int = 10
    checkpoint_every: int = 0

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}.")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}.")
        if self.t_end < 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}.")
        if self.diagnostics_stride < 1:
            raise ValueError(f"diagnostics_stride must be >= 1, got {self.diagnostics_stride}.")


def max_frequency(grid: PeriodicGrid, params: PhysParams) -> float:
    xi = grid.wavenumbers[grid.holo_mask]
    plus, minus = dispersion_roots(params, xi)
    return float(max(np.max(np.abs(plus)), np.max(np.abs(minus))))


def stability_ceiling(grid: PeriodicGrid, params: PhysParams, scheme: str = "if_rk4") -> float:
    if scheme not in _CEILING_CONSTANT:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}.")
    return _CEILING_CONSTANT[scheme] / max_frequency(grid, params)


def resolve_dt(grid: PeriodicGrid, params: PhysParams, config: StepperConfig) -> float:
    """Configured dt, or half the ceiling when unset.

    Raises
    ------
    RangeError
        If the configured dt exceeds the stability ceiling.
    """
    ceiling = stability_ceiling(grid, params, config.scheme)
    if config.dt is None:
        return 0.5 * ceiling
    if config.dt > ceiling:
        raise RangeError(
            "dt", f"dt={config.dt:g} exceeds the {config.scheme} stability ceiling {ceiling:.4g}."
        )
    return float(config.dt)


# ---------------------------------------------------------------------------
# Linear propagator
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinearPropagator:
    """Per-mode e^{Δt·A(ξ)}: exact on ξ < 0, identity at ξ = 0, zero elsewhere."""

    grid: PeriodicGrid
    params: PhysParams
    dt: float
    matrices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrices", _exponential(self.grid, self.params, self.dt))

    def apply(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("kij,kj->ki", self.matrices, u)


def _exponential(grid: PeriodicGrid, params: PhysParams, t: float) -> np.ndarray:
    n = grid.n_points
    out = np.zeros((n, 2, 2), dtype=complex)
    out[0] = np.eye(2)
    mask = grid.holo_mask
    xi = grid.wavenumbers[mask]
    a = linear_operator(params, xi)
    ell = np.sqrt(params.sigma * np.abs(xi) ** 3 + params.g * np.abs(xi) + 0.25 * params.gamma**2)
    shifted = a + 0.5j * params.gamma * np.eye(2)
    rot = np.exp(-0.5j * params.gamma * t)
    out[mask] = rot * (
        np.cos(ell * t)[:, None, None] * np.eye(2)
        + (np.sin(ell * t) / ell)[:, None, None] * shifted
    )
    return out


def generator(grid: PeriodicGrid, params: PhysParams) -> np.ndarray:
    """A(ξ) on ξ < 0, zero elsewhere, shape (n, 2, 2)."""
    out = np.zeros((grid.n_points, 2, 2), dtype=complex)
    out[grid.holo_mask] = linear_operator(params, grid.wavenumbers[grid.holo_mask])
    return out


def _pack(state: WaveState) -> np.ndarray:
    w, q = state.coefficients()
    return np.stack([w, q], axis=1)


def _unpack(grid: PeriodicGrid, u: np.ndarray, params: PhysParams, t: float) -> WaveState:
    return WaveState.from_coefficients(grid, u[:, 0], u[:, 1], params, t)


def linear_step(state: WaveState, dt: float) -> WaveState:
    """Exact linear evolution over dt (zero-mean part; the mean of W is kept)."""
    prop = LinearPropagator(state.grid, state.params, dt)
    return _unpack(state.grid, prop.apply(_pack(state)), state.params, state.t + dt)


# ---------------------------------------------------------------------------
# Stepper
# ---------------------------------------------------------------------------


class Stepper:
    """Integrates one (grid, params, config) combination; owns its propagators."""

    def __init__(self, grid: PeriodicGrid, params: PhysParams, config: StepperConfig) -> None:
        self.grid = grid
        self.params = params
        self.config = config
        self.dt = resolve_dt(grid, params, config)
        self._ops = spectral_ops(grid, config.dealias_rule)
        self._gen = generator(grid, params)
        self._keep = grid.dealias_mask(config.dealias_rule)[:, None].astype(float)
        self._closure = ((grid.modes <= 0) & (grid.modes != -grid.nyquist_index))[:, None]
        self._props: dict[float, tuple[LinearPropagator, LinearPropagator]] = {}
        self.last_leak: float = 0.0

    # ------------------------------------------------------------------
    # Building blocks
    # ------------------------------------------------------------------

    def _propagators(self, h: float) -> tuple[LinearPropagator, LinearPropagator]:
        if h not in self._props:
            self._props[h] = (
                LinearPropagator(self.grid, self.params, h),
                LinearPropagator(self.grid, self.params, 0.5 * h),
            )
        return self._props[h]

    def linear(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("kij,kj->ki", self._gen, u)

    def nonlinear(self, u: np.ndarray) -> np.ndarray:
        """Dealiased N(u) = rhs(u) − A u."""
        o = self._ops
        dw, dq = wq_tendency(o, self.params, o.ifft(u[:, 0]), o.ifft(u[:, 1]))
        full = np.stack([o.fft(dw), o.fft(dq)], axis=1)
        return self._keep * (full - self.linear(u))

    def full(self, u: np.ndarray) -> np.ndarray:
        return self.linear(u) + self.nonlinear(u)

    # ------------------------------------------------------------------
    # Schemes
    # ------------------------------------------------------------------

    def _if_rk4(self, u: np.ndarray, h: float) -> np.ndarray:
        e, e2 = self._propagators(h)
        k1 = self.nonlinear(u)
        k2 = self.nonlinear(e2.apply(u + 0.5 * h * k1))
        k3 = self.nonlinear(e2.apply(u) + 0.5 * h * k2)
        k4 = self.nonlinear(e.apply(u) + h * e2.apply(k3))
        return e.apply(u) + (h / 6.0) * (
            e.apply(k1) + 2.0 * e2.apply(k2 + k3) + k4
        )

    def _rk4(self, u: np.ndarray, h: float) -> np.ndarray:
        k1 = self.full(u)
        k2 = self.full(u + 0.5 * h * k1)
        k3 = self.full(u + 0.5 * h * k2)
        k4 = self.full(u + h * k3)
        return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def advance(self, u: np.ndarray, h: Optional[float] = None) -> np.ndarray:
        """One step on packed coefficients; reprojects when configured."""
        h = self.dt if h is None else h
        out = self._if_rk4(u, h) if self.config.scheme == "if_rk4" else self._rk4(u, h)
        total = float(np.sum(np.abs(out) ** 2))
        leak = float(np.sum(np.abs(out[~self._closure[:, 0]]) ** 2))
        self.last_leak = float(np.sqrt(leak / total)) if total > 0 else 0.0
        if self.config.reproject_each_step:
            out = np.where(self._closure, out, 0.0)
            out[0, 1] = 0.0
        return out

    def step(self, state: WaveState, h: Optional[float] = None) -> WaveState:
        h = self.dt if h is None else h
        state.grid.check_same(self.grid)
        return _unpack(self.grid, self.advance(_pack(state), h), self.params, state.t + h)


def step(state: WaveState, config: StepperConfig) -> WaveState:
    """Advance *state* by one step of the configured scheme."""
    return Stepper(state.grid, state.params, config).step(state)


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

StateObserver = Callable[[int, WaveState, float], None]


@dataclass
class RunResult:
    final: WaveState
    steps: int
    aborted: bool = False
    reason: str = ""


def step_schedule(t0: float, t_end: float, dt: float) -> list[float]:
    """Step sizes from t0 to t_end: full steps and one shortened last step."""
    span = t_end - t0
    if span <= 0:
        return []
    full = int(np.floor(span / dt + 1e-9))
    sizes = [dt] * full
    rest = span - full * dt
    if rest > 1e-12 * max(1.0, abs(t_end)):
        sizes.append(rest)
    return sizes


def run(
    initial: WaveState,
    config: StepperConfig,
    observer: Optional[StateObserver] = None,
) -> RunResult:
    """Integrate up to ``config.t_end``, notifying *observer* every stride.

    A :class:`DegenerateSurface`, raised by a stage or by the surface check
    after every step, ends the run early; the result then holds the last
    state that passed the check, with ``aborted=True``.
    """
    stepper = Stepper(initial.grid, initial.params, config)
    stride = config.diagnostics_stride
    grid, params = initial.grid, initial.params
    u = _pack(initial)
    state = initial
    if observer is not None:
        observer(0, state, 0.0)
    schedule = step_schedule(initial.t, config.t_end, stepper.dt)
    logger.info(
        "Run: n=%d scheme=%s dt=%.3e steps=%d", grid.n_points, config.scheme, stepper.dt, len(schedule)
    )
    for i, h in enumerate(schedule, start=1):
        try:
            u_next = stepper.advance(u, h)
            checked = _unpack(grid, u_next, params, state.t + h)
        except DegenerateSurface as exc:
            logger.warning("Run aborted at step %d (t=%.6f): %s", i, state.t, exc)
            return RunResult(state, i - 1, aborted=True, reason=str(exc))
        u, state = u_next, checked
        if i % stride == 0 or i == len(schedule):
            logger.debug("step %d t=%.6f leak=%.3e", i, state.t, stepper.last_leak)
            if observer is not None:
                observer(i, state, stepper.last_leak)
    return RunResult(state, len(schedule))
