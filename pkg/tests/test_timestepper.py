"""Linear propagator, step sizes, the IF-RK4 / RK4 schemes and whole runs."""

import numpy as np
import pytest
import scipy.linalg

import wavelab.timestepper as timestepper
from wavelab.checkpoint import read_checkpoint, write_checkpoint
from wavelab.errors import DegenerateSurface, RangeError
from wavelab.presets import random_smooth, single_mode
from wavelab.spectral import PeriodicGrid, dispersion_roots
from wavelab.timestepper import (
    LinearPropagator,
    Stepper,
    StepperConfig,
    generator,
    linear_step,
    resolve_dt,
    run,
    stability_ceiling,
    step,
    step_schedule,
)
from wavelab.waterwave import PhysParams, conserved, linear_energy


def _coeffs(state):
    w, q = state.coefficients()
    return np.concatenate([w, q])


# ---------------------------------------------------------------------------
# Configuration and step sizes
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs", [{"scheme": "euler"}, {"dt": 0.0}, {"t_end": -1.0}, {"diagnostics_stride": 0}]
)
def test_stepper_config_validation(kwargs):
    with pytest.raises(ValueError):
        StepperConfig(**kwargs)


def test_default_dt_is_half_the_ceiling(grid, params):
    for scheme in ("if_rk4", "rk4"):
        ceiling = stability_ceiling(grid, params, scheme)
        assert resolve_dt(grid, params, StepperConfig(scheme=scheme)) == pytest.approx(0.5 * ceiling)
    assert stability_ceiling(grid, params, "rk4") < stability_ceiling(grid, params, "if_rk4")


def test_dt_above_the_ceiling_is_rejected(grid, params):
    ceiling = stability_ceiling(grid, params)
    with pytest.raises(RangeError) as info:
        resolve_dt(grid, params, StepperConfig(dt=2.0 * ceiling))
    assert info.value.key == "dt"


def test_step_schedule():
    assert step_schedule(0.0, 1.0, 0.3) == pytest.approx([0.3, 0.3, 0.3, 0.1])
    assert step_schedule(0.0, 0.9, 0.3) == pytest.approx([0.3, 0.3, 0.3])
    assert step_schedule(1.0, 1.0, 0.1) == []
    assert step_schedule(2.0, 1.0, 0.1) == []


# ---------------------------------------------------------------------------
# Linear evolution
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("gamma", [0.0, 2.0])
def test_generator_eigenvalues_are_the_dispersion_roots(grid, gamma):
    params = PhysParams(1.0, 1.0, gamma)
    gen = generator(grid, params)
    xi = grid.wavenumbers[grid.holo_mask]
    plus, minus = dispersion_roots(params, xi)
    eig = np.linalg.eigvals(gen[grid.holo_mask])
    got = np.sort(eig.imag, axis=1)
    want = np.sort(np.stack([plus, minus], axis=1), axis=1)
    np.testing.assert_allclose(got, want, rtol=1e-10)
    np.testing.assert_allclose(eig.real, 0.0, atol=1e-8)


def test_propagator_is_the_matrix_exponential(grid, vortical):
    dt = 0.013
    prop = LinearPropagator(grid, vortical, dt)
    gen = generator(grid, vortical)
    for m in (-1, -5, -17, -31):
        i = grid.mode_index(m)
        np.testing.assert_allclose(prop.matrices[i], scipy.linalg.expm(dt * gen[i]), atol=1e-12)
    np.testing.assert_allclose(prop.matrices[0], np.eye(2))
    assert np.all(prop.matrices[grid.mode_index(3)] == 0.0)


@pytest.mark.parametrize("gamma", [0.0, 2.0])
def test_linear_step_conserves_linear_energy(grid, gamma):
    params = PhysParams(1.0, 1.0, gamma)
    state = random_smooth(grid, params, seed=5, decay_rate=0.3, eps=0.05, modes=16)
    e0 = linear_energy(state.W, state.Q, params.sigma, params.g)
    for _ in range(100):
        state = linear_step(state, 0.01)
    assert linear_energy(state.W, state.Q, params.sigma, params.g) == pytest.approx(e0, rel=1e-12)
    assert state.t == pytest.approx(1.0)


def test_single_mode_returns_after_one_period(grid, params):
    state = single_mode(grid, params, k=3, eps=1e-3)
    tau = dispersion_roots(params, np.array([-3.0]))[0][0]
    after = linear_step(state, 2 * np.pi / tau)
    np.testing.assert_allclose(_coeffs(after), _coeffs(state), atol=1e-15)


# ---------------------------------------------------------------------------
# Nonlinear schemes
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("scheme", ["if_rk4", "rk4"])
def test_zero_state_stays_at_rest(zero_state, scheme):
    out = step(zero_state, StepperConfig(scheme=scheme))
    assert np.max(np.abs(_coeffs(out))) == 0.0
    assert out.t > 0.0


@pytest.mark.parametrize("gamma", [0.0, 2.0])
def test_small_data_follow_the_linear_flow(grid, gamma):
    params = PhysParams(1.0, 1.0, gamma)
    state = random_smooth(grid, params, seed=6, decay_rate=0.5, eps=1e-8, modes=8)
    stepper = Stepper(grid, params, StepperConfig())
    nonlinear, linear = state, state
    for _ in range(10):
        nonlinear = stepper.step(nonlinear)
        linear = linear_step(linear, stepper.dt)
    np.testing.assert_allclose(_coeffs(nonlinear), _coeffs(linear), atol=1e-12)


def test_step_keeps_the_solution_holomorphic(small_state):
    stepper = Stepper(small_state.grid, small_state.params, StepperConfig(dt=1e-3))
    out = stepper.step(small_state)
    assert stepper.last_leak < 1e-12
    assert out.Q.mean == 0.0
    assert out.t == pytest.approx(1e-3)


def test_runs_are_deterministic(small_state):
    config = StepperConfig(dt=2e-3, t_end=0.02)
    a = run(small_state, config).final
    b = run(small_state, config).final
    assert np.array_equal(_coeffs(a), _coeffs(b))


def test_empty_run_returns_the_initial_state(small_state):
    seen = []
    result = run(small_state, StepperConfig(t_end=0.0), lambda i, s, leak: seen.append(i))
    assert result.final is small_state
    assert result.steps == 0
    assert seen == [0]


def test_observer_follows_the_stride(small_state):
    seen = []
    result = run(small_state, StepperConfig(dt=1e-3, t_end=0.007, diagnostics_stride=3),
                 lambda i, s, leak: seen.append(i))
    assert seen == [0, 3, 6, 7]
    assert result.steps == 7


def test_restart_from_checkpoint_is_bitwise(tmp_path, params):
    grid = PeriodicGrid(32)
    initial = random_smooth(grid, params, seed=7, decay_rate=0.5, eps=1e-2, modes=8)
    straight = run(initial, StepperConfig(dt=1e-3, t_end=0.04)).final

    half = run(initial, StepperConfig(dt=1e-3, t_end=0.02)).final
    resumed_from = read_checkpoint(write_checkpoint(half, tmp_path / "half.wvl"))
    resumed = run(resumed_from, StepperConfig(dt=1e-3, t_end=0.04)).final

    assert np.array_equal(_coeffs(resumed), _coeffs(straight))
    assert resumed.t == straight.t


def test_degenerate_surface_aborts_with_last_good_state(monkeypatch, small_state):
    calls = {"n": 0}
    real = timestepper.wq_tendency

    def failing(o, params, W, Q):
        calls["n"] += 1
        if calls["n"] == 9:
            raise DegenerateSurface(0.05, 0.1)
        return real(o, params, W, Q)

    monkeypatch.setattr(timestepper, "wq_tendency", failing)
    result = run(small_state, StepperConfig(dt=1e-3, t_end=0.01, diagnostics_stride=1))
    assert result.aborted
    assert result.steps == 2
    assert result.final.t == pytest.approx(2e-3)
    assert "degenerated" in result.reason


def test_surface_degenerating_between_strides_keeps_the_last_good_state(monkeypatch, small_state):
    grid = small_state.grid
    calls = {"n": 0}
    real = Stepper.advance

    def collapsing(self, u, h=None):
        calls["n"] += 1
        out = real(self, u, h)
        if calls["n"] == 2:
            out = np.zeros_like(out)
            out[grid.mode_index(-1), 0] = 0.95
        return out

    monkeypatch.setattr(Stepper, "advance", collapsing)
    seen = []
    result = run(small_state, StepperConfig(dt=1e-3, t_end=0.01, diagnostics_stride=10),
                 lambda i, s, leak: seen.append(i))
    assert result.aborted
    assert result.steps == 1
    assert result.final.t == pytest.approx(1e-3)
    assert result.final.W.coefficient(-1) != 0.95
    assert "degenerated" in result.reason
    assert seen == [0]


def test_energy_and_momentum_are_conserved(grid, params):
    initial = random_smooth(grid, params, seed=8, decay_rate=0.5, eps=1e-2, modes=8)
    e0, p0 = conserved(initial)
    final = run(initial, StepperConfig(dt=2e-3, t_end=0.2, diagnostics_stride=1000)).final
    e1, p1 = conserved(final)
    assert abs(e1 - e0) / abs(e0) <= 1e-6
    assert abs(p1 - p0) / max(abs(p0), abs(e0)) <= 1e-6
