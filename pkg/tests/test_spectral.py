"""Grid, fields, projections, multipliers and the linear dispersion relation."""

import numpy as np
import pytest

from wavelab.errors import GridMismatch, NotHolomorphic, PoleAtZeroMean
from wavelab.spectral import (
    ComplexField,
    HoloField,
    PeriodicGrid,
    antiderivative,
    apply_multiplier,
    dealias,
    derivative,
    dispersion_roots,
    dispersion_weight,
    dispersion_weight_dxi,
    fft_workers,
    hilbert,
    project_antiholo,
    project_holo,
    spectral_ops,
)
from wavelab.waterwave import PhysParams


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 3, 48, 100])
def test_grid_rejects_non_powers_of_two(n):
    with pytest.raises(ValueError):
        PeriodicGrid(n)


def test_grid_wavenumbers_follow_the_period():
    grid = PeriodicGrid(16, period=4 * np.pi)
    assert grid.fundamental == pytest.approx(0.5)
    assert list(grid.modes[:3]) == [0, 1, 2]
    assert grid.modes[grid.nyquist_index] == -8
    assert grid.wavenumbers[grid.mode_index(-3)] == pytest.approx(-1.5)


def test_cutoff_mode_uses_two_thirds(grid):
    assert grid.cutoff_mode() == 21
    mask = grid.dealias_mask()
    assert mask[grid.mode_index(21)] and mask[grid.mode_index(-21)]
    assert not mask[grid.mode_index(22)] and not mask[grid.nyquist_index]


def test_fft_workers_reads_environment(monkeypatch):
    monkeypatch.setenv("WAVE_LAB_THREADS", "3")
    assert fft_workers() == 3
    monkeypatch.setenv("WAVE_LAB_THREADS", "many")
    assert fft_workers() == 1
    monkeypatch.delenv("WAVE_LAB_THREADS")
    assert fft_workers() == 1


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


def test_values_round_trip(grid, make_field):
    f = make_field(grid)
    g = ComplexField.from_values(grid, f.values)
    np.testing.assert_allclose(g.coefficients, f.coefficients, atol=1e-14)


def test_coefficients_are_normalized(grid):
    f = ComplexField.from_function(grid, lambda a: 2.0 + np.exp(-3j * a))
    assert f.mean == pytest.approx(2.0)
    assert f.coefficient(-3) == pytest.approx(1.0)
    assert f.l2_norm() == pytest.approx(np.sqrt(2 * np.pi * 5.0))


def test_conj_and_real_parts(grid, make_field):
    f = make_field(grid)
    np.testing.assert_allclose(f.conj().values, np.conj(f.values), atol=1e-13)
    np.testing.assert_allclose(f.real().values, np.real(f.values), atol=1e-13)
    np.testing.assert_allclose(f.imag().values, np.imag(f.values), atol=1e-13)


def test_product_is_pointwise(grid, make_field):
    f, g = make_field(grid), make_field(grid)
    np.testing.assert_allclose((f * g).values, f.values * g.values, atol=1e-13)


def test_operations_on_different_grids_raise(grid):
    other = PeriodicGrid(32)
    with pytest.raises(GridMismatch):
        ComplexField.zeros(grid) + ComplexField.zeros(other)


def test_holo_field_rejects_positive_modes(grid):
    c = np.zeros(grid.n_points, dtype=complex)
    c[grid.mode_index(-2)] = 1.0
    HoloField(grid, c)
    c[grid.mode_index(1)] = 0.5
    with pytest.raises(NotHolomorphic):
        HoloField(grid, c)


# ---------------------------------------------------------------------------
# Projections and multipliers
# ---------------------------------------------------------------------------


def test_projections_split_a_field(grid, make_field):
    f = make_field(grid)
    holo, anti = project_holo(f), project_antiholo(f)
    rebuilt = holo + anti + ComplexField(grid, np.where(grid.modes == 0, f.coefficients, 0.0))
    np.testing.assert_allclose(rebuilt.coefficients, dealias(f, 1.0).coefficients, atol=1e-15)
    assert holo.mean == 0.0
    assert np.all(holo.coefficients[grid.modes > 0] == 0.0)


def test_hilbert_maps_cos_to_sin(grid):
    f = ComplexField.from_function(grid, lambda a: np.cos(3 * a))
    np.testing.assert_allclose(hilbert(f).values, np.sin(3 * grid.nodes), atol=1e-14)


def test_half_identity_minus_i_hilbert_is_holomorphic_projection(grid, make_field):
    f = make_field(grid)
    f = f - ComplexField(grid, np.where(grid.modes == 0, f.coefficients, 0.0))
    half = (f - hilbert(f) * 1j) * 0.5
    np.testing.assert_allclose(half.coefficients, project_holo(f).coefficients, atol=1e-13)


def test_derivative_multiplier(grid):
    f = ComplexField.from_function(grid, lambda a: np.sin(3 * a))
    df = apply_multiplier(f, derivative())
    np.testing.assert_allclose(df.values, 3 * np.cos(3 * grid.nodes), atol=1e-13)


def test_antiderivative_needs_zero_mean(grid):
    f = ComplexField.from_function(grid, lambda a: 1.0 + np.cos(a))
    with pytest.raises(PoleAtZeroMean):
        apply_multiplier(f, antiderivative())
    g = ComplexField.from_function(grid, np.cos)
    np.testing.assert_allclose(apply_multiplier(g, antiderivative()).values, np.sin(grid.nodes), atol=1e-14)


def test_dealias_zeroes_upper_third(grid, make_field):
    f = make_field(grid, modes=30)
    d = dealias(f)
    assert d.coefficient(21) == f.coefficient(21)
    assert d.coefficient(22) == 0.0 and d.coefficient(-22) == 0.0


def test_dealiased_product_matches_the_zero_padded_product(grid, make_field):
    cutoff = grid.cutoff_mode()
    f, g = make_field(grid, modes=cutoff), make_field(grid, modes=cutoff)
    padded = PeriodicGrid(2 * grid.n_points, grid.period)
    ms = np.arange(-cutoff, cutoff + 1)

    def pad(h):
        c = np.zeros(padded.n_points, dtype=complex)
        c[[padded.mode_index(m) for m in ms]] = [h.coefficient(m) for m in ms]
        return ComplexField(padded, c)

    exact = pad(f) * pad(g)
    got = dealias(f * g)
    np.testing.assert_allclose(
        [got.coefficient(m) for m in ms], [exact.coefficient(m) for m in ms], atol=1e-13
    )
    assert np.all(got.coefficients[~grid.dealias_mask()] == 0.0)


def test_spectral_ops_projections_sum_to_dealiased(grid, make_field):
    o = spectral_ops(grid)
    u = make_field(grid, modes=30).values
    np.testing.assert_allclose(o.holo(u) + o.antiholo(u), o.dealias(u), atol=1e-14)


def test_reproject_drops_positive_modes_only(grid, make_field):
    o = spectral_ops(grid)
    f = make_field(grid)
    kept = grid.forward(o.reproject(f.values))
    assert np.allclose(kept[grid.modes > 0], 0.0, atol=1e-14)
    np.testing.assert_allclose(kept[grid.modes <= 0][1:], f.coefficients[grid.modes <= 0][1:], atol=1e-14)
    assert kept[0] == pytest.approx(f.mean)


# ---------------------------------------------------------------------------
# Dispersion
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("g,sigma,gamma", [(1.0, 1.0, 0.0), (1.0, 1.0, 2.0), (0.0, 1.0, 1.0), (1.0, 0.1, 0.5)])
def test_dispersion_roots_solve_the_relation(g, sigma, gamma):
    params = PhysParams(g, sigma, gamma)
    xi = -np.arange(1.0, 20.0)
    for tau in dispersion_roots(params, xi):
        residual = tau**2 + gamma * tau + g * xi + sigma * xi**3
        np.testing.assert_allclose(residual / (1.0 + np.abs(xi) ** 3), 0.0, atol=1e-12)


def test_dispersion_weight_derivative_matches_differences():
    params = PhysParams(1.0, 0.5, 1.5)
    ell = dispersion_weight(params, "L")
    xi = np.array([-7.0, -2.5, 0.75, 4.0])
    h = 1e-6
    fd = (ell(xi + h) - ell(xi - h)) / (2 * h)
    np.testing.assert_allclose(dispersion_weight_dxi(params)(xi), fd, rtol=1e-7)


def test_m_weight_has_a_pole_at_zero(grid):
    params = PhysParams()
    f = ComplexField.from_function(grid, lambda a: 1.0 + np.exp(-1j * a))
    with pytest.raises(PoleAtZeroMean):
        apply_multiplier(f, dispersion_weight(params, "M"))
    with pytest.raises(ValueError):
        dispersion_weight(params, "X")
