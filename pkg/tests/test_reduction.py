"""Wahlén variables, symmetrizers, equivalence relations and the flattening map."""

import numpy as np
import pytest

from wavelab.experiments.symbol_check import RELATION_BOUNDS
from wavelab.paracalc import wave_packet
from wavelab.presets import wavy_state
from wavelab.reduction import (
    Flattening,
    build_phi,
    build_symmetrizers,
    commutator_defect,
    elliptic_weight,
    equivalence_residual,
    flatten,
    paralinearization_gap,
    relation_operators,
    symbols_lambda_k,
    unwahlen,
    wahlen,
    weighted_phi,
)
from wavelab.spectral import HoloField, PeriodicGrid, dispersion_weight, project_holo
from wavelab.waterwave import DiffState, PhysParams, compute_aux

LEVELS = range(3, 6)


def _flat(grid: PeriodicGrid, params: PhysParams) -> DiffState:
    zero = HoloField(grid, np.zeros(grid.n_points))
    return DiffState(zero, zero, params)


# ---------------------------------------------------------------------------
# Wahlén variables
# ---------------------------------------------------------------------------


def test_wahlen_round_trip(grid, vortical):
    diff = wavy_state(grid, vortical, 0.2)
    eta, zeta = wahlen(diff)
    back = unwahlen(eta, zeta, vortical)
    np.testing.assert_allclose(back.R.coefficients, diff.R.coefficients, atol=1e-14)
    np.testing.assert_allclose(back.Wa.coefficients, diff.Wa.coefficients)


def test_wahlen_without_vorticity_keeps_r(flat_diff):
    eta, zeta = wahlen(flat_diff)
    np.testing.assert_allclose(zeta.coefficients, flat_diff.R.coefficients)
    assert eta is flat_diff.Wa


# ---------------------------------------------------------------------------
# Symbols and symmetrizers
# ---------------------------------------------------------------------------


def test_flat_symmetrizers(grid, vortical):
    sym = build_symmetrizers(_flat(grid, vortical))
    xi = np.array([-9.0, -4.0, -1.0, 2.0, 7.0])
    ell = dispersion_weight(vortical, "L")(xi)
    np.testing.assert_allclose(sym.p_half(xi), np.broadcast_to(-ell / xi, (grid.n_points, xi.size)), atol=1e-13)
    assert np.max(np.abs(sym.p_minus_half(xi))) == 0.0
    np.testing.assert_allclose(sym.c(xi), 1.0)
    np.testing.assert_allclose(sym.q(xi), 1.0)


def test_flat_k_symbol(grid, params):
    _, k = symbols_lambda_k(_flat(grid, params))
    xi = np.array([-3.0, 5.0])
    np.testing.assert_allclose(k(xi)[0], -1j * (params.sigma * xi**2 + params.g), atol=1e-13)
    assert k.order == 2.0


@pytest.mark.parametrize("gamma", [0.0, 2.0])
def test_relations_vanish_on_a_flat_surface(grid, gamma):
    rel = relation_operators(_flat(grid, PhysParams(1.0, 1.0, gamma)))
    for k in (2, 3, 4):
        u = project_holo(wave_packet(grid, k))
        assert rel.first(u).l2_norm() < 1e-10
        assert rel.second(u).l2_norm() < 1e-10


def test_equivalence_residual_rejects_unknown_relation(grid, params):
    with pytest.raises(ValueError):
        equivalence_residual(_flat(grid, params), "third", LEVELS)


def test_phi_of_a_flat_surface_is_the_real_part_of_r(flat_diff):
    phi = build_phi(flat_diff, build_symmetrizers(flat_diff))
    np.testing.assert_allclose(phi.values.real, flat_diff.R.values.real, atol=1e-13)
    np.testing.assert_allclose(phi.values.imag, 0.0, atol=1e-13)


def test_weighted_phi_of_a_flat_surface_is_the_ell_multiplier(flat_diff):
    sym = build_symmetrizers(flat_diff)
    ell = dispersion_weight(flat_diff.params, "L")(flat_diff.grid.wavenumbers)
    phi = build_phi(flat_diff, sym)
    got = weighted_phi(flat_diff, sym, 1.5)
    np.testing.assert_allclose(got.coefficients, ell * phi.coefficients, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("s", [0.0, -1.0])
def test_elliptic_weight_needs_positive_index(grid, params, s):
    with pytest.raises(ValueError):
        elliptic_weight(build_symmetrizers(_flat(grid, params)), s)


@pytest.mark.parametrize("s", [0.5, 1.5, 3.0])
def test_elliptic_weight_commutes_with_c_ell(grid, params, s):
    sym = build_symmetrizers(wavy_state(grid, params, 0.2))
    assert elliptic_weight(sym, s).order == s
    assert commutator_defect(sym, s) <= 1e-10


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------


def test_flattening_a_flat_surface(flat_diff):
    flat = flatten(flat_diff)
    assert flat.slope == pytest.approx(1.0)
    r = flat_diff.R.values.real
    np.testing.assert_allclose(flat.b_tilde.values.real, r + r[0], atol=1e-12)


@pytest.mark.parametrize("gamma", [0.0, 2.0])
def test_flattening_at_rest_keeps_b_exactly(grid, gamma):
    zero = HoloField(grid, np.zeros(grid.n_points))
    rest = DiffState(zero, zero, PhysParams(1.0, 1.0, gamma))
    flat = flatten(rest)
    b_low = compute_aux(rest).b_gamma.values.real
    assert flat.b_tilde_ramp == 0.0
    assert np.max(np.abs(flat.kappa - grid.nodes)) <= 1e-12
    np.testing.assert_allclose(flat.b_tilde_values, b_low, atol=1e-14)


def test_flattening_of_a_wavy_surface(grid, vortical):
    flat = flatten(wavy_state(grid, vortical, 0.2))
    assert flat.slope > 1.0
    assert flat.image_grid.period == pytest.approx(flat.slope * grid.period)
    assert flat.inversion_defect() <= 1e-11
    assert flat.chain_rule_defect() <= 1e-10
    assert flat.b_tilde.grid is flat.image_grid
    ramp = flat.b_tilde_ramp * flat.image_grid.nodes
    np.testing.assert_allclose(flat.b_tilde.values.real + ramp, flat.b_tilde_values, atol=1e-12)


def test_b_tilde_ramp_is_kept_out_of_the_expansion(grid):
    """A uniformly stretching cell: ∂_tχ = 0.3·α with χ = α."""
    one = np.zeros(grid.n_points, dtype=complex)
    one[0] = 1.0
    zeros = np.zeros(grid.n_points, dtype=complex)
    flat = Flattening(
        grid=grid,
        slope=1.0,
        chi_coeffs=zeros,
        jhalf_coeffs=one,
        chi_t_slope=0.3,
        chi_t_coeffs=zeros,
        b_coeffs=zeros,
    )
    assert flat.b_tilde_ramp == pytest.approx(0.3)
    np.testing.assert_allclose(flat.b_tilde_values, 0.3 * grid.nodes, atol=1e-12)
    assert np.max(np.abs(flat.b_tilde.coefficients)) <= 1e-12


# ---------------------------------------------------------------------------
# Order checks on a wavy surface
# ---------------------------------------------------------------------------


@pytest.mark.slow
def test_paralinearization_removes_the_top_order(fine_grid, params):
    principal, source = paralinearization_gap(wavy_state(fine_grid, params, 0.2), LEVELS)
    assert principal == pytest.approx(1.0, abs=0.3)
    assert principal - source >= 0.2


@pytest.mark.slow
def test_equivalence_relations_lose_an_order(params):
    state = wavy_state(PeriodicGrid(1024), params, 0.2)
    sym = build_symmetrizers(state)
    for which, bound in RELATION_BOUNDS.items():
        assert equivalence_residual(state, which, range(4, 9), sym) <= bound
