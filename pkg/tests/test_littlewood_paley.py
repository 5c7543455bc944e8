"""Dyadic blocks, Besov / Zygmund / Sobolev norms and the control norms."""

import numpy as np
import pytest

from wavelab.errors import IndexOutOfRange
from wavelab.littlewood_paley import (
    besov_norm,
    bump,
    control_norms,
    decomposition_for,
    dyadic_block,
    holder_norm,
    product_norm,
    smooth_step,
    sobolev_norm,
    zygmund_norm,
)
from wavelab.spectral import ComplexField, PeriodicGrid


def _mode(grid: PeriodicGrid, m: int) -> ComplexField:
    c = np.zeros(grid.n_points, dtype=complex)
    c[grid.mode_index(m)] = 1.0
    return ComplexField(grid, c)


def test_smooth_step_limits():
    t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(smooth_step(t), [0.0, 0.0, 0.5, 1.0, 1.0])
    assert bump(np.array([0.0, 1.0]))[1] == 1.0
    assert bump(np.array([2.0, -3.0])).tolist() == [0.0, 0.0]


@pytest.mark.parametrize("n,period", [(64, 2 * np.pi), (256, 2 * np.pi), (128, 4 * np.pi)])
def test_blocks_form_a_partition_of_unity(n, period):
    dec = decomposition_for(PeriodicGrid(n, period))
    assert np.max(np.abs(dec.blocks.sum(axis=0) - 1.0)) <= 1e-13


def test_blocks_live_on_dyadic_annuli():
    grid = PeriodicGrid(256)
    dec = decomposition_for(grid)
    xi = np.abs(grid.wavenumbers)
    for k in range(1, dec.max_index):
        outside = (xi <= 2.0 ** (k - 1)) | (xi >= 2.0 ** (k + 1))
        assert np.all(dec.blocks[k][outside] == 0.0)


def test_block_index_out_of_range(grid):
    f = _mode(grid, -1)
    dyadic_block(f, decomposition_for(grid).max_index)
    with pytest.raises(IndexOutOfRange):
        dyadic_block(f, decomposition_for(grid).max_index + 1)
    with pytest.raises(IndexOutOfRange):
        dyadic_block(f, -1)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
def test_zygmund_norm_of_dyadic_modes_scales_as_two_to_ks(fine_grid, s):
    for k in range(0, 6):
        assert zygmund_norm(_mode(fine_grid, -(2**k)), s) == pytest.approx(2.0 ** (k * s), rel=1e-12)


def test_sobolev_norm_of_a_single_mode(grid):
    assert sobolev_norm(_mode(grid, -1), 1.0) == pytest.approx(np.sqrt(2 * np.pi * 2.0))
    assert sobolev_norm(_mode(grid, 0), 3.0) == pytest.approx(np.sqrt(2 * np.pi))


def test_product_norm_of_a_single_mode(grid):
    zero = ComplexField.zeros(grid)
    expected = np.sqrt(2 * np.pi * 2.0**0.5)
    assert product_norm((_mode(grid, -1), zero), 0.0, "H") == pytest.approx(expected)
    with pytest.raises(ValueError):
        product_norm((zero, zero), 0.0, "L")


def test_besov_two_two_is_equivalent_to_sobolev(fine_grid, make_field):
    for _ in range(5):
        f = make_field(fine_grid, modes=40)
        ratio = besov_norm(f, 1.0, 2.0, 2.0) / sobolev_norm(f, 1.0)
        assert 0.25 <= ratio <= 4.0


def test_besov_rejects_small_exponents(grid):
    with pytest.raises(ValueError):
        besov_norm(_mode(grid, -1), 1.0, 0.5, 2.0)


def test_norms_grow_with_the_index(grid, make_field):
    f = make_field(grid)
    assert sobolev_norm(f, 0.5) < sobolev_norm(f, 1.0) < sobolev_norm(f, 2.0)
    assert zygmund_norm(f, 0.5) < zygmund_norm(f, 2.5)
    assert holder_norm(f, 1.5) == zygmund_norm(f, 1.5)


def test_control_norms(zero_state, small_state):
    assert control_norms(zero_state) == (0.0, 0.0)
    big_a, big_b = control_norms(small_state)
    assert 0.0 < big_a <= big_b
    with pytest.raises(ValueError):
        control_norms(small_state, eps=0.0)
