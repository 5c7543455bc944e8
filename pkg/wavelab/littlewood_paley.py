"""Dyadic frequency decomposition and the norms built on it.

The bump profile is the standard C^∞ step assembled from ``exp(-1/t)``::

    S(t)   = f(t) / (f(t) + f(1 - t)),   f(t) = exp(-1/t) for t > 0, else 0
    φ(ξ)   = 1 - S(|ξ| - 1)              (φ = 1 on |ξ| ≤ 1, φ = 0 on |ξ| ≥ 2)
    P_0    = φ(ξ)
    P_k    = φ(ξ/2^k) - φ(ξ/2^{k-1})     (1 ≤ k < K)
    P_K    = 1 - φ(ξ/2^{K-1})            (K: smallest with 2^K ≥ max|ξ|)

so P_k lives on 2^{k-1} ≤ |ξ| ≤ 2^{k+1} and the blocks telescope to one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING, Union

import numpy as np

from wavelab.errors import IndexOutOfRange
from wavelab.spectral import ComplexField, PeriodicGrid

if TYPE_CHECKING:
    from wavelab.waterwave import DiffState, WaveState

logger = logging.getLogger(__name__)

DEFAULT_ZYGMUND_EPS: float = 1.0 / 16.0


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1."""
    t = np.asarray(t, dtype=float)

    def f(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(-1.0 / x[pos])
        return out

    a = f(t)
    b = f(1.0 - t)
    return a / (a + b)


def bump(xi: np.ndarray) -> np.ndarray:
    """φ(ξ): 1 on |ξ| ≤ 1, 0 on |ξ| ≥ 2."""
    return 1.0 - smooth_step(np.abs(np.asarray(xi, dtype=float)) - 1.0)


# ---------------------------------------------------------------------------
# DyadicDecomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DyadicDecomposition:
    """Littlewood–Paley blocks {P_k} sampled on a grid's wavenumbers."""

    grid: PeriodicGrid

    @cached_property
    def max_index(self) -> int:
        top = float(np.max(np.abs(self.grid.wavenumbers)))
        return max(1, int(np.ceil(np.log2(top) - 1e-12)))

    @cached_property
    def blocks(self) -> np.ndarray:
        """Array of shape (K+1, n_points); row k is the multiplier P_k."""
        xi = self.grid.wavenumbers
        big_k = self.max_index
        rows = [bump(xi)]
        for k in range(1, big_k):
            rows.append(bump(xi / 2.0**k) - bump(xi / 2.0 ** (k - 1)))
        rows.append(1.0 - bump(xi / 2.0 ** (big_k - 1)))
        out = np.vstack(rows)
        out.setflags(write=False)
        return out

    def block_multiplier(self, k: int) -> np.ndarray:
        if not 0 <= k <= self.max_index:
            raise IndexOutOfRange(
                f"Dyadic block {k} outside 0..{self.max_index} for n={self.grid.n_points}."
            )
        return self.blocks[k]

    def block(self, f: ComplexField, k: int) -> ComplexField:
        self.grid.check_same(f.grid)
        return ComplexField(f.grid, f.coefficients * self.block_multiplier(k))

    def block_values(self, f: ComplexField) -> np.ndarray:
        """Samples of every block at once, shape (K+1, n_points)."""
        self.grid.check_same(f.grid)
        return self.grid.inverse(self.blocks * f.coefficients[None, :])


@lru_cache(maxsize=32)
def decomposition_for(grid: PeriodicGrid) -> DyadicDecomposition:
    return DyadicDecomposition(grid)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def dyadic_block(f: ComplexField, k: int) -> ComplexField:
    """P_k f. Raises :class:`IndexOutOfRange` for k outside the grid's range."""
    return decomposition_for(f.grid).block(f, k)


def _lp(values: np.ndarray, p: float, period: float) -> np.ndarray:
    mags = np.abs(values)
    if np.isinf(p):
        return mags.max(axis=-1)
    return (period * np.mean(mags**p, axis=-1)) ** (1.0 / p)


def besov_norm(f: ComplexField, s: float, p: float, q: float) -> float:
    """‖(2^{ks}‖P_k f‖_{L^p})_k‖_{l^q} evaluated on the grid."""
    if not (p >= 1 and q >= 1):
        raise ValueError(f"Besov exponents must lie in [1, inf], got p={p}, q={q}.")
    blocks = decomposition_for(f.grid).block_values(f)
    weights = 2.0 ** (s * np.arange(blocks.shape[0]))
    seq = weights * _lp(blocks, p, f.grid.period)
    if np.isinf(q):
        return float(seq.max())
    return float(np.sum(seq**q) ** (1.0 / q))


def zygmund_norm(f: ComplexField, s: float) -> float:
    """C^s_* = B^s_{∞,∞}."""
    return besov_norm(f, s, np.inf, np.inf)


def holder_norm(f: ComplexField, r: float) -> float:
    """W^{r,∞} evaluated through its Zygmund surrogate."""
    return zygmund_norm(f, r)


def sobolev_norm(f: ComplexField, s: float) -> float:
    """(period · Σ (1+ξ²)^s |f̂(ξ)|²)^{1/2}."""
    weight = (1.0 + f.grid.wavenumbers**2) ** s
    return float(np.sqrt(f.grid.period * np.sum(weight * np.abs(f.coefficients) ** 2)))


def product_norm(pair: tuple[ComplexField, ComplexField], s: float, flavor: str = "H") -> float:
    """‖f‖ at index s+½ plus ‖g‖ at index s, in H (``"H"``) or C_* (``"W"``)."""
    f, g = pair
    if flavor == "H":
        return sobolev_norm(f, s + 0.5) + sobolev_norm(g, s)
    if flavor == "W":
        return zygmund_norm(f, s + 0.5) + zygmund_norm(g, s)
    raise ValueError(f"flavor must be 'H' or 'W', got {flavor!r}.")


def control_norms(
    state: Union["WaveState", "DiffState"], eps: float = DEFAULT_ZYGMUND_EPS
) -> tuple[float, float]:
    """The pair (𝒜, ℬ) of Zygmund control norms of (𝐖, R)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}.")
    diff = state.differentiate() if hasattr(state, "differentiate") else state
    w, r = diff.Wa, diff.R
    gamma = abs(diff.params.gamma)
    big_a = zygmund_norm(w, 1.0 + eps) + zygmund_norm(r, 0.5) + gamma * zygmund_norm(w, 0.5)
    big_b = (
        zygmund_norm(w, 1.5)
        + zygmund_norm(r, 1.0 + eps)
        + gamma * zygmund_norm(w, 1.0 + eps)
        + gamma * zygmund_norm(r, 0.5)
    )
    return big_a, big_b
