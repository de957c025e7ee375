"""Beta-mixture densities on [0, 1] and the integrated squared loss."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import Rng

__all__ = [
    "BetaMixture",
    "beta_mixture_pdf",
    "integrated_squared_loss",
    "sample_beta_mixture",
]

_MIN_GRID = 512
_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class BetaMixture:
    """Weighted mixture of Beta(a, b) components; weights must sum to 1."""

    components: tuple[tuple[float, float, float], ...]  # (alpha, beta, weight)

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        for a, b, w in self.components:
            if a <= 0.0 or b <= 0.0:
                raise ValueError(f"Beta parameters must be positive, got ({a}, {b})")
            if w <= 0.0:
                raise ValueError(f"component weight must be positive, got {w}")
        total = sum(w for _, _, w in self.components)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {total}, expected 1")

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.components])


def beta_mixture_pdf(mix: BetaMixture, x):
    """Mixture density; zero outside [0, 1].

    Each Beta normalizer exp(lgamma(a+b) - lgamma(a) - lgamma(b)) is
    evaluated in log space so extreme shape parameters stay finite.
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.zeros_like(x_arr)
    inside = (x_arr >= 0.0) & (x_arr <= 1.0)
    xi = x_arr[inside]
    with np.errstate(divide="ignore", invalid="ignore"):
        for a, b, w in mix.components:
            ln_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
            # edge powers: x^(a-1) at x=0 is 1 when a=1, +inf when a<1, 0 when a>1
            term = np.exp(ln_norm) * xi ** (a - 1.0) * (1.0 - xi) ** (b - 1.0)
            out[inside] += w * term
    return float(out[0]) if np.ndim(x) == 0 else out


def sample_beta_mixture(rng: Rng, mix: BetaMixture, n: int) -> np.ndarray:
    """Draw n points: pick a component by weight, then draw from its Beta."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    cumw = np.cumsum(mix.weights)
    cumw[-1] = 1.0  # guard the last edge against rounding
    u = np.atleast_1d(rng.uniform(n))
    idx = np.searchsorted(cumw, u, side="right")
    out = np.empty(n, dtype=np.float64)
    for k, (a, b, _) in enumerate(mix.components):
        mask = idx == k
        cnt = int(mask.sum())
        if cnt:
            out[mask] = rng.beta(a, b, cnt)
    return out


def integrated_squared_loss(f_true, f_hat, grid) -> float:
    """Composite-trapezoid integral of (f_true - f_hat)^2 over the grid on [0, 1].

    ``f_true`` and ``f_hat`` may be callables or arrays of values already
    evaluated on the grid, which must have at least 512 points.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < _MIN_GRID:
        raise ValueError(f"grid must be 1-d with at least {_MIN_GRID} points, got {grid.shape}")
    if grid[0] < 0.0 or grid[-1] > 1.0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be increasing and inside [0, 1]")
    ft = np.asarray(f_true(grid) if callable(f_true) else f_true, dtype=np.float64)
    fh = np.asarray(f_hat(grid) if callable(f_hat) else f_hat, dtype=np.float64)
    if ft.shape != grid.shape or fh.shape != grid.shape:
        raise ValueError("density values must match the grid shape")
    sq = (ft - fh) ** 2
    return float(((sq[1:] + sq[:-1]) / 2.0) @ np.diff(grid))
