"""Log-radius grids, sampled radial functions, and grid numerics.

Everything downstream works in s = ln r on uniform grids: potential couplings
V(r)*r^2 become bounded coefficients and model solutions become exponentials,
so a uniform step is equally accurate across many decades of radius.

The composite quadrature integrates the degree-5 interpolant through a 6-node
stencil over each interval (order 6); cumulative sums give running integrals.
Interpolation of sampled functions uses the same 6-node stencils.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import WindowTooSmall

__all__ = [
    "LogGrid",
    "RadialFunction",
    "default_grid",
    "cumulative_integral",
    "integral",
    "interp_log",
    "fit_log_slope",
    "fd_log_derivatives",
]

DEFAULT_R_MIN = 1e-6
DEFAULT_R_MAX = 1e6
DEFAULT_NODES = 4001


def default_grid(r_min: float = DEFAULT_R_MIN, r_max: float = DEFAULT_R_MAX,
                 count: int = DEFAULT_NODES) -> "LogGrid":
    """The standard working grid: 4001 log-uniform nodes over [1e-6, 1e6]."""
    return LogGrid.from_radii(r_min, r_max, count)


@dataclass(frozen=True)
class LogGrid:
    """Uniform grid in s = ln r."""

    s_min: float
    s_max: float
    count: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 nodes, got {self.count}")
        if not self.s_max > self.s_min:
            raise ValueError("grid requires s_max > s_min")
        object.__setattr__(
            self, "nodes", np.linspace(self.s_min, self.s_max, self.count)
        )

    @staticmethod
    def from_radii(r_min: float, r_max: float, count: int) -> "LogGrid":
        return LogGrid(float(np.log(r_min)), float(np.log(r_max)), count)

    @property
    def h(self) -> float:
        return (self.s_max - self.s_min) / (self.count - 1)

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.nodes)

    def nearest_index(self, s: float) -> int:
        j = int(round((s - self.s_min) / self.h))
        return min(max(j, 0), self.count - 1)

    def prefix(self, j: int) -> "LogGrid":
        """Sub-grid over the first j+1 nodes (same spacing)."""
        if not 1 <= j < self.count:
            raise ValueError(f"prefix index {j} out of range")
        return LogGrid(self.s_min, float(self.nodes[j]), j + 1)

    def refined(self, factor: int = 2) -> "LogGrid":
        return LogGrid(self.s_min, self.s_max, (self.count - 1) * factor + 1)

    def key(self):
        return (self.s_min, self.s_max, self.count)


@dataclass
class RadialFunction:
    """Samples of a radial function on a log grid.

    Exponent tags record the power-law behavior at the grid ends and drive
    analytic tail corrections in quadratures. They come from end-window fits
    or from structural shifts of fitted tags (a factor r^a shifts a tag by
    a), never from guesses.
    """

    grid: LogGrid
    values: np.ndarray
    origin_exponent: Optional[float] = None
    infinity_exponent: Optional[float] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.count,):
            raise ValueError("values shape does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("radial function values must be finite")

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def with_fitted_tags(self, window: int = 8) -> "RadialFunction":
        """Return a copy tagged with end-window power-law exponents.

        Ends where the samples vanish (relative to the overall scale) are
        tagged None together with near-zero values; quadratures then use a
        zero tail.
        """
        scale = np.max(np.abs(self.values))
        if scale == 0.0:
            return RadialFunction(self.grid, self.values, None, None)
        tags = []
        for sl in (slice(0, window), slice(self.grid.count - window, None)):
            v = self.values[sl]
            s = self.grid.nodes[sl]
            if np.all(v > 0):
                slope, _, _ = fit_log_slope(s, np.log(v))
                tags.append(float(slope))
            elif np.all(v < 0):
                slope, _, _ = fit_log_slope(s, np.log(-v))
                tags.append(float(slope))
            else:
                tags.append(None)
        return RadialFunction(self.grid, self.values, tags[0], tags[1])

    def scaled(self, factor: float) -> "RadialFunction":
        return RadialFunction(self.grid, factor * self.values,
                              self.origin_exponent, self.infinity_exponent)


def _interval_weight_table() -> np.ndarray:
    """Weights integrating the quintic through nodes {0..5} over [p, p+1]."""
    table = np.empty((5, 6))
    powers = np.arange(6)
    A = np.vander(np.arange(6.0), 6, increasing=True).T  # A[m, i] = i**m
    for p in range(5):
        rhs = ((p + 1.0) ** (powers + 1) - float(p) ** (powers + 1)) / (powers + 1)
        table[p] = np.linalg.solve(A, rhs)
    return table


_W = _interval_weight_table()


def _interval_sums(g: np.ndarray, h: float) -> np.ndarray:
    """Order-6 integral over each grid interval of sampled values g."""
    n = g.shape[0]
    if n < 6:
        raise WindowTooSmall(f"quadrature needs at least 6 nodes, got {n}")
    T = np.empty(n - 1)
    # interior intervals j = 2 .. n-4 use the stencil starting at j-2
    win = np.lib.stride_tricks.sliding_window_view(g, 6)
    T[2:n - 3] = win @ _W[2]
    T[0] = g[0:6] @ _W[0]
    T[1] = g[0:6] @ _W[1]
    T[n - 3] = g[n - 6:n] @ _W[3]
    T[n - 2] = g[n - 6:n] @ _W[4]
    return h * T


def cumulative_integral(g: np.ndarray, h: float) -> np.ndarray:
    """Running integral C[j] = int_{s_0}^{s_j} g ds on a uniform grid."""
    T = _interval_sums(np.asarray(g, dtype=float), h)
    return np.concatenate(([0.0], np.cumsum(T)))


def upper_cumulative_integral(g: np.ndarray, h: float) -> np.ndarray:
    """Upper running integral U[j] = int_{s_j}^{s_max} g ds.

    Summed from the far end inward so that small upper tails of integrands
    spanning many decades are not lost to cancellation.
    """
    T = _interval_sums(np.asarray(g, dtype=float), h)
    return np.concatenate((np.cumsum(T[::-1])[::-1], [0.0]))


def integral(g: np.ndarray, h: float) -> float:
    return float(np.sum(_interval_sums(np.asarray(g, dtype=float), h)))


_LAGRANGE_DENOM = np.array([-120.0, 24.0, -12.0, 12.0, -24.0, 120.0])


def interp_log(f: RadialFunction, s_targets) -> np.ndarray:
    """Evaluate sampled values at arbitrary s by local quintic interpolation."""
    s = np.atleast_1d(np.asarray(s_targets, dtype=float))
    grid = f.grid
    n = grid.count
    if n < 6:
        raise WindowTooSmall("interpolation needs at least 6 nodes")
    x = (s - grid.s_min) / grid.h
    base = np.clip(np.floor(x).astype(int) - 2, 0, n - 6)
    t = x - base  # position within the 6-node stencil, in [0, 5]
    idx = base[:, None] + np.arange(6)[None, :]
    vals = f.values[idx]
    diffs = t[:, None] - np.arange(6)[None, :]
    exact = np.abs(diffs) < 1e-12
    diffs_safe = np.where(exact, 1.0, diffs)
    full = np.prod(diffs_safe, axis=1)
    basis = full[:, None] / diffs_safe / _LAGRANGE_DENOM[None, :]
    out = np.sum(basis * vals, axis=1)
    hit = exact.any(axis=1)
    if np.any(hit):
        out[hit] = np.sum(np.where(exact[hit], vals[hit], 0.0), axis=1)
    return out if np.ndim(s_targets) else float(out[0])


def fit_log_slope(s: np.ndarray, ln_y: np.ndarray):
    """Least-squares line ln_y = slope*s + intercept; returns max |residual|."""
    A = np.column_stack([s, np.ones_like(s)])
    coef, *_ = np.linalg.lstsq(A, ln_y, rcond=None)
    resid = ln_y - A @ coef
    return coef[0], coef[1], float(np.max(np.abs(resid)))


def fd_log_derivatives(values: np.ndarray, h: float):
    """Fourth-order central first/second s-derivatives on interior nodes.

    Returns (d1, d2, sl) where the arrays cover the full grid but are valid
    only on the slice sl (two nodes trimmed at each end).
    """
    n = values.shape[0]
    if n < 5:
        raise WindowTooSmall("finite differences need at least 5 nodes")
    d1 = np.zeros(n)
    d2 = np.zeros(n)
    v = values
    d1[2:-2] = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
    d2[2:-2] = (-v[4:] + 16 * v[3:-1] - 30 * v[2:-2] + 16 * v[1:-3] - v[:-4]) / (
        12 * h * h
    )
    return d1, d2, slice(2, n - 2)
