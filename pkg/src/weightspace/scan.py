"""Finite-grid proxies for limits and suprema over unbounded domains.

A supremum over ``[0, inf)`` is reported as *stabilized* when the running
maximum along an increasing grid does not change over the final decade
of that grid, i.e. the maximizer sits at or below ``grid[-1] / 10``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def log_grid(r_max: float, n: int, r_min: float = 1e-2, include_zero: bool = True) -> np.ndarray:
    grid = np.geomspace(r_min, r_max, n)
    if include_zero:
        grid = np.concatenate([[0.0], grid])
    return grid


@dataclass
class SupScan:
    value: float
    argmax: int
    maximizer: float
    stabilized: bool


def stabilized_max(values: np.ndarray, grid: np.ndarray) -> SupScan:
    """Max of ``values`` along ``grid`` plus the final-decade stabilization flag.

    Ties go to the first (smallest) grid point.
    """
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    i = int(np.argmax(values))
    top = grid[-1]
    return SupScan(
        value=float(values[i]),
        argmax=i,
        maximizer=float(grid[i]),
        stabilized=bool(grid[i] <= top / 10.0),
    )


def trend_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of ``y`` against ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return 0.0
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xc, y - y.mean()) / denom)


@dataclass
class TailMin:
    """Tail-window minimum used as a liminf proxy."""

    proxy: float
    noise: float
    trend_slope: float
    witness: float


def tail_min(x: np.ndarray, terms: np.ndarray) -> TailMin:
    terms = np.asarray(terms, dtype=float)
    i = int(np.argmin(terms))
    return TailMin(
        proxy=float(terms[i]),
        noise=float(terms.max() - terms.min()),
        trend_slope=trend_slope(x, terms),
        witness=float(np.asarray(x)[i]),
    )
