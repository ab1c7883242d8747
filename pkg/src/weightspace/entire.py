"""Radial zero sets whose canonical product tracks w(|z|/sigma).

Zeros are grouped into *rings*: ``m`` simple zeros equally spaced on the
circle of radius ``r``.  A ring contributes ``ln|1 - (z/r)**m|`` to
``ln|N(z)|``.  Two layouts are provided:

* ``banded``: consecutive radii ``mu_k`` whose log-spread is small are
  merged into one ring at their geometric mean radius, so a band of ``m``
  radii carries ``m`` zeros and ``ln|N|`` grows like ``w``.
* ``mirror``: one ring ``{+mu_k, -mu_k}`` per radius, i.e. the factor
  ``1 - z**2/mu_k**2``.  Even and real on the real axis; its zero count is
  twice ``n(r)``, so ``ln|N|`` grows like ``2 w``.

The zero set of N is defined by all ``K`` breakpoints of the weight; ``J``
truncates the product and the remaining rings give a rigorous bound on
the truncation error at any ``|z|`` below them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, TruncationError
from .reports import FAIL, PASS
from .weights import WeightFunction, counting_n, w_value

LAYOUTS = ("banded", "mirror")
DEFAULT_BUDGET = 4.0


@dataclass(eq=False)
class ZeroSet:
    """Zeros of a truncated canonical product.

    ``radii`` are the breakpoint radii ``sigma * M_k/M_{k-1}`` for
    ``k = 1..J``; ``rings`` are the ``(radius, multiplicity)`` pairs that are
    actually multiplied, and ``tail_rings`` the ones cut off by truncation.
    """

    radii: np.ndarray
    sigma: float
    layout: str
    rings: np.ndarray
    tail_rings: np.ndarray
    d: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def J(self) -> int:
        return int(self.radii.size)

    @property
    def symmetric(self) -> bool:
        return self.layout == "mirror"

    @property
    def n_zeros(self) -> int:
        return int(self.rings[:, 1].sum()) if self.rings.size else 0

    def zeros(self) -> np.ndarray:
        out = [r * np.exp(2j * np.pi * np.arange(int(m)) / m) for r, m in self.rings]
        return np.concatenate(out) if out else np.zeros(0, dtype=complex)

    def admissible_radius(self) -> float:
        """``mu_{floor(0.6 J)}``, the cap on honest evaluation radii."""
        i = max(1, int(np.floor(0.6 * self.J)))
        return float(self.radii[i - 1])

    def frequencies(self) -> np.ndarray:
        """Real frequencies ``+-mu_k`` for exponential-sum fitting."""
        return np.concatenate([self.radii, -self.radii])


def make_bands(mu: np.ndarray, budget: float = DEFAULT_BUDGET) -> list[tuple[int, int]]:
    """Greedy ``(start, size)`` bands: grow while ``(size+1) * ln(mu_end/mu_start) <= budget``."""
    bands = []
    k = 0
    lmu = np.log(mu)
    n = mu.size
    while k < n:
        m = 1
        while k + m < n and (m + 1) * (lmu[k + m] - lmu[k]) <= budget:
            m += 1
        bands.append((k, m))
        k += m
    return bands


def place_zeros(wf: WeightFunction, sigma: float = 1.0, J: int = 500, layout: str = "banded",
                budget: float = DEFAULT_BUDGET, d: float | None = None) -> ZeroSet:
    """Zero set with radii ``sigma * exp(t_k)``, ``k = 1..J``.

    In the banded layout only bands lying wholly inside ``1..J`` are used,
    so the product for a larger J extends the one for a smaller J.
    """
    if not sigma > 0:
        raise InputError("sigma must be positive")
    if int(J) != J or J < 1:
        raise InputError("J must be a positive integer")
    if J > wf.K:
        raise InputError(f"J={J} exceeds K={wf.K}")
    if layout not in LAYOUTS:
        raise InputError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")
    mu_all = sigma * np.exp(wf.t)
    radii = mu_all[:J].copy()
    if layout == "mirror":
        rings = np.column_stack([mu_all, np.full(mu_all.size, 2.0)])
        head, tail = rings[:J], rings[J:]
    else:
        rings_l, used = [], []
        for k, m in make_bands(mu_all, budget):
            rb = float(np.exp(np.mean(np.log(mu_all[k:k + m]))))
            rings_l.append((rb, float(m)))
            used.append(k + m <= J)
        rings = np.array(rings_l)
        used = np.array(used)
        head, tail = rings[used], rings[~used]
    params = {"J": int(J), "sigma": float(sigma), "layout": layout}
    if layout == "banded":
        params["budget"] = float(budget)
    zs = ZeroSet(radii=radii, sigma=float(sigma), layout=layout, rings=head, tail_rings=tail, params=params)
    if d is None:
        gap = min_gap(zs) if zs.n_zeros >= 2 else None
        d = 0.5 if gap is None else min(0.5, gap.d_max / 2.0)
    zs.d = float(d)
    return zs


def zero_count(zs: ZeroSet, r) -> np.ndarray:
    """``#{k : mu_k < r}`` on the breakpoint radii."""
    return np.searchsorted(zs.radii, np.asarray(r, dtype=float), side="left")


def count_consistent(zs: ZeroSet, wf: WeightFunction, r) -> bool:
    r = np.asarray(r, dtype=float)
    return bool(np.array_equal(zero_count(zs, r), counting_n(wf, r / zs.sigma)))


@dataclass
class GapReport:
    d_max: float
    prefix: int
    simple: bool
    witness: float
    status: str


def min_gap(zs: ZeroSet, d: float | None = None) -> GapReport:
    """Half the smallest distance between distinct zeros.

    ``prefix`` counts the leading rings (by radius) before which some gap
    is at most ``2d``; beyond it all exclusion discs are disjoint.
    """
    rings = zs.rings
    if zs.n_zeros < 2:
        raise InputError("need at least two zeros")
    r, m = rings[:, 0], rings[:, 1]
    # within a ring: chord between neighbours
    within = np.where(m >= 2, 2.0 * r * np.sin(np.pi / np.maximum(m, 1)), np.inf)
    # across rings: along a ray the closest points differ in radius only when
    # both rings contain that direction; in general |r_i - r_j| is a lower bound
    # attained for the mirror layout where every ring contains +-1
    between = np.append(np.diff(r), np.inf)
    local = np.minimum(within, between)
    i = int(np.argmin(local))
    dmax = float(local[i]) / 2.0
    simple = bool(dmax > 0)
    if d is None:
        d = zs.d if zs.d is not None else dmax
    bad = np.nonzero(local <= 2.0 * d)[0]
    prefix = int(bad[-1]) + 1 if bad.size else 0
    return GapReport(dmax, prefix, simple, float(r[i]), PASS if simple else FAIL)


def _ring_log(z: np.ndarray, r: float, m: float) -> np.ndarray:
    """``ln|1 - (z/r)**m|`` without overflow, via the sign of ``Re m ln(z/r)``."""
    with np.errstate(divide="ignore"):
        q = m * (np.log(z) - np.log(r))
        big = q.real > 0
        e = np.exp(np.where(big, -q, q))
        # exactly on a zero the argument is -1 and the log is -inf
        val = 0.5 * np.log1p(np.maximum(-2.0 * e.real + (e.real ** 2 + e.imag ** 2), -1.0))
    return np.where(big, q.real + val, val)


def tail_bound(zs: ZeroSet, rmax: float) -> float:
    """Sum over cut-off rings of ``-ln(1 - (rmax/r)**m)``; bounds the truncation error for ``|z| <= rmax``."""
    if zs.tail_rings.size == 0 or rmax == 0:
        return 0.0
    r, m = zs.tail_rings[:, 0], zs.tail_rings[:, 1]
    q = np.exp(m * (np.log(rmax) - np.log(r)))
    if np.any(q >= 1):
        return float("inf")
    return float(-np.sum(np.log1p(-q)))


def log_abs_N(z, zs: ZeroSet, tail_bound_tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray, float]:
    """``(ln|N(z)|, excluded, tail bound)``.

    ``excluded`` marks points within ``d`` of a zero (the value is still
    returned, ``-inf`` exactly on a zero).  Raises TruncationError when the
    cut-off rings could move the value by more than ``tail_bound_tol``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    az = np.abs(z)
    tb = tail_bound(zs, float(az.max(initial=0.0)))
    if tb > tail_bound_tol:
        raise TruncationError(f"truncation bound {tb:.3g} exceeds {tail_bound_tol:.3g}; increase J or shrink |z|")
    out = np.zeros(z.shape)
    nz = az > 0
    zz = z[nz]
    acc = np.zeros(zz.shape)
    for r, m in zs.rings:
        acc += _ring_log(zz, r, m)
    out[nz] = acc
    return out, excluded_mask(z, zs), tb


def excluded_mask(z, zs: ZeroSet, d: float | None = None) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = zs.d if d is None else d
    if not d:
        return np.zeros(z.shape, dtype=bool)
    az = np.abs(z)
    ang = np.angle(z)
    ex = np.zeros(z.shape, dtype=bool)
    for r, m in zs.rings:
        near = np.abs(az - r) < d
        if not near.any():
            continue
        j = np.round(ang[near] * m / (2 * np.pi))
        zero = r * np.exp(2j * np.pi * j / m)
        ex[near] |= np.abs(z[near] - zero) < d
    return ex


def polar_grid(r_max: float, n_r: int = 60, n_theta: int = 64, r_min: float = 0.1) -> np.ndarray:
    radii = np.geomspace(r_min, r_max, n_r)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    return (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()


@dataclass
class Residual8Fit:
    A: float
    C0: float
    coverage: float
    excluded_fraction: float
    max_residual: float
    witness: complex
    tail_bound: float
    holds_fraction: float
    status: str
    tolerance: float = 1e-9


def _hull_last_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Slope of the final edge of the upper convex hull of ``(x, y)``."""
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    hull: list[int] = []
    for i in range(xs.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    if len(hull) < 2:
        return 0.0
    a, b = hull[-2], hull[-1]
    if xs[b] == xs[a]:
        return 0.0
    return float((ys[b] - ys[a]) / (xs[b] - xs[a]))


def check_eq8(zs: ZeroSet, wf: WeightFunction, z_grid, d: float | None = None,
              tail_bound_tol: float = 1e-6, max_excluded: float = 0.5) -> Residual8Fit:
    """Fit ``|w(|z|/sigma) - ln|N(z)|| <= A ln(1+|z|) + C0`` off the exclusion discs.

    ``A`` is the slope of the last upper-hull edge of the residual against
    ``ln(1+|z|)`` (clamped at 0) and ``C0`` the smallest intercept that
    makes the bound hold at every kept point.
    """
    z = np.asarray(z_grid, dtype=complex).ravel()
    if z.size == 0:
        raise InputError("empty z grid")
    if np.abs(z).max() > zs.admissible_radius() * (1 + 1e-12):
        raise InputError(f"grid reaches beyond the admissible radius {zs.admissible_radius():.6g}")
    logN, _, tb = log_abs_N(z, zs, tail_bound_tol)
    ex = excluded_mask(z, zs, d)
    frac = float(ex.mean())
    if frac > max_excluded:
        raise InputError(f"{frac:.0%} of grid points excluded; grid or d misconfigured")
    keep = ~ex & np.isfinite(logN)
    res = np.abs(w_value(wf, np.abs(z[keep]) / zs.sigma) - logN[keep])
    L = np.log1p(np.abs(z[keep]))
    A = max(0.0, _hull_last_slope(L, res))
    C0 = max(0.0, float(np.max(res - A * L)))
    holds = res <= A * L + C0 + 1e-9 * np.maximum(1.0, res)
    i = int(np.argmax(res))
    return Residual8Fit(A=A, C0=C0, coverage=float(keep.mean()), excluded_fraction=frac,
                        max_residual=float(res[i]), witness=complex(z[keep][i]), tail_bound=tb,
                        holds_fraction=float(holds.mean()), status=PASS if holds.all() else FAIL)


@dataclass
class DriftReport:
    J: int
    J2: int
    max_change: float
    tail_bound: float
    admissible_radius: float
    witness: complex
    status: str
    tolerance: float


def truncation_drift(wf: WeightFunction, sigma: float, J: int, z_grid, tol: float = 1e-6,
                     layout: str = "banded", budget: float = DEFAULT_BUDGET) -> DriftReport:
    """Max change of ``ln|N|`` on the admissible part of the grid when J doubles."""
    a = place_zeros(wf, sigma, J, layout, budget)
    b = place_zeros(wf, sigma, 2 * J, layout, budget)
    z = np.asarray(z_grid, dtype=complex).ravel()
    R = a.admissible_radius()
    z = z[np.abs(z) <= R * (1 + 1e-12)]
    va, _, tb = log_abs_N(z, a, np.inf)
    vb, _, _ = log_abs_N(z, b, np.inf)
    fin = np.isfinite(va) & np.isfinite(vb)
    diff = np.abs(va[fin] - vb[fin])
    i = int(np.argmax(diff)) if diff.size else 0
    change = float(diff[i]) if diff.size else 0.0
    ok = change <= tol
    return DriftReport(int(J), int(2 * J), change, tb, R, complex(z[fin][i]) if diff.size else 0j,
                       PASS if ok else FAIL, tol)
