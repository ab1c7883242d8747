"""Discrete Legendre-Fenchel conjugation and the spatial weights theta_m.

``phi(x) = sup_y (x*y - psi(y))`` is computed on a finite grid with the
monotone-argmax sweep: for a convex sample the maximizing index is
nondecreasing in ``x``, so one forward pass over slopes and grid suffices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .reports import FAIL, PASS, worst

CONVEXITY_TOL = 1e-10


@dataclass(eq=False)
class ConvexGridFunction:
    """A convex function sampled on a strictly increasing abscissa grid.

    Evaluation between nodes is linear interpolation; outside the grid it
    raises, there is no extrapolation.
    """

    xs: np.ndarray
    vals: np.ndarray
    edge: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.vals = np.asarray(self.vals, dtype=float)
        if self.xs.ndim != 1 or self.xs.shape != self.vals.shape or self.xs.size == 0:
            raise InputError("xs and vals must be 1-d arrays of equal, nonzero length")
        if np.any(np.diff(self.xs) <= 0):
            raise InputError("abscissae must be strictly increasing")
        if not np.all(np.isfinite(self.vals)):
            raise InputError("function values must be finite")
        k = convexity_violation(self.xs, self.vals)
        if k is not None:
            raise InputError(f"not convex: slope decreases after node {k} (x={self.xs[k]:.17g})")

    def slopes(self) -> np.ndarray:
        return np.diff(self.vals) / np.diff(self.xs)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        span = max(1.0, abs(lo), abs(hi))
        if np.any(x < lo - 1e-12 * span) or np.any(x > hi + 1e-12 * span):
            raise InputError(f"evaluation outside grid [{lo:.17g}, {hi:.17g}]")
        return np.interp(x, self.xs, self.vals)


def convexity_violation(xs: np.ndarray, vals: np.ndarray, tol: float = CONVEXITY_TOL) -> int | None:
    """Index of the first slope decrease beyond ``tol`` (relative), or None."""
    if xs.size < 3:
        return None
    s = np.diff(vals) / np.diff(xs)
    scale = max(1.0, float(np.max(np.abs(s))))
    bad = np.nonzero(np.diff(s) < -tol * scale)[0]
    return int(bad[0]) + 1 if bad.size else None


def _sweep(ys: np.ndarray, fy: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Argmax index of ``x*y - f(y)`` for each increasing ``x``.

    The objective is concave in the index, so the maximizer is the first
    index whose right chord slope reaches ``x``; ties go to the smaller y.
    """
    chord = np.diff(fy) / np.diff(ys)
    last = ys.size - 1
    idx = np.empty(xs.size, dtype=np.int64)
    j = 0
    for i, x in enumerate(xs.tolist()):
        while j < last and chord[j] < x:
            j += 1
        idx[i] = j
    return idx


def legendre_transform(f: ConvexGridFunction, slopes) -> ConvexGridFunction:
    """``g(x) = max_i (x*y_i - f(y_i))`` at each requested slope ``x``.

    ``g.edge`` marks slopes outside the chord-slope range of ``f``: there the
    maximum sits at a grid end and the continuous supremum is not captured.
    """
    x = np.asarray(slopes, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InputError("slopes must be a nonempty 1-d array")
    if np.any(np.diff(x) <= 0):
        raise InputError("slopes must be strictly increasing")
    if not isinstance(f, ConvexGridFunction):
        f = ConvexGridFunction(*f)
    idx = _sweep(f.xs, f.vals, x)
    g = x * f.xs[idx] - f.vals[idx]
    if f.xs.size >= 2:
        chord = f.slopes()
        edge = (x < chord[0]) | (x > chord[-1])
    else:
        edge = np.ones(x.size, dtype=bool)
    return ConvexGridFunction(x, g, edge=edge)


@dataclass
class BiconjugateReport:
    defect: float
    witness: float
    tolerance: float
    status: str


def biconjugate_check(f: ConvexGridFunction, slopes=None) -> BiconjugateReport:
    """Max of ``f - f**`` over the nodes of ``f``.

    With the default dual grid (the distinct chord slopes of ``f``) the
    discrete biconjugate reproduces ``f`` at its nodes up to rounding.
    """
    if slopes is None:
        if f.xs.size >= 2:
            # chord slopes equal up to rounding collapse into one dual node
            c = np.unique(f.slopes())
            keep = np.concatenate([[True], np.diff(c) > 1e-9 * max(1.0, float(np.max(np.abs(c))))])
            slopes = c[keep]
        else:
            slopes = np.array([0.0])
        bound = 0.0
    else:
        slopes = np.asarray(slopes, dtype=float)
        # between the touching points of neighbouring dual slopes, f sits under its
        # chord and over both supporting lines, so the gap is at most (dx * dy) / 4
        ystar = f.xs[_sweep(f.xs, f.vals, slopes)]
        bound = 0.25 * float(np.max(np.diff(slopes) * np.diff(ystar), initial=0.0))
    g = legendre_transform(f, slopes)
    fss = legendre_transform(g, f.xs).vals
    gap = f.vals - fss
    i = int(np.argmax(gap))
    scale = max(1.0, float(np.max(np.abs(f.vals))))
    # chord slopes carry eps*scale/dx of rounding, amplified over the span of the grid
    rounding = 1e-12 * scale
    if f.xs.size >= 2:
        span = float(f.xs[-1] - f.xs[0])
        rounding += 8 * np.finfo(float).eps * scale * span / float(np.min(np.diff(f.xs)))
    tol = bound + rounding
    defect = float(gap[i])
    ok = -rounding <= defect <= tol
    return BiconjugateReport(defect=defect, witness=float(f.xs[i]), tolerance=tol, status=PASS if ok else FAIL)


@dataclass
class PsiSpec:
    """The convex weight psi on the real line.

    ``form="power"`` is ``|y|**p / p`` with ``p`` defaulting to ``alpha``;
    ``form="grid"`` takes user samples ``xs, vals``.
    """

    alpha: float = 2.0
    form: str = "power"
    p: float | None = None
    xs: np.ndarray | None = None
    vals: np.ndarray | None = None
    A_psi: float | None = None

    def __post_init__(self):
        if not self.alpha > 1:
            raise InputError("alpha must exceed 1")
        if self.form == "power":
            if self.p is None:
                self.p = self.alpha
            if not self.p >= 1:
                raise InputError("power exponent must be >= 1 for a convex psi")
        elif self.form == "grid":
            if self.xs is None or self.vals is None:
                raise InputError("grid psi needs xs and vals")
            self._grid = ConvexGridFunction(self.xs, self.vals)
        else:
            raise InputError(f"unknown psi form {self.form!r}")

    @classmethod
    def from_dict(cls, spec: dict) -> "PsiSpec":
        spec = dict(spec)
        for k in ("Y", "step"):
            spec.pop(k, None)
        unknown = set(spec) - {"alpha", "form", "p", "xs", "vals", "A_psi"}
        if unknown:
            raise InputError(f"unknown psi keys: {sorted(unknown)}")
        return cls(**spec)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.form == "power":
            return np.abs(y) ** self.p / self.p
        return self._grid(y)

    def sample(self, Y: float = 100.0, step: float = 1e-3) -> ConvexGridFunction:
        n = int(round(2 * Y / step)) + 1
        ys = np.linspace(-Y, Y, n)
        return ConvexGridFunction(ys, self(ys))


def conjugate_psi(psi: PsiSpec, x_max: float = 50.0, n: int = 10001,
                  Y: float = 100.0, step: float = 1e-3) -> ConvexGridFunction:
    """phi on ``[-x_max, x_max]``; rejects slopes whose sup escapes the psi grid."""
    phi = legendre_transform(psi.sample(Y, step), np.linspace(-x_max, x_max, n))
    if np.any(phi.edge):
        raise InputError(f"|x| up to {x_max} exceeds the slope range of psi on [-{Y}, {Y}]; enlarge Y")
    return phi


@dataclass
class PsiReport:
    A_psi: float
    witness_pair: tuple[float, float]
    holder_status: str
    growth_ratio_edge: float
    growth_status: str
    nonnegative: bool
    status: str
    tolerance: float = 0.05


def validate_psi(psi: PsiSpec, Y: float = 100.0, n_pairs: int = 401,
                 growth_factor: float = 4.0) -> PsiReport:
    """Fit the Hoelder-type constant of psi and probe superlinear growth.

    The constant is the max of ``|psi(a)-psi(b)| / ((1+|a|+|b|)**(alpha-1) |a-b|)``
    over a pair grid; it passes when the max over ``[-Y, Y]`` exceeds the
    max over ``[-Y/2, Y/2]`` by at most 5% (a bounded ratio stops growing).
    Growth passes when ``psi(x)/|x|`` is nondecreasing for ``|x| >= 1`` and
    has grown by ``growth_factor`` between ``|x| = 1`` and the grid edge.
    """
    if n_pairs % 4 != 1:
        n_pairs += (1 - n_pairs) % 4
    ys = np.linspace(-Y, Y, n_pairs)
    v = psi(ys)
    a, b = np.meshgrid(ys, ys, indexing="ij")
    va, vb = np.meshgrid(v, v, indexing="ij")
    off = a != b
    ratio = np.zeros_like(a)
    ratio[off] = np.abs(va[off] - vb[off]) / (
        (1 + np.abs(a[off]) + np.abs(b[off])) ** (psi.alpha - 1) * np.abs(a[off] - b[off])
    )
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    A_full = float(ratio[i, j])
    inner = np.abs(ys) <= Y / 2 + 1e-12 * Y
    A_half = float(ratio[np.ix_(inner, inner)].max())
    holder_ok = A_full <= 1.05 * A_half
    if psi.A_psi is not None and A_full > psi.A_psi:
        holder_ok = False

    r = np.geomspace(1.0, Y, 200)
    growth_ok = True
    edge_ratio = np.inf
    for sign in (1.0, -1.0):
        q = psi(sign * r) / r
        if np.any(np.diff(q) < -1e-12 * max(1.0, float(np.max(np.abs(q))))):
            growth_ok = False
        base = q[0]
        gr = q[-1] / base if base > 0 else np.inf
        edge_ratio = min(edge_ratio, gr)
    if edge_ratio < growth_factor:
        growth_ok = False
    holder_status = PASS if holder_ok else FAIL
    growth_status = PASS if growth_ok else FAIL
    return PsiReport(
        A_psi=A_full,
        witness_pair=(float(ys[i]), float(ys[j])),
        holder_status=holder_status,
        growth_ratio_edge=float(edge_ratio),
        growth_status=growth_status,
        nonnegative=bool(np.all(v >= 0)),
        status=worst([holder_status, growth_status]),
    )


def theta_m(m: int, x, phi: ConvexGridFunction) -> tuple[np.ndarray, np.ndarray]:
    """``(log theta_m(x), theta_m(x))`` with ``log theta_m = phi(x) - m*log(1+|x|)``."""
    if m < 0 or int(m) != m:
        raise InputError("m must be a nonnegative integer")
    x = np.asarray(x, dtype=float)
    logv = phi(x) - m * np.log1p(np.abs(x))
    return logv, np.exp(logv)
