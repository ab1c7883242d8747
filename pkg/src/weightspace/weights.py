"""The associated weight ``w(r) = sup_k ln(r**k / M_k)`` in exact form.

In ``t = ln r`` the weight is convex and piecewise linear with integer
slopes; the slope is ``k`` on ``[t_k, t_{k+1}]`` where
``t_k = lnM[k] - lnM[k-1]``.  Evaluation is a binary search over the
breakpoints followed by ``k*ln r - lnM[k]``.  Queries beyond ``t_K`` are
errors: past the last breakpoint a truncated sup underestimates w.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError, TruncationError
from .reports import FAIL, INCONCLUSIVE, PASS
from .scan import log_grid, stabilized_max
from .sequences import LogSequence, build_sequence, check_i1


@dataclass(eq=False)
class WeightFunction:
    lnM: np.ndarray
    t: np.ndarray

    @classmethod
    def from_sequence(cls, seq: LogSequence) -> "WeightFunction":
        res = check_i1(seq)
        if not res.ok:
            raise InputError(f"breakpoints must be nondecreasing (i1 fails at k={res.witness})")
        lnM = np.array(seq.lnM, dtype=float)
        lnM.flags.writeable = False
        t = np.diff(lnM)
        t.flags.writeable = False
        return cls(lnM=lnM, t=t)

    @property
    def K(self) -> int:
        return self.lnM.size - 1

    @property
    def r_max(self) -> float:
        return float(np.exp(self.t[-1]))

    def breakpoints(self) -> np.ndarray:
        """Radii ``M_k / M_{k-1}`` where the slope steps from k-1 to k."""
        return np.exp(self.t)


def eval_w(wf: WeightFunction, r) -> tuple[np.ndarray, np.ndarray]:
    """``(w(r), argmax k)``; ties resolve to the smallest k, ``w(0) = 0``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(~np.isfinite(r)):
        raise InputError("radii must be finite and nonnegative")
    pos = r > 0
    lr = np.log(np.where(pos, r, 1.0))
    if np.any(lr[pos] > wf.t[-1]):
        raise TruncationError(
            f"radius {float(r.max()):.6g} beyond last breakpoint {wf.r_max:.6g}; increase K"
        )
    k = np.where(pos, np.searchsorted(wf.t, lr, side="left"), 0)
    val = np.where(pos, k * lr - wf.lnM[k], 0.0)
    return val, k


def w_value(wf: WeightFunction, r) -> np.ndarray:
    return eval_w(wf, r)[0]


def counting_n(wf: WeightFunction, r) -> np.ndarray:
    """Slope of w at ``ln r``: the number of breakpoints strictly below r."""
    return eval_w(wf, r)[1]


def weight_for_radius(kind: str, r_max: float, rho: float = 1.0, K0: int = 2000) -> WeightFunction:
    """Smallest-doubling K whose last breakpoint reaches ``r_max``."""
    K = K0
    target = np.log(r_max)
    while True:
        wf = WeightFunction.from_sequence(build_sequence(kind, K=K, rho=rho))
        if wf.t[-1] >= target:
            return wf
        K *= 2
        if K > 1 << 26:
            raise TruncationError(f"no K up to {K} reaches r = {r_max:g}")


@dataclass
class AwResult:
    A_w: float
    maximizer: float
    verified: bool
    status: str


def linear_bound_Aw(wf: WeightFunction, r_grid) -> AwResult:
    """``A_w = sup w(r)/r`` over ``r <= max(r_grid)``, then check the grid.

    On the segment with slope k, ``w(r)/r`` is extremal either at the
    segment ends or at the interior critical point ``r = exp(1 + lnM[k]/k)``
    (where ``w = k``), so those candidates give the exact sup.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    rmax = float(r_grid.max())
    w_at_top, _ = eval_w(wf, rmax)
    mu = wf.breakpoints()
    kk = np.arange(1, wf.K + 1)
    crit = np.exp(1.0 + wf.lnM[1:] / kk)
    lo = mu
    hi = np.append(mu[1:], np.inf)
    inside = (crit >= lo) & (crit <= hi)
    cand = np.concatenate([mu, crit[inside], [rmax]])
    cand = cand[(cand > 0) & (cand <= rmax)]
    ratio = w_value(wf, cand) / cand
    i = int(np.argmax(ratio))
    A = float(ratio[i])
    rg = r_grid[r_grid > 0]
    slack = A * rg - w_value(wf, rg)
    verified = bool(np.all(slack >= -1e-12 * np.maximum(1.0, A * rg)))
    return AwResult(A_w=A, maximizer=float(cand[i]), verified=verified, status=PASS if verified else FAIL)


@dataclass
class SandwichReport:
    rho: float
    K: int
    min_lower_slack: float
    min_upper_slack: float
    witness: float
    status: str
    tolerance: float = 1e-9


def check_sandwich_mstar(rho: float, r_grid=None, r_max: float = 1e6, n: int = 500,
                         tol: float = 1e-9) -> SandwichReport:
    """``rho/e r**(1/rho) - 2 ln r <= w*(r) <= rho/e r**(1/rho)`` for ``r > e**rho``."""
    if r_grid is None:
        r_grid = np.geomspace(np.exp(rho), r_max, n + 1)[1:]
    r = np.asarray(r_grid, dtype=float)
    r = r[r > np.exp(rho)]
    if r.size == 0:
        raise InputError("no grid points above e**rho")
    wf = weight_for_radius("mstar", float(r.max()), rho=rho)
    w = w_value(wf, r)
    upper = rho * np.exp(-1.0) * r ** (1.0 / rho)
    lower = upper - 2.0 * np.log(r)
    lo_slack = w - lower
    up_slack = upper - w
    worst_i = int(np.argmin(np.minimum(lo_slack, up_slack)))
    ok = lo_slack.min() >= -tol and up_slack.min() >= -tol
    return SandwichReport(rho=float(rho), K=wf.K, min_lower_slack=float(lo_slack.min()),
                          min_upper_slack=float(up_slack.min()), witness=float(r[worst_i]),
                          status=PASS if ok else FAIL, tolerance=tol)


def eps_inverse(m: int) -> float:
    return 1.0 / m


@dataclass(eq=False)
class WeightFamily:
    """``w_m(r) = w(r / (sigma + eps_m))`` with ``eps_m`` decreasing to 0."""

    base: WeightFunction
    sigma: float = 1.0
    eps_rule: Callable[[int], float] = eps_inverse

    def __post_init__(self):
        if not self.sigma > 0:
            raise InputError("sigma must be positive")

    def eps(self, m: int) -> float:
        if m < 1:
            raise InputError("m must be >= 1")
        return float(self.eps_rule(m))

    def scale(self, m: int) -> float:
        return self.sigma + self.eps(m)

    def w_m(self, m: int, r) -> np.ndarray:
        return w_value(self.base, np.asarray(r, dtype=float) / self.scale(m))


@dataclass
class GapReport:
    """Finite-grid sup with its stabilization flag."""

    Q: float
    maximizer: float
    stabilized: bool
    status: str
    params: dict


def _gap(values, grid, params) -> GapReport:
    scan = stabilized_max(values, grid)
    status = PASS if scan.stabilized and np.isfinite(scan.value) else INCONCLUSIVE
    return GapReport(Q=scan.value, maximizer=scan.maximizer, stabilized=scan.stabilized,
                     status=status, params=params)


def lemma3_gap(family: WeightFamily, m: int, A: float, r_grid=None, r_max: float = 1e6,
               n: int = 20000) -> GapReport:
    """``Q = max_r w_m(r) + A ln(1+r) - w_{m+1}(r)`` over the grid."""
    if r_grid is None:
        r_grid = log_grid(r_max, n)
    r = np.asarray(r_grid, dtype=float)
    vals = family.w_m(m, r) + A * np.log1p(r) - family.w_m(m + 1, r)
    return _gap(vals, r, {"m": m, "A": A, "sigma": family.sigma})


def lemma4_gap(wf: WeightFunction, s: float, delta: float, l_s: float, r_grid=None,
               r_max: float = 1e6, n: int = 20000) -> GapReport:
    """``Q = max_r s w(r) - w(r / (l(s)(1-delta)))`` over the grid."""
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    if not s > 0 or not l_s > 0:
        raise InputError("s and l(s) must be positive")
    if r_grid is None:
        r_grid = log_grid(r_max, n)
    r = np.asarray(r_grid, dtype=float)
    vals = s * w_value(wf, r) - w_value(wf, r / (l_s * (1.0 - delta)))
    return _gap(vals, r, {"s": s, "delta": delta, "l_s": l_s})


@dataclass(eq=False)
class KWeight:
    """``ln k(z) = psi(Im z) + w(|z| / sigma)``, a member of the majorant class."""

    psi: Callable
    family: WeightFamily

    def log_k(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self.psi(z.imag) + w_value(self.family.base, np.abs(z) / self.family.sigma)

    def __call__(self, z) -> np.ndarray:
        return np.exp(self.log_k(z))


def make_kweight(psi: Callable, wf: WeightFunction, sigma: float = 1.0,
                 eps_rule: Callable[[int], float] = eps_inverse) -> KWeight:
    return KWeight(psi=psi, family=WeightFamily(wf, sigma, eps_rule))


@dataclass
class RatioReport:
    m: int
    sup_ratio: float
    witness: complex
    status: str
    tolerance: float = 1e-12


def ratio_check(kw: KWeight, m: int, z_grid) -> RatioReport:
    """``sup_z exp(psi(Im z) + w_m(|z|)) / k(z)``; at most 1 by construction."""
    z = np.asarray(z_grid, dtype=complex)
    log_num = kw.psi(z.imag) + kw.family.w_m(m, np.abs(z))
    log_ratio = log_num - kw.log_k(z)
    i = int(np.argmax(log_ratio))
    sup = float(np.exp(log_ratio[i]))
    return RatioReport(m=m, sup_ratio=sup, witness=complex(z[i]),
                       status=PASS if sup <= 1 + 1e-12 else FAIL)
