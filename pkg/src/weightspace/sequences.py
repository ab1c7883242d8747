"""Candidate weight sequences and finite checks of the class-M conditions.

Everything is carried in the log domain: ``lnM[k] = ln M_k``.  The built-in
families are

* ``mstar``:     M_n = (n+1)**(rho*n)
* ``gammafact``: M_n = Gamma(n+2)**rho
* ``arctg``:     M_n = (n+1)**((n+1)*arctan(n+1))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .conjugates import ConvexGridFunction
from .errors import InputError
from .reports import FAIL, INCONCLUSIVE, PASS, worst
from .scan import trend_slope

KINDS = ("mstar", "gammafact", "arctg", "table")
DEFAULT_K = 2000
I1_TOL = 1e-12


@dataclass(eq=False)
class LogSequence:
    name: str
    params: dict
    lnM: np.ndarray

    def __post_init__(self):
        self.lnM = np.asarray(self.lnM, dtype=float)

    @property
    def K(self) -> int:
        return self.lnM.size - 1

    def to_dict(self) -> dict:
        return {"name": self.name, "params": self.params, "K": self.K}


def log_factorial(k) -> np.ndarray:
    return gammaln(np.asarray(k, dtype=float) + 1.0)


def _family(kind: str, n: np.ndarray, rho: float) -> np.ndarray:
    if kind == "mstar":
        return rho * n * np.log1p(n)
    if kind == "gammafact":
        return rho * gammaln(n + 2.0)
    if kind == "arctg":
        return (n + 1.0) * np.log1p(n) * np.arctan(n + 1.0)
    raise InputError(f"unknown sequence kind {kind!r}")


def analytic_v(kind: str, rho: float = 1.0):
    """The continuous generator v with ``v(k) = lnM[k]`` for a built-in family."""
    _family(kind, np.zeros(1), rho)

    def v(x):
        return _family(kind, np.asarray(x, dtype=float), rho)

    return v


def build_sequence(kind: str, K: int = DEFAULT_K, rho: float = 1.0, lnM=None) -> LogSequence:
    """Build a LogSequence from a family name or a user table of ``ln M_k``."""
    if kind == "table":
        if lnM is None:
            raise InputError("table sequences need lnM")
        lnM = np.asarray(lnM, dtype=float)
        if lnM.ndim != 1 or lnM.size < 2:
            raise InputError("lnM must hold at least two entries")
        if not np.all(np.isfinite(lnM)):
            raise InputError("lnM must be finite")
        if lnM[0] != 0.0:
            raise InputError("lnM[0] must be 0 (M_0 = 1)")
        d = np.diff(lnM)
        if np.any(d < 0):
            raise InputError(f"table is not monotone: decreases at k={int(np.argmax(d < 0)) + 1}")
        return LogSequence("table", {}, lnM)
    if kind not in KINDS:
        raise InputError(f"unknown sequence kind {kind!r}; expected one of {KINDS}")
    if int(K) != K or K < 1:
        raise InputError("K must be a positive integer")
    if kind != "arctg" and rho < 1:
        raise InputError("rho must be >= 1")
    n = np.arange(int(K) + 1, dtype=float)
    params = {} if kind == "arctg" else {"rho": float(rho)}
    return LogSequence(kind, params, _family(kind, n, float(rho)))


def sequence_from_spec(spec: dict) -> LogSequence:
    """Build from the JSON form ``{"kind": "mstar", "rho": 1.0, "K": 2000}``."""
    spec = dict(spec)
    unknown = set(spec) - {"kind", "rho", "K", "lnM"}
    if unknown:
        raise InputError(f"unknown sequence keys: {sorted(unknown)}")
    if "kind" not in spec:
        raise InputError("sequence spec needs 'kind'")
    return build_sequence(spec["kind"], K=spec.get("K", DEFAULT_K), rho=spec.get("rho", 1.0), lnM=spec.get("lnM"))


@dataclass
class I1Result:
    ok: bool
    witness: int | None
    min_second_difference: float
    tolerance: float = I1_TOL

    @property
    def status(self) -> str:
        return PASS if self.ok else FAIL


def check_i1(seq: LogSequence) -> I1Result:
    """Log-convexity: ``lnM[k+1] - 2 lnM[k] + lnM[k-1] >= -1e-12`` for all k."""
    if seq.K < 2:
        raise InputError("i1 needs K >= 2")
    d2 = seq.lnM[2:] - 2 * seq.lnM[1:-1] + seq.lnM[:-2]
    bad = np.nonzero(d2 < -I1_TOL)[0]
    return I1Result(ok=bad.size == 0, witness=int(bad[0]) + 1 if bad.size else None,
                    min_second_difference=float(d2.min()))


@dataclass
class I2Result:
    H1: float
    H2: float
    residual: float
    tail_slope: float
    witness: int
    status: str
    tolerance: float = 1e-9


def estimate_i2(seq: LogSequence, slope_tol: float = 0.05) -> I2Result:
    """Fit ``M_k >= H1 * H2**k * k!``.

    ``ln H2`` is the minimum of ``(lnM[k] - ln k!)/k`` over the tail half and
    ``ln H1`` the minimum gap left over all k, so the residual is zero up to
    rounding whenever finite data are given.  Divergence to ``-inf`` shows up
    as a falling tail trend of ``(lnM[k] - ln k!)/k`` against ``ln k``; a
    slope below ``-slope_tol`` fails the condition.
    """
    K = seq.K
    if K < 10:
        raise InputError("i2 needs K >= 10")
    k = np.arange(K + 1, dtype=float)
    excess = seq.lnM - log_factorial(k)
    tail = np.arange(K // 2, K + 1)
    tail = tail[tail > 0]
    q = excess[tail] / tail
    lnH2 = float(q.min())
    gap = excess - k * lnH2
    lnH1 = float(gap.min())
    resid = gap - lnH1
    i = int(np.argmin(resid))
    slope = trend_slope(np.log(tail), q)
    ok = resid[i] >= -1e-9 and slope >= -slope_tol
    return I2Result(H1=float(np.exp(lnH1)), H2=float(np.exp(lnH2)), residual=float(resid[i]),
                    tail_slope=slope, witness=i, status=PASS if ok else FAIL)


@dataclass
class I3Row:
    s: float
    proxy: float
    trend_slope: float
    window: tuple[int, int]
    witness: int
    status: str
    threshold: float


def _floor(x: np.ndarray) -> np.ndarray:
    # guard so that an exactly integral s*n never floors one below itself
    return np.floor(x * (1.0 + 1e-12)).astype(np.int64)


def check_i3(seq: LogSequence, s_values=(1.5, 2.0, 3.0), window: float | None = None,
             margin: float = 1e-3) -> list[I3Row]:
    """liminf proxy of ``(lnM[[sn]] - s lnM[n]) / n`` on the tail window.

    The window is ``n in [K*window, K/s]`` (default ``window = 1/(2s)``).  A
    row passes when the window minimum exceeds ``ln(1+margin)`` and the
    least-squares trend, carried across the window, would not take the
    minimum below that bound.
    """
    rows = []
    K = seq.K
    thr = float(np.log1p(margin))
    for s in s_values:
        if not s > 1:
            raise InputError("i3 needs s > 1")
        win = 0.5 / s if window is None else window
        lo = int(np.ceil(K * win))
        hi = int(np.floor(K / s))
        if _floor(np.array([s * K * win]))[0] > K:
            raise InputError(f"window fraction {win} too large for s={s}")
        n = np.arange(max(lo, 1), hi + 1)
        if n.size < 20:
            raise InputError(f"window for s={s} has {n.size} points (< 20)")
        sn = _floor(s * n)
        a = (seq.lnM[sn] - s * seq.lnM[n]) / n
        i = int(np.argmin(a))
        slope = trend_slope(n, a)
        drift = min(0.0, slope) * (n[-1] - n[0])
        ok = a[i] > thr and a[i] + drift > thr
        rows.append(I3Row(s=float(s), proxy=float(a[i]), trend_slope=slope, window=(int(n[0]), int(n[-1])),
                          witness=int(n[i]), status=PASS if ok else FAIL, threshold=thr))
    return rows


@dataclass
class I4Result:
    delta: float
    p: float
    t: float
    residual: float
    n_max: int
    m_max: int
    unbounded_rows: list[int] = field(default_factory=list)
    status: str = PASS
    tolerance: float = 1e-9


def check_i4(seq: LogSequence, delta: float, n_max: int | None = None, m_max: int | None = None) -> I4Result:
    """Fit ``sup_m M_{m+n} / (M_m (1+delta)**m) <= p * t**n * M_n``.

    ``S(n)`` is the max over ``m <= m_max``; ``ln t`` is the largest
    consecutive slope of ``S(n) - lnM[n]`` (floored at a tiny positive value,
    since t must exceed 1) and ``ln p`` the largest remaining intercept.  Rows
    whose max sits at ``m_max`` are unbounded on the scanned range and make
    the report inconclusive rather than failed.
    """
    if not delta > 0:
        raise InputError("delta must be positive")
    K = seq.K
    if n_max is None:
        n_max = max(2, K // 50)
    if m_max is None:
        m_max = K - n_max
    if n_max + m_max > K:
        raise InputError(f"n_max + m_max = {n_max + m_max} exceeds K = {K}")
    lnM = seq.lnM
    m = np.arange(m_max + 1)
    pen = m * np.log1p(delta)
    S = np.empty(n_max + 1)
    unbounded = []
    for n in range(n_max + 1):
        vals = lnM[m + n] - lnM[m] - pen
        j = int(np.argmax(vals))
        S[n] = vals[j]
        if j == m_max:
            unbounded.append(n)
    D = S - lnM[: n_max + 1]
    lnt = max(float(np.max(np.diff(D))), 1e-12)
    nn = np.arange(n_max + 1)
    lnp = float(np.max(D - nn * lnt))
    resid = float(np.max(D - lnp - nn * lnt))
    status = INCONCLUSIVE if unbounded else (PASS if resid <= 1e-9 else FAIL)
    return I4Result(delta=float(delta), p=float(np.exp(lnp)), t=float(np.exp(lnt)), residual=resid,
                    n_max=n_max, m_max=m_max, unbounded_rows=unbounded, status=status)


@dataclass
class Eq1Result:
    table: list[tuple[int, float]]
    last: float
    decreasing: bool
    status: str
    tolerance: float = 5e-2


def check_eq1_limit(seq: LogSequence, points: int = 40, tol: float = 5e-2) -> Eq1Result:
    """Trend of ``(M_{n+1}/M_n)**(1/n)`` toward 1 on a log-spaced n grid.

    Passes when the last value is within ``1 + tol`` and the values over the
    second half of the grid are nonincreasing.
    """
    K = seq.K
    if K < 100:
        raise InputError("ratio-root trend needs K >= 100")
    n = np.unique(np.geomspace(1, K - 1, points).astype(np.int64))
    vals = np.exp((seq.lnM[n + 1] - seq.lnM[n]) / n)
    half = vals[vals.size // 2:]
    decreasing = bool(np.all(np.diff(half) <= 1e-12))
    ok = vals[-1] <= 1 + tol and vals[-1] >= 1 - 1e-12 and decreasing
    return Eq1Result(table=[(int(a), float(b)) for a, b in zip(n, vals)], last=float(vals[-1]),
                     decreasing=decreasing, status=PASS if ok else FAIL, tolerance=tol)


def to_vfun(seq: LogSequence) -> ConvexGridFunction:
    """The piecewise-linear interpolant v_L through ``(k, lnM[k])``."""
    res = check_i1(seq)
    if not res.ok:
        raise InputError(f"sequence is not log-convex (first violation at k={res.witness})")
    return ConvexGridFunction(np.arange(seq.K + 1, dtype=float), seq.lnM)


@dataclass
class ClassMReport:
    sequence: LogSequence
    i1: I1Result
    i2: I2Result
    i3: list[I3Row]
    i4: list[I4Result]
    eq1: Eq1Result

    @property
    def status(self) -> str:
        return worst([self.i1.status, self.i2.status, *(r.status for r in self.i3),
                      *(r.status for r in self.i4), self.eq1.status])

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence.to_dict(),
            "status": self.status,
            "i1": {"ok": self.i1.ok, "witness": self.i1.witness,
                   "value": self.i1.min_second_difference, "tolerance": self.i1.tolerance},
            "i2": self.i2,
            "i3": self.i3,
            "i4": self.i4,
            "eq1_trend": self.eq1,
        }


def class_m_report(seq: LogSequence, s_values=(1.5, 2.0, 3.0), deltas=(0.1, 0.5, 1.0)) -> ClassMReport:
    return ClassMReport(
        sequence=seq,
        i1=check_i1(seq),
        i2=estimate_i2(seq),
        i3=check_i3(seq, s_values),
        i4=[check_i4(seq, d) for d in deltas],
        eq1=check_eq1_limit(seq),
    )
