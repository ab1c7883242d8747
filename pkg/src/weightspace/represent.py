"""Exponential sums ``sum_j c_j exp(-i nu_j x)`` fitted to target functions.

The fit is weighted least squares on a uniform grid over ``[-X, X]`` with
weights ``1/theta_1(x)``.  Two ridge penalties are available: ``uniform``
(``lam * sum |c_j|**2``) and ``kweight`` (``lam * sum |c_j k(nu_j)|**2``),
the latter solved through the substitution ``d_j = c_j k(nu_j)`` so the
penalty rows stay well scaled.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite

from .conjugates import PsiSpec, legendre_transform
from .entire import ZeroSet
from .errors import InputError
from .reports import FAIL, PASS
from .weights import KWeight, WeightFamily, w_value

RIDGE_SCALE = 1e-12
COND_WARN = 1e12


@dataclass
class TargetFunction:
    """A target with exact derivatives up to ``k_max``.

    kinds: ``gaussian`` (``exp(-a x**2)``), ``cos`` (``cos(omega x)``),
    ``expsum`` (``sum c exp(-i nu x)``), ``table`` (values only, k_max = 0).
    """

    kind: str
    a: float = 1.0
    omega: float = 1.0
    nu: np.ndarray | None = None
    coeffs: np.ndarray | None = None
    xs: np.ndarray | None = None
    vals: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if not self.a > 0:
                raise InputError("gaussian needs a > 0")
        elif self.kind == "expsum":
            if self.nu is None or self.coeffs is None:
                raise InputError("expsum needs nu and coeffs")
            self.nu = np.asarray(self.nu, dtype=float)
            self.coeffs = np.asarray(self.coeffs, dtype=complex)
            if self.nu.shape != self.coeffs.shape:
                raise InputError("nu and coeffs must have equal length")
        elif self.kind == "table":
            if self.xs is None or self.vals is None:
                raise InputError("table target needs xs and vals")
            self.xs = np.asarray(self.xs, dtype=float)
            self.vals = np.asarray(self.vals, dtype=float)
        elif self.kind != "cos":
            raise InputError(f"unknown target kind {self.kind!r}")

    @property
    def k_max(self) -> int | None:
        """Highest derivative available; None means unlimited."""
        return 0 if self.kind == "table" else None

    @property
    def is_even_real(self) -> bool:
        return self.kind in ("gaussian", "cos")

    def derivative(self, x, k: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if k < 0:
            raise InputError("derivative order must be >= 0")
        if self.k_max is not None and k > self.k_max:
            raise InputError(f"{self.kind} target has derivatives only up to order {self.k_max}")
        if self.kind == "gaussian":
            ra = math.sqrt(self.a)
            c = np.zeros(k + 1)
            c[k] = 1.0
            return (-ra) ** k * hermite.hermval(ra * x, c) * np.exp(-self.a * x * x)
        if self.kind == "cos":
            return self.omega ** k * np.cos(self.omega * x + k * np.pi / 2)
        if self.kind == "expsum":
            E = np.exp(-1j * np.outer(x, self.nu))
            return E @ (self.coeffs * (-1j * self.nu) ** k)
        return np.interp(x, self.xs, self.vals)

    def __call__(self, x) -> np.ndarray:
        return self.derivative(x, 0)

    @classmethod
    def from_dict(cls, spec: dict) -> "TargetFunction":
        allowed = {"kind", "a", "omega", "nu", "coeffs", "xs", "vals"}
        unknown = set(spec) - allowed
        if unknown:
            raise InputError(f"unknown target keys: {sorted(unknown)}")
        return cls(**spec)


def log_inv_theta(x, psi: PsiSpec, m: int = 1, Y: float = 100.0, step: float = 1e-3) -> np.ndarray:
    """``ln(1/theta_m(x)) = m ln(1+|x|) - phi(x)`` with phi from the discrete conjugate of psi."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x)
    xu, inv = np.unique(x[order], return_inverse=True)
    phi = legendre_transform(psi.sample(Y, step), xu)
    if np.any(phi.edge):
        raise InputError("x grid exceeds the slope range of psi; enlarge the psi grid")
    out = np.empty_like(x)
    out[order] = phi.vals[inv]
    return m * np.log1p(np.abs(x)) - out


@dataclass
class DirichletModel:
    nu: np.ndarray
    c: np.ndarray
    sigma: float
    ridge: str
    lam: float
    cond: float
    cond_regularized: float
    weighted_residual: float
    weighted_l2: float
    params: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def derivative(self, x, k: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.nu.size == 0:
            return np.zeros(x.shape, dtype=complex)
        E = np.exp(-1j * np.outer(x, self.nu))
        return E @ (self.c * (-1j * self.nu) ** k)

    def __call__(self, x) -> np.ndarray:
        return self.derivative(x, 0)


def kweight_values(nu, sigma: float, wf, psi: PsiSpec | None = None) -> np.ndarray:
    """``k(nu) = exp(psi(Im nu) + w(|nu|/sigma))``; psi(0) enters for real nu."""
    nu = np.asarray(nu, dtype=complex)
    base = 0.0 if psi is None else psi(nu.imag)
    return np.exp(base + w_value(wf, np.abs(nu) / sigma))


def fit_dirichlet(target: TargetFunction, zs: ZeroSet | None = None, J: int | None = None,
                  X: float = 5.0, n: int = 2001, psi: PsiSpec | None = None, ridge: str = "uniform",
                  wf=None, nu=None, sigma: float | None = None) -> DirichletModel:
    """Weighted least squares for ``c`` with frequencies ``+-mu_k`` (k <= J) from ``zs``.

    ``nu`` overrides the frequency set.  ``ridge="kweight"`` needs ``wf``.
    """
    if psi is None:
        psi = PsiSpec()
    if nu is None:
        if zs is None:
            raise InputError("need a zero set or explicit frequencies")
        J = zs.J if J is None else int(J)
        if J > zs.J:
            raise InputError(f"J={J} exceeds the {zs.J} radii of the zero set")
        r = zs.radii[:J]
        nu = np.concatenate([r, -r])
        sigma = zs.sigma
    nu = np.asarray(nu, dtype=float)
    if nu.size == 0:
        raise InputError("empty frequency set")
    if sigma is None:
        sigma = 1.0
    if nu.size > n / 4:
        raise InputError(f"{nu.size} frequencies exceed a quarter of the {n} samples")
    if ridge not in ("uniform", "kweight"):
        raise InputError(f"unknown ridge {ridge!r}")
    x = np.linspace(-X, X, n)
    wt = np.exp(log_inv_theta(x, psi, 1))
    E = np.exp(-1j * np.outer(x, nu))
    A = E * wt[:, None]
    b = (target(x) * wt).astype(complex)
    lam = RIDGE_SCALE * float(np.max(np.sum(np.abs(A) ** 2, axis=0)))
    if ridge == "kweight":
        if wf is None:
            raise InputError("kweight ridge needs the weight function")
        scale = kweight_values(nu, sigma, wf)
    else:
        scale = np.ones(nu.size)
    As = A / scale[None, :]
    Aa = np.vstack([As, math.sqrt(lam) * np.eye(nu.size)])
    ba = np.concatenate([b, np.zeros(nu.size, dtype=complex)])
    d, *_ = np.linalg.lstsq(Aa, ba, rcond=None)
    c = d / scale
    cond = _cond(A)
    cond_reg = _cond(Aa)
    notes = []
    if cond > COND_WARN:
        msg = f"design condition estimate {cond:.3g} exceeds {COND_WARN:.0e}"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
    r = np.abs(target(x) - E @ c) * wt
    resid = float(np.max(r))
    l2 = float(np.sqrt(np.sum(r * r)))
    params = {"X": X, "n": n, "J": int(nu.size // 2), "ridge": ridge, "sigma": sigma}
    return DirichletModel(nu, c, float(sigma), ridge, lam, cond, cond_reg, resid, l2, params, notes)


def _cond(M: np.ndarray) -> float:
    sv = np.linalg.svd(M, compute_uv=False)
    return float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")


def residual_seminorm(model: DirichletModel, target: TargetFunction, m: int, k_max: int,
                      family: WeightFamily, psi: PsiSpec | None = None, x_grid=None) -> float:
    """``max_{x, k<=k_max} |r^(k)(x)| / ((sigma+eps_m)**k M_k theta_m(x))``, ``r = f - sum``."""
    if psi is None:
        psi = PsiSpec()
    if target.k_max is not None and k_max > target.k_max:
        raise InputError(f"k_max={k_max} beyond the derivative oracle of the target")
    if k_max > family.base.K:
        raise InputError("k_max beyond the sequence table")
    if x_grid is None:
        x_grid = np.linspace(-model.params.get("X", 5.0), model.params.get("X", 5.0),
                             model.params.get("n", 2001))
    x = np.asarray(x_grid, dtype=float)
    lw = log_inv_theta(x, psi, m)
    lscale = math.log(family.scale(m))
    best = 0.0
    for k in range(k_max + 1):
        r = np.abs(target.derivative(x, k) - model.derivative(x, k))
        with np.errstate(divide="ignore"):
            v = np.exp(np.log(r) + lw - k * lscale - family.base.lnM[k])
        best = max(best, float(np.max(v)))
    return best


@dataclass
class CoeffRow:
    j: int
    nu: float
    re: float
    im: float
    weighted: float


@dataclass
class CoeffReport:
    proxy: float
    witness_nu: float
    table: list[CoeffRow]


def coeff_decay_check(model: DirichletModel, kw: KWeight) -> CoeffReport:
    """``max_j |c_j| k(nu_j)`` and the per-frequency table."""
    if model.nu.size == 0:
        return CoeffReport(0.0, 0.0, [])
    k = np.exp(kw.log_k(model.nu.astype(complex)))
    weighted = np.abs(model.c) * k
    i = int(np.argmax(weighted))
    rows = [CoeffRow(j, float(model.nu[j]), float(model.c[j].real), float(model.c[j].imag), float(weighted[j]))
            for j in range(model.nu.size)]
    return CoeffReport(float(weighted[i]), float(model.nu[i]), rows)


@dataclass
class StabilityReport:
    proxies: list[float]
    growth: float
    tolerance: float
    status: str


def proxy_stability(proxies, max_growth: float = 10.0) -> StabilityReport:
    """Pass when no later proxy exceeds ``max_growth`` times the first one."""
    p = np.asarray(proxies, dtype=float)
    growth = float(np.max(p / p[0])) if p[0] > 0 else (0.0 if np.all(p == 0) else float("inf"))
    return StabilityReport(p.tolist(), growth, max_growth, PASS if growth < max_growth else FAIL)
