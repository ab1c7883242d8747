"""Acceptance criteria, one test per criterion.

Each criterion function returns ``(ok, detail)``.  Under pytest the verdict
lines are collected and printed in the terminal summary; run this file
directly to print them without pytest.
"""

import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from weightspace.cli import run
from weightspace.conjugates import ConvexGridFunction, PsiSpec, biconjugate_check, conjugate_psi, legendre_transform
from weightspace.entire import check_eq8, place_zeros, polar_grid, truncation_drift
from weightspace.hfun import h_discrete, lemma1_suite, lemma2_check, prop1_check
from weightspace.represent import (TargetFunction, coeff_decay_check, fit_dirichlet, proxy_stability,
                                   residual_seminorm)
from weightspace.sequences import (analytic_v, build_sequence, check_i1, check_i3, check_i4, estimate_i2)
from weightspace.weights import (KWeight, WeightFamily, WeightFunction, check_sandwich_mstar, eval_w,
                                 lemma3_gap, lemma4_gap, weight_for_radius)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = []

BUILTINS = [("mstar", 1.0), ("mstar", 2.0), ("gammafact", 1.0), ("gammafact", 2.0), ("arctg", 1.0)]
PSI = PsiSpec(alpha=2.0)


def _xlog(x):
    x = np.asarray(x, dtype=float)
    return x * np.log1p(x)


def criterion_1():
    t0 = time.perf_counter()
    bad = []
    worst_i2, worst_i4, min_i3_margin = np.inf, -np.inf, np.inf
    for kind, rho in BUILTINS:
        seq = build_sequence(kind, K=2000, rho=rho)
        tag = f"{kind}(rho={rho:g})"
        if not check_i1(seq).ok:
            bad.append(f"{tag} i1")
        i2 = estimate_i2(seq)
        worst_i2 = min(worst_i2, i2.residual)
        if i2.residual < -1e-9 or i2.status != "pass":
            bad.append(f"{tag} i2")
        for row in check_i3(seq, (1.5, 2.0, 3.0)):
            margin = row.proxy - 0.9 * row.s * math.log(row.s)
            min_i3_margin = min(min_i3_margin, margin)
            if margin < 0:
                bad.append(f"{tag} i3 s={row.s:g}")
        for delta in (0.1, 0.5, 1.0):
            i4 = check_i4(seq, delta)
            worst_i4 = max(worst_i4, i4.residual)
            if i4.residual > 1e-9:
                bad.append(f"{tag} i4 delta={delta:g}")
    dt = time.perf_counter() - t0
    if dt >= 30:
        bad.append(f"runtime {dt:.1f}s")
    detail = (f"min i2 residual {worst_i2:.3g}, min i3 margin {min_i3_margin:.4f}, "
              f"max i4 residual {worst_i4:.3g}, {dt:.2f}s" + (f"; failures: {bad}" if bad else ""))
    return not bad, detail


def criterion_2():
    t0 = time.perf_counter()
    bad, slacks = [], []
    for rho in (1.0, 2.0):
        rep = check_sandwich_mstar(rho, r_max=1e6, n=500, tol=1e-9)
        slacks.append(min(rep.min_lower_slack, rep.min_upper_slack))
        if rep.status != "pass":
            bad.append(f"rho={rho:g} at r={rep.witness:.6g}")
    wf = WeightFunction.from_sequence(build_sequence("mstar", K=2000))
    w10 = float(eval_w(wf, 10.0)[0][()])
    spot = abs(w10 - math.log(16.0))
    if spot > 1e-12:
        bad.append(f"w*(10) off by {spot:.3g}")
    dt = time.perf_counter() - t0
    if dt >= 5:
        bad.append(f"runtime {dt:.1f}s")
    return not bad, (f"min slack rho=1: {slacks[0]:.4g}, rho=2: {slacks[1]:.4g}; |w*(10)-ln16| = {spot:.2g}; "
                     f"{dt:.2f}s" + (f"; failures: {bad}" if bad else ""))


def criterion_3():
    rng = np.random.default_rng(20240601)
    worst_w = 0.0
    for kind, rho in BUILTINS:
        seq = build_sequence(kind, K=2000, rho=rho)
        wf = WeightFunction.from_sequence(seq)
        r = np.exp(rng.uniform(-3.0, wf.t[-1], 10**4))
        w, _ = eval_w(wf, r)
        brute = np.max(np.outer(np.log(r), np.arange(seq.K + 1)) - seq.lnM[None, :], axis=1)
        worst_w = max(worst_w, float(np.max(np.abs(w - brute))))
    ys = np.linspace(-10.0, 10.0, 4001)
    f = ConvexGridFunction(ys, np.abs(ys) ** 3 / 3 + ys)
    xs = np.linspace(-90.0, 110.0, 1000)
    g = legendre_transform(f, xs)
    brute = np.max(np.outer(xs, ys) - f.vals[None, :], axis=1)
    worst_l = float(np.max(np.abs(g.vals - brute)))
    ok = worst_w <= 1e-12 and worst_l <= 1e-12
    return ok, f"eval_w max diff {worst_w:.3g}, Legendre max diff {worst_l:.3g}"


def criterion_4():
    phi = conjugate_psi(PSI, x_max=50.0, n=10001, Y=100.0, step=1e-3)
    err = float(np.max(np.abs(phi.vals - phi.xs**2 / 2)))
    bc = biconjugate_check(PSI.sample(100.0, 1e-3))
    ok = err <= 1e-5 and 0.0 <= bc.defect <= 1e-5
    return ok, f"self-conjugacy sup error {err:.3g}, biconjugate defect {bc.defect:.3g}"


_H_CACHE = {}


def _mstar_big():
    if "seq" not in _H_CACHE:
        _H_CACHE["seq"] = build_sequence("mstar", K=10**5)
    return _H_CACHE["seq"]


def criterion_5():
    t0 = time.perf_counter()
    seq = _mstar_big()
    h2, hh, h1 = (h_discrete(seq, s).proxy for s in (2.0, 0.5, 1.0))
    _H_CACHE["l"] = {2.0: math.exp(h2), 0.5: math.exp(hh)}
    bad = []
    if abs(h2 + math.log(2)) > 1e-3:
        bad.append(f"h(2)={h2:.6f}")
    if abs(hh - math.log(2)) > 1e-3:
        bad.append(f"h(0.5)={hh:.6f}")
    if abs(h1) > 1e-6:
        bad.append(f"h(1)={h1:.3g}")
    l1 = lemma1_suite(seq, (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0))
    for p in l1.properties:
        if p.status != "pass":
            bad.append(f"lemma1 {p.name} ({p.value:.4g})")
    rows = lemma2_check(seq, (0.5, 1.0, 2.0, 4.0))
    for r in rows:
        if r.status != "pass":
            bad.append(f"lemma2 s={r.s:g}: |diff| {r.difference:.4g} > 2x noise {r.tolerance:.4g}")
    dt = time.perf_counter() - t0
    if dt >= 10:
        bad.append(f"runtime {dt:.1f}s")
    detail = f"h(2)={h2:.6f}, h(0.5)={hh:.6f}, h(1)={h1:.3g}; {dt:.2f}s" + (f"; failures: {bad}" if bad else "")
    return not bad, detail


def criterion_6():
    reps = [prop1_check(_xlog, 1.25, eps) for eps in (0.25, 0.5, 1.0)]
    bad = []
    for r in reps:
        if not r.curvature_ok:
            bad.append(f"curvature eps={r.eps:g}")
        if not (math.isfinite(r.Q) and r.stabilized and r.status == "pass"):
            bad.append(f"eps={r.eps:g} status {r.status}")
    with tempfile.TemporaryDirectory() as tmp:
        code, _ = run(["verify", "prop1", "--eps", "0.25,0.5,1", "--out", tmp])
    if code != 0:
        bad.append(f"CLI exit {code}")
    Q = [r.Q for r in reps]
    if not all(Q[i + 1] <= Q[i] for i in range(len(Q) - 1)):
        bad.append("Q_eps not nonincreasing in eps")
    detail = ", ".join(f"Q({r.eps:g})={r.Q:.4f}" for r in reps) + f"; CLI exit {code}"
    return not bad, detail + (f"; failures: {bad}" if bad else "")


def criterion_7():
    bad, parts = [], []
    fam = WeightFamily(weight_for_radius("mstar", 1e6 / (1.0 + 1 / 4)), 1.0)
    for m in (1, 2, 3):
        for A in (1.0, 5.0):
            rep = lemma3_gap(fam, m, A, r_max=1e6)
            parts.append(f"Q3(m={m},A={A:g})={rep.Q:.3f}")
            if not (math.isfinite(rep.Q) and rep.stabilized):
                bad.append(f"lemma3 m={m} A={A:g}")
    if "l" not in _H_CACHE:
        criterion_5()
    for s in (0.5, 2.0):
        l_s = _H_CACHE["l"][s]
        wf = weight_for_radius("mstar", 1e6 / min(1.0, l_s * 0.9))
        rep = lemma4_gap(wf, s, 0.1, l_s, r_max=1e6)
        parts.append(f"Q4(s={s:g})={rep.Q:.3f}")
        if not (math.isfinite(rep.Q) and rep.stabilized):
            bad.append(f"lemma4 s={s:g}")
    return not bad, ", ".join(parts) + (f"; failures: {bad}" if bad else "")


def criterion_8():
    t0 = time.perf_counter()
    wf = WeightFunction.from_sequence(build_sequence("mstar", K=2000))
    zs = place_zeros(wf, 1.0, 500, d=0.5)
    R = zs.admissible_radius()
    Z = polar_grid(R, 60, 64)
    fit = check_eq8(zs, wf, Z, d=0.5)
    drift = truncation_drift(wf, 1.0, 500, Z, tol=1e-6)
    dt = time.perf_counter() - t0
    ok = (fit.holds_fraction == 1.0 and fit.A <= 5 and fit.excluded_fraction <= 0.10
          and drift.max_change <= 1e-6 and dt < 60)
    return ok, (f"radii <= mu_300 = {R:.2f}: A={fit.A:.3g}, C0={fit.C0:.4f}, holds {fit.holds_fraction:.0%}, "
                f"excluded {fit.excluded_fraction:.2%}, drift {drift.max_change:.3g}; {dt:.2f}s")


def criterion_9():
    t0 = time.perf_counter()
    bad = []
    wf = WeightFunction.from_sequence(build_sequence("mstar", K=2000))
    zs1 = place_zeros(wf, 1.0, 40)
    cos_t = TargetFunction("cos", omega=float(zs1.radii[0]))
    m_cos = fit_dirichlet(cos_t, nu=np.array([zs1.radii[0], -zs1.radii[0]]))
    if not (m_cos.weighted_residual <= 1e-10 and np.allclose(m_cos.c, [0.5, 0.5], atol=1e-10, rtol=0)):
        bad.append("cos not recovered")
    sigma = 0.17
    zs = place_zeros(wf, sigma, 40)
    fam = WeightFamily(wf, sigma)
    kw = KWeight(PSI, fam)
    gauss = TargetFunction("gaussian", a=1.0)
    resid, semi, proxy = [], [], []
    for J in (10, 20, 40):
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            model = fit_dirichlet(gauss, zs, J, X=5.0, n=2001, psi=PSI, ridge="kweight", wf=wf)
        resid.append(model.weighted_residual)
        semi.append(residual_seminorm(model, gauss, 1, 6, fam, PSI))
        proxy.append(coeff_decay_check(model, kw).proxy)
    ratio = resid[0] / resid[-1]
    if ratio < 10:
        bad.append(f"residual ratio {ratio:.3g} < 10")
    if not all(semi[i + 1] <= semi[i] + 1e-9 for i in range(2)):
        bad.append("seminorm not monotone")
    stab = proxy_stability(proxy, 10.0)
    if stab.status != "pass":
        bad.append(f"coefficient proxy grows {stab.growth:.3g}x")
    dt = time.perf_counter() - t0
    if dt >= 60:
        bad.append(f"runtime {dt:.1f}s")
    detail = (f"cos residual {m_cos.weighted_residual:.2g}; sigma={sigma}: residual ratio J10/J40 {ratio:.3g}, "
              f"seminorm {', '.join(f'{s:.4g}' for s in semi)}, proxy growth {stab.growth:.3g}; {dt:.2f}s")
    return not bad, detail + (f"; failures: {bad}" if bad else "")


CLI_RUNS = {
    1: [["seq-check", "--kind", k, "--rho", str(r), "--K", "2000"] for k, r in BUILTINS],
    2: [["verify", "sandwich", "--rho", "1"], ["verify", "sandwich", "--rho", "2"],
        ["weight-eval", "--r", "10"]],
    3: [["weight-eval", "--kind", k, "--rho", str(r), "--n", "10000"] for k, r in BUILTINS],
    4: [["conjugate"]],
    5: [["hfun", "--K", "100000"], ["verify", "lemma1", "--K", "100000"],
        ["verify", "lemma2", "--K", "100000", "--s", "0.5,1,2,4"]],
    6: [["verify", "prop1", "--eps", "0.25,0.5,1", "--C", "1.25"]],
    7: [["verify", "lemma3", "--m", "1,2,3", "--A", "1,5"],
        ["verify", "lemma4", "--s", "0.5,2", "--delta", "0.1", "--K", "100000"]],
    8: [["check8", "--J", "500", "--d", "0.5"]],
    9: [["fit", "--target", "cos", "--J", "1"],
        ["fit", "--target", "gaussian", "--sigma", "0.17", "--ridge", "kweight", "--J", "10,20,40",
         "--m", "1", "--k-max", "6"]],
}


def criterion_10():
    mismatched = []
    n_files = 0
    with tempfile.TemporaryDirectory() as tmp:
        for crit, runs in CLI_RUNS.items():
            for i, argv in enumerate(runs):
                outs = []
                for rep in ("a", "b"):
                    out = Path(tmp) / f"c{crit}_{i}_{rep}"
                    run(argv + ["--out", str(out)])
                    outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())} if out.exists() else {})
                n_files += len(outs[0])
                if not outs[0] or outs[0] != outs[1]:
                    mismatched.append(" ".join(argv))
    return not mismatched, f"{n_files} artifacts compared" + (f"; differing: {mismatched}" if mismatched else "")


CRITERIA = {
    1: ("class-M suite", criterion_1),
    2: ("w* sandwich", criterion_2),
    3: ("oracle equivalence", criterion_3),
    4: ("conjugate correctness", criterion_4),
    5: ("h/l closed forms, h properties, discrete vs continuous h", criterion_5),
    6: ("explicit almost-subadditivity bound", criterion_6),
    7: ("scaled-weight gaps", criterion_7),
    8: ("log-modulus residual bound", criterion_8),
    9: ("representation harness", criterion_9),
    10: ("determinism", criterion_10),
}


def _line(n, name, ok, detail):
    return f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"


@pytest.mark.acceptance
@pytest.mark.parametrize("n", list(CRITERIA))
def test_criterion(n):
    name, fn = CRITERIA[n]
    ok, detail = fn()
    line = _line(n, name, ok, detail)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = []
    for n, (name, fn) in CRITERIA.items():
        ok, detail = fn()
        results.append(ok)
        print(_line(n, name, ok, detail), flush=True)
    sys.exit(0 if all(results) else 1)
