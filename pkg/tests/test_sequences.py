import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weightspace.errors import InputError
from weightspace.sequences import (LogSequence, build_sequence, check_eq1_limit, check_i1, check_i3,
                                   check_i4, class_m_report, estimate_i2, sequence_from_spec, to_vfun)

mpmath.mp.dps = 200


def oracle_lnM(kind, k, rho=1):
    n = mpmath.mpf(k)
    if kind == "mstar":
        return rho * n * mpmath.log(n + 1)
    if kind == "gammafact":
        return rho * mpmath.loggamma(n + 2)
    return (n + 1) * mpmath.log(n + 1) * mpmath.atan(n + 1)


@pytest.mark.parametrize("kind,rho", [("mstar", 1), ("mstar", 2), ("gammafact", 1), ("gammafact", 2),
                                      ("arctg", 1)])
def test_builtin_tables_match_high_precision(kind, rho):
    seq = build_sequence(kind, K=100, rho=rho)
    for k in range(101):
        ref = float(oracle_lnM(kind, k, rho))
        assert abs(seq.lnM[k] - ref) <= 1e-10 * max(1.0, abs(ref))


def test_small_tables():
    assert np.allclose(build_sequence("mstar", K=4).lnM,
                       [0, math.log(2), 2 * math.log(3), 3 * math.log(4), 4 * math.log(5)], rtol=1e-15)
    assert np.allclose(build_sequence("gammafact", K=3).lnM, [0, math.log(2), math.log(6), math.log(24)],
                       rtol=1e-15)
    arctg = build_sequence("arctg", K=1)
    assert arctg.lnM[0] == 0.0 and arctg.K == 1


def test_rejects_bad_input():
    with pytest.raises(InputError):
        build_sequence("nope")
    with pytest.raises(InputError):
        build_sequence("mstar", rho=0.5)
    with pytest.raises(InputError):
        build_sequence("table", lnM=[1.0, 2.0])
    with pytest.raises(InputError):
        build_sequence("table", lnM=[0.0, 2.0, 1.0])
    with pytest.raises(InputError):
        sequence_from_spec({"kind": "mstar", "bogus": 1})


def test_i1_examples():
    assert check_i1(build_sequence("mstar", K=2000)).ok
    res = check_i1(build_sequence("table", lnM=[0.0, math.log(3), math.log(4)]))
    assert not res.ok and res.witness == 1
    assert check_i1(build_sequence("gammafact", K=500, rho=2)).ok


def test_i2_gammafact_has_unit_constants():
    res = estimate_i2(build_sequence("gammafact", K=2000))
    assert res.status == "pass"
    # the fit takes the largest tail H2, here (K+1)^(1/K), which leaves H1 = 1
    assert res.H2 == pytest.approx(2001.0 ** (1 / 2000), rel=1e-12)
    assert res.H1 == pytest.approx(1.0, abs=1e-12)
    # the pair H1 = H2 = 1 is admissible too: (k+1)! >= k!
    k = np.arange(2001)
    seq = build_sequence("gammafact", K=2000)
    assert np.all(seq.lnM - np.array([float(mpmath.loggamma(x + 1)) for x in k]) >= -1e-12)


def test_i2_mstar_against_stirling():
    res = estimate_i2(build_sequence("mstar", K=2000))
    assert res.status == "pass" and res.residual >= -1e-9
    assert 2.5 <= res.H2 <= math.e
    # oracle: H2 is the tail minimum of ((k+1)^k/k!)^(1/k)
    k = np.arange(1000, 2001)
    q = [float((k_ * mpmath.log(k_ + 1) - mpmath.loggamma(k_ + 1)) / k_) for k_ in k.tolist()]
    assert math.log(res.H2) == pytest.approx(min(q), abs=1e-10)


def test_i2_ln_factorial_minus_k_is_not_monotone():
    lnM = [float(mpmath.loggamma(k + 1)) - k for k in range(200)]
    with pytest.raises(InputError):
        build_sequence("table", lnM=lnM)
    # raw data still satisfies the factorial bound with H2 = 1/e
    res = estimate_i2(LogSequence("raw", {}, np.array(lnM)))
    assert res.status == "pass"
    assert res.H2 == pytest.approx(math.exp(-1), rel=1e-12)


def test_i2_half_factorial_fails():
    k = np.arange(2001, dtype=float)
    lnM = np.array([0.5 * float(mpmath.loggamma(x + 1)) for x in k])
    res = estimate_i2(build_sequence("table", lnM=lnM))
    assert res.status == "fail"
    assert res.tail_slope < -0.05


def test_i3_mstar_closed_form():
    seq = build_sequence("mstar", K=2000)
    rows = check_i3(seq, (2.0, 3.0))
    for row in rows:
        s = int(row.s)
        n = row.window[0]
        # (lnM[sn] - s lnM[n]) / n = s ln((sn+1)/(n+1)) increases in n, so the window min sits at n_lo
        exact = float(s * mpmath.log(mpmath.mpf(s * n + 1) / (n + 1)))
        assert row.proxy == pytest.approx(exact, abs=1e-11)
        assert row.status == "pass"
        assert abs(row.proxy - s * math.log(s)) <= s / n


def test_i3_gammafact_stirling():
    row = check_i3(build_sequence("gammafact", K=5000), (2.0,))[0]
    lo, hi = row.window
    with mpmath.workdps(30):
        ref = min(float((mpmath.loggamma(2 * n + 2) - 2 * mpmath.loggamma(n + 2)) / n) for n in range(lo, hi + 1))
    assert row.proxy == pytest.approx(ref, abs=1e-11)
    # Stirling: the terms approach 2 ln 2 at rate O(ln n / n)
    assert abs(row.proxy - 2 * math.log(2)) <= 2 * math.log(lo) / lo


def test_i3_rejects_s_le_1():
    with pytest.raises(InputError):
        check_i3(build_sequence("mstar", K=2000), (1.0,))


def test_i4_examples():
    seq = build_sequence("gammafact", K=2200)
    res = check_i4(seq, 1.0, n_max=200, m_max=2000)
    assert res.status == "pass" and res.residual <= 1e-9
    assert math.isfinite(res.p) and math.isfinite(res.t)
    res = check_i4(build_sequence("mstar", K=2000), 0.5)
    assert res.status == "pass" and res.residual <= 1e-9
    assert res.p >= 1.0


def test_i4_brute_force_bound():
    seq = build_sequence("mstar", K=400)
    res = check_i4(seq, 0.5, n_max=20, m_max=380)
    lnM = seq.lnM
    for n in range(21):
        lhs = max(lnM[m + n] - lnM[m] - m * math.log1p(0.5) for m in range(381))
        assert lhs <= math.log(res.p) + n * math.log(res.t) + lnM[n] + 1e-9


def test_eq1_values():
    seq = build_sequence("mstar", K=10001)
    n = 10000
    val = math.exp((seq.lnM[n + 1] - seq.lnM[n]) / n)
    # M_{n+1}/M_n = (n+2)(1+1/(n+1))^n ~ e(n+2)
    assert val == pytest.approx(math.exp(math.log(math.e * (n + 2)) / n), abs=1e-7)
    assert val == pytest.approx(1.0011, abs=1e-4)
    g = build_sequence("gammafact", K=10001)
    val = math.exp((g.lnM[n + 1] - g.lnM[n]) / n)
    assert val == pytest.approx(math.exp(math.log(n + 2) / n), rel=1e-12)
    assert val == pytest.approx(1.0009, abs=5e-5)
    assert check_eq1_limit(seq).status == "pass"


def test_eq1_constant_tail_is_one():
    lnM = np.concatenate([np.arange(200, dtype=float), np.full(100, 199.0)])
    seq = build_sequence("table", lnM=lnM)
    n = np.arange(200, 299)
    assert np.all(np.exp((seq.lnM[n + 1] - seq.lnM[n]) / n) == 1.0)


def test_v_l_interpolation():
    g = to_vfun(build_sequence("gammafact", K=10))
    assert g(0.5) == pytest.approx(0.5 * math.log(2), rel=1e-15)
    v = to_vfun(build_sequence("mstar", K=10))
    assert v(2.0) == pytest.approx(2 * math.log(3), rel=1e-15)
    assert v(1.25) == pytest.approx(0.75 * math.log(2) + 0.25 * 2 * math.log(3), rel=1e-14)


@pytest.mark.parametrize("kind,rho", [("mstar", 1), ("mstar", 2), ("gammafact", 1), ("gammafact", 2),
                                      ("arctg", 1)])
def test_class_m_builtins(kind, rho):
    rep = class_m_report(build_sequence(kind, K=2000, rho=rho))
    assert rep.status == "pass"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 5.0, allow_nan=False), min_size=2, max_size=40))
def test_i1_agrees_with_second_differences(steps):
    lnM = np.concatenate([[0.0], np.cumsum(steps)])
    res = check_i1(build_sequence("table", lnM=lnM))
    d2 = np.diff(lnM, 2)
    assert res.ok == bool(np.all(d2 >= -1e-12 * np.maximum(1.0, np.abs(lnM[1:-1]))))
