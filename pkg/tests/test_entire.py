import math

import mpmath
import numpy as np
import pytest

from weightspace.entire import (check_eq8, count_consistent, excluded_mask, log_abs_N, make_bands, min_gap,
                                place_zeros, polar_grid, tail_bound, truncation_drift, zero_count)
from weightspace.errors import InputError, TruncationError
from weightspace.sequences import build_sequence
from weightspace.weights import WeightFunction, counting_n, w_value


def wf_of(kind="mstar", K=2000, rho=1.0):
    return WeightFunction.from_sequence(build_sequence(kind, K=K, rho=rho))


def product_oracle(z, zeros):
    with mpmath.workdps(50):
        p = mpmath.mpf(1)
        for lam in zeros:
            p *= 1 - mpmath.mpc(z) / mpmath.mpc(lam)
        return float(mpmath.log(abs(p)))


def test_radii_examples():
    zs = place_zeros(wf_of(K=10), 1.0, 4, layout="mirror")
    assert np.allclose(zs.radii, [2.0, 4.5, 64 / 9, 625 / 64], rtol=1e-14)
    zs = place_zeros(wf_of("gammafact", K=50), 2.0, 20, layout="mirror")
    assert np.allclose(zs.radii, 2.0 * (np.arange(1, 21) + 1), rtol=1e-12)
    for sigma in (0.5, 3.0):
        zs = place_zeros(wf_of(K=10), sigma, 3)
        assert zs.radii[0] == pytest.approx(sigma * 2.0, rel=1e-15)


def test_place_zeros_rejects():
    wf = wf_of(K=10)
    with pytest.raises(InputError):
        place_zeros(wf, 1.0, 11)
    with pytest.raises(InputError):
        place_zeros(wf, -1.0, 3)
    with pytest.raises(InputError):
        place_zeros(wf, 1.0, 3, layout="spiral")


def test_bands_respect_budget():
    mu = np.exp(wf_of().t)
    bands = make_bands(mu, 4.0)
    assert sum(m for _, m in bands) == mu.size
    starts = [k for k, _ in bands]
    assert starts == sorted(starts) and starts[0] == 0
    for k, m in bands:
        if m > 1:
            assert m * math.log(mu[k + m - 1] / mu[k]) <= 4.0 + 1e-12


def test_min_gap_examples():
    zs = place_zeros(wf_of(K=10), 1.0, 5, layout="mirror")
    rep = min_gap(zs)
    gaps = np.diff(zs.radii)
    exact = np.diff([2.0, 4.5, 64 / 9, 625 / 64, 7776 / 625])
    assert np.allclose(gaps, exact, rtol=1e-13)
    assert np.allclose(gaps, [2.5, 2.611, 2.654, 2.676], atol=1e-3)
    assert rep.d_max == pytest.approx(1.25, abs=1e-12) and rep.simple
    zs = place_zeros(wf_of("gammafact", K=50), 1.0, 20, layout="mirror")
    assert min_gap(zs).d_max == pytest.approx(0.5, abs=1e-12)


def test_equal_radii_violate_simplicity():
    a = math.log(3.0)
    wf = WeightFunction.from_sequence(build_sequence("table", lnM=[0.0, a, 2 * a]))
    zs = place_zeros(wf, 1.0, 2, layout="mirror", d=0.1)
    rep = min_gap(zs)
    assert not rep.simple and rep.status == "fail"


def test_log_abs_N_against_explicit_product():
    wf = wf_of(K=400)
    for layout in ("mirror", "banded"):
        zs = place_zeros(wf, 1.0, 150, layout=layout)
        zeros = zs.zeros()
        for z in (0.7 + 0.2j, 3.3 - 1.0j, 5.0j, -8.25 + 0.5j, 12.0 + 3.0j):
            val, _, _ = log_abs_N(z, zs, np.inf)
            assert val[0] == pytest.approx(product_oracle(z, zeros), abs=1e-9)


def test_log_abs_N_special_points():
    zs = place_zeros(wf_of(), 1.0, 500, layout="mirror")
    val, ex, _ = log_abs_N(0.0, zs)
    assert val[0] == 0.0
    val, ex, _ = log_abs_N(complex(zs.radii[0]), zs, np.inf)
    assert val[0] == -np.inf and ex[0]


def test_mirror_symmetry_and_imaginary_axis():
    zs = place_zeros(wf_of(), 1.0, 500, layout="mirror")
    rng = np.random.default_rng(7)
    z = rng.uniform(-6, 6, 200) + 1j * rng.uniform(-6, 6, 200)
    v, _, _ = log_abs_N(z, zs, np.inf)
    assert np.allclose(log_abs_N(np.conj(z), zs, np.inf)[0], v, atol=1e-12, rtol=0)
    assert np.allclose(log_abs_N(-z, zs, np.inf)[0], v, atol=1e-12, rtol=0)
    y = np.linspace(0.1, 20, 50)
    vy, ex, _ = log_abs_N(1j * y, zs, np.inf)
    assert np.all(vy >= 0) and not ex.any()
    theta = 2 * np.pi * np.arange(256) / 256
    for r in (3.0, 5.5, 8.2):
        vals = log_abs_N(r * np.exp(1j * theta), zs, np.inf)[0]
        assert theta[int(np.argmax(vals))] in (np.pi / 2, 3 * np.pi / 2)


def test_counting_consistency():
    wf = wf_of()
    for layout in ("mirror", "banded"):
        zs = place_zeros(wf, 1.5, 400, layout=layout)
        mid = np.sqrt(zs.radii[:-1] * zs.radii[1:])
        assert count_consistent(zs, wf, mid)
        assert np.array_equal(zero_count(zs, mid), counting_n(wf, mid / 1.5))


def test_truncation_guard_and_honesty():
    wf = wf_of()
    zs = place_zeros(wf, 1.0, 500, layout="mirror")
    with pytest.raises(TruncationError):
        log_abs_N(10.0, zs, 1e-6)
    z = polar_grid(20.0, 10, 16)
    a, _, tb = log_abs_N(z, zs, np.inf)
    b, _, _ = log_abs_N(z, place_zeros(wf, 1.0, 1000, layout="mirror"), np.inf)
    fin = np.isfinite(a)
    assert np.max(np.abs(a[fin] - b[fin])) <= tb


def test_banded_drift_within_tolerance():
    wf = wf_of()
    zs = place_zeros(wf, 1.0, 500)
    Z = polar_grid(zs.admissible_radius(), 60, 64)
    rep = truncation_drift(wf, 1.0, 500, Z)
    assert rep.status == "pass" and rep.max_change <= 1e-6
    assert rep.max_change <= rep.tail_bound * (1 + 1e-6) + 1e-12
    assert tail_bound(zs, zs.admissible_radius()) == pytest.approx(rep.tail_bound)


def test_check_eq8_banded():
    wf = wf_of()
    zs = place_zeros(wf, 1.0, 500, d=0.5)
    Z = polar_grid(zs.admissible_radius(), 60, 64)
    fit = check_eq8(zs, wf, Z)
    assert fit.status == "pass" and fit.holds_fraction == 1.0
    assert 0 <= fit.A <= 5 and fit.C0 >= 0
    assert fit.excluded_fraction <= 0.10


def test_check_eq8_rejects_bad_grids():
    wf = wf_of()
    zs = place_zeros(wf, 1.0, 500, d=0.5)
    with pytest.raises(InputError):
        check_eq8(zs, wf, polar_grid(zs.admissible_radius() * 2, 10, 8))
    with pytest.raises(InputError):
        check_eq8(zs, wf, np.array([complex(zs.rings[0, 0])] * 3 + [1.0]), d=0.5)


def test_flat_zone_residual_is_log_modulus():
    wf = wf_of()
    zs = place_zeros(wf, 1.0, 500, d=0.5)
    z = np.array([0.1, 0.5j, -0.8])
    v, ex, _ = log_abs_N(z, zs)
    assert np.all(w_value(wf, np.abs(z)) == 0.0)
    assert not ex.any() and np.all(np.abs(v) < 1.0)


def test_excluded_mask_marks_neighbourhoods():
    zs = place_zeros(wf_of(), 1.0, 100, layout="mirror", d=0.25)
    z = np.array([zs.radii[0] + 0.2, zs.radii[0] + 0.3, -zs.radii[1] + 0.1j])
    assert excluded_mask(z, zs).tolist() == [True, False, True]
