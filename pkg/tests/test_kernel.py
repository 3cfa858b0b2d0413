import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pksvm.dataset import SIGMA_HIGH, SIGMA_LOW, random_gaussian_points
from pksvm.errors import DimensionMismatch, NotPSD
from pksvm.kernel import (
    GaussianPoint,
    KernelParams,
    gram_matrix,
    monte_carlo_kernel,
    pk_kernel,
    rbf_kernel,
)

ONE = KernelParams(1.0)


def test_rbf_equal_points():
    assert rbf_kernel([0.3, -1.2], [0.3, -1.2], ONE) == 1.0


def test_rbf_unit_distance():
    assert rbf_kernel([0.0], [1.0], ONE) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert rbf_kernel([0.0], [1.0], KernelParams(10.0)) == pytest.approx(math.exp(-0.005), abs=1e-15)


def test_rbf_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        rbf_kernel([0.0], [0.0, 1.0], ONE)


def test_kernel_params_validation():
    with pytest.raises(ValueError):
        KernelParams(0.0)
    with pytest.raises(ValueError):
        KernelParams(-1.0)


def test_gaussian_point_validation():
    with pytest.raises(NotPSD):
        GaussianPoint([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(DimensionMismatch):
        GaussianPoint([0.0, 0.0], np.eye(3))


def test_pk_kernel_self_is_one():
    for p in random_gaussian_points(3, 10, seed=1):
        assert pk_kernel(p, p, ONE) == 1.0


def test_pk_kernel_zero_covariance_reduces_to_rbf(rng):
    for _ in range(50):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        assert pk_kernel(GaussianPoint.exact(x), GaussianPoint.exact(y), ONE) == pytest.approx(
            rbf_kernel(x, y, ONE), abs=1e-15)


def test_pk_kernel_determinant_factor_only():
    a = GaussianPoint([0.0], [[1.0]])
    b = GaussianPoint([0.0], [[0.0]])
    assert pk_kernel(a, b, ONE) == pytest.approx(2 ** -0.5, abs=1e-15)


def test_pk_kernel_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        pk_kernel(GaussianPoint.exact([0.0]), GaussianPoint.exact([0.0, 0.0]), ONE)


def test_pk_kernel_paper_covariances_match_monte_carlo():
    a = GaussianPoint([0.0, 0.0], SIGMA_LOW)
    b = GaussianPoint([1.0, 0.0], SIGMA_HIGH)
    est, se = monte_carlo_kernel(a, b, ONE, 10**6, seed=11)
    assert abs(pk_kernel(a, b, ONE) - est) <= 3 * se


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_pk_kernel_matches_quadrature_1d(sigma):
    kp = KernelParams(sigma)
    cases = [(0.0, 0.04, 1.0, 0.25), (-0.5, 1.0, 0.7, 0.0), (0.2, 2.0, 0.2, 0.3)]
    for xa, va, xb, vb in cases:
        sa, sb = math.sqrt(va), math.sqrt(vb)

        def integrand(e):
            d = xa - xb + (sa - sb) * e
            return math.exp(-0.5 * e * e - d * d / (2 * sigma**2)) / math.sqrt(2 * math.pi)

        expected, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)
        got = pk_kernel(GaussianPoint([xa], [[va]]), GaussianPoint([xb], [[vb]]), kp)
        assert got == pytest.approx(expected, rel=1e-10)


def test_pk_kernel_symmetric_bitwise():
    pts = random_gaussian_points(3, 20, seed=5)
    for a, b in zip(pts[::2], pts[1::2]):
        assert pk_kernel(a, b, ONE) == pk_kernel(b, a, ONE)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1), st.floats(0.1, 5.0))
def test_pk_kernel_bounded(n, seed, sigma):
    a, b = random_gaussian_points(n, 2, seed)
    k = pk_kernel(a, b, KernelParams(sigma))
    assert 0.0 < k <= 1.0
    if not (np.array_equal(a.mean, b.mean) and np.array_equal(a.cov, b.cov)):
        assert k < 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_equal_covariance_reduces_to_rbf(n, seed):
    r = np.random.default_rng(seed)
    (p,) = random_gaussian_points(n, 1, seed)
    x, y = r.standard_normal(n), r.standard_normal(n)
    k = pk_kernel(GaussianPoint(x, p.cov), GaussianPoint(y, p.cov), ONE)
    assert abs(k - rbf_kernel(x, y, ONE)) <= 1e-12


def test_covariance_gap_decay_1d():
    variances = np.linspace(0.0, 4.0, 41)
    a = GaussianPoint([0.3], [[0.0]])
    vals = [pk_kernel(a, GaussianPoint([0.3], [[v]]), ONE) for v in variances]
    assert np.all(np.diff(vals) < 0)


def test_gram_single_point():
    np.testing.assert_array_equal(gram_matrix([GaussianPoint([1.0, 2.0], SIGMA_LOW)], ONE), [[1.0]])


def test_gram_entries_match_pairwise_kernel():
    pts = random_gaussian_points(2, 15, seed=3)
    G = gram_matrix(pts, ONE)
    np.testing.assert_array_equal(np.diag(G), np.ones(15))
    np.testing.assert_array_equal(G, G.T)
    for i in range(15):
        for j in range(15):
            assert G[i, j] == pytest.approx(pk_kernel(pts[i], pts[j], ONE), rel=1e-14, abs=1e-300)


def test_gram_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        gram_matrix([GaussianPoint.exact([0.0]), GaussianPoint.exact([0.0, 1.0])], ONE)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gram_psd(n):
    for seed in range(3):
        pts = random_gaussian_points(n, 100, seed=seed)
        assert np.linalg.eigvalsh(gram_matrix(pts, ONE)).min() >= -1e-8


def test_monte_carlo_identical_points():
    (p,) = random_gaussian_points(2, 1, seed=8)
    assert monte_carlo_kernel(p, p, ONE, 1000, seed=0) == (1.0, 0.0)


def test_monte_carlo_zero_covariance_is_exact():
    a, b = GaussianPoint.exact([0.0, 1.0]), GaussianPoint.exact([0.5, -0.2])
    est, se = monte_carlo_kernel(a, b, ONE, 250_001, seed=0)
    assert est == rbf_kernel(a.mean, b.mean, ONE)
    assert se == 0.0


def test_monte_carlo_single_sample_has_infinite_error():
    a, b = random_gaussian_points(2, 2, seed=2)
    est, se = monte_carlo_kernel(a, b, ONE, 1, seed=0)
    assert 0 < est <= 1 and se == np.inf


def test_monte_carlo_deterministic_per_seed():
    a, b = random_gaussian_points(2, 2, seed=4)
    assert monte_carlo_kernel(a, b, ONE, 150_000, 9) == monte_carlo_kernel(a, b, ONE, 150_000, 9)
    assert monte_carlo_kernel(a, b, ONE, 150_000, 9) != monte_carlo_kernel(a, b, ONE, 150_000, 10)


def test_monte_carlo_uses_shared_noise():
    # with a shared draw, equal covariances leave only the mean offset: no randomness at all
    a = GaussianPoint([0.0, 0.0], SIGMA_HIGH)
    b = GaussianPoint([1.0, 0.5], SIGMA_HIGH)
    est, se = monte_carlo_kernel(a, b, ONE, 10_000, seed=1)
    assert est == pytest.approx(rbf_kernel(a.mean, b.mean, ONE), abs=1e-15)
    assert se < 1e-15


@pytest.mark.parametrize("n", [1, 2, 3])
def test_monte_carlo_agreement(n):
    pts = random_gaussian_points(n, 10, seed=100 + n)
    for k in range(5):
        a, b = pts[2 * k], pts[2 * k + 1]
        est, se = monte_carlo_kernel(a, b, ONE, 200_000, seed=k)
        assert abs(pk_kernel(a, b, ONE) - est) <= 3 * se


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(2, 60), st.integers(0, 2**32 - 1), st.floats(0.3, 3.0))
def test_gram_psd_near_duplicates(n, count, seed, sigma):
    # tightly clustered means make the Gram matrix nearly singular
    pts = random_gaussian_points(n, count, seed, mean_scale=0.05, cov_scale=0.3)
    G = gram_matrix(pts, KernelParams(sigma))
    assert np.linalg.eigvalsh(G).min() >= -1e-8
