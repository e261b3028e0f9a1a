import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import charpoly_roots, min_abs_det_tau
from nistab.errors import NotHermitian, NotPositiveDefinite
from nistab.linalg import (
    hermitian_check,
    hermitian_eigs,
    inv_sqrt_psd,
    is_psd,
    real_ray_spectrum_test,
    spectral_radius,
    svd_extremes,
)


def _herm(rng, n):
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (X + X.conj().T)


def test_trivial_eigs():
    assert np.allclose(hermitian_eigs(np.eye(2)), [1, 1])
    assert np.allclose(hermitian_eigs(np.array([[0, 1j], [-1j, 0]])), [-1, 1])


def test_eigs_match_charpoly(rng):
    for _ in range(10):
        X = _herm(rng, 4)
        ref = np.sort(charpoly_roots(X).real)
        assert np.allclose(hermitian_eigs(X), ref, atol=1e-10)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        hermitian_eigs(np.array([[0, 1], [0, 0]]))


def test_hermitian_check_fields(rng):
    r = hermitian_check(_herm(rng, 3))
    assert r.min_eig <= r.max_eig
    assert r.hermitian_defect < 1e-15


def test_svd_extremes():
    assert svd_extremes(np.diag([3.0, 2.0])) == pytest.approx((3, 2))
    assert svd_extremes(np.zeros((2, 2))) == (0, 0)
    assert svd_extremes(np.array([[0.8]])) == pytest.approx((0.8, 0.8))


def test_svd_squares_match_gram_eigs(rng):
    for _ in range(20):
        X = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        hi, lo = svd_extremes(X)
        e = hermitian_eigs(X.conj().T @ X)
        assert hi**2 == pytest.approx(e[-1], rel=1e-10)
        assert lo**2 == pytest.approx(e[0], rel=1e-10, abs=1e-14)


def test_spectral_radius(rng):
    assert spectral_radius(np.array([[0, 1], [0, 0]])) == 0
    assert spectral_radius(np.diag([0.8, -0.3])) == pytest.approx(0.8)
    for _ in range(10):
        X = rng.normal(size=(3, 3))
        assert spectral_radius(X) == pytest.approx(np.max(np.abs(charpoly_roots(X))), rel=1e-10)


def test_inv_sqrt(rng):
    assert np.allclose(inv_sqrt_psd(np.eye(2)), np.eye(2))
    assert np.allclose(inv_sqrt_psd(np.diag([4.0, 9.0])), np.diag([0.5, 1 / 3]))
    for _ in range(20):
        B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        X = np.eye(3) + B.conj().T @ B
        Y = inv_sqrt_psd(X)
        assert np.linalg.norm(Y @ X @ Y - np.eye(3)) < 1e-10
        assert np.linalg.norm(Y - Y.conj().T) < 1e-12
        assert np.linalg.norm(Y @ X - X @ Y) <= 1e-10 * np.linalg.norm(X)


def test_inv_sqrt_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        inv_sqrt_psd(np.diag([1.0, -1.0]))


def test_psd_tolerance_is_relative():
    assert is_psd(np.diag([1e6, -1e-5]))
    assert not is_psd(np.diag([1.0, -1e-6]))


def test_ray_test_examples():
    assert real_ray_spectrum_test(np.array([[0.8]]), 1.0).clear
    r = real_ray_spectrum_test(np.array([[2.0]]), 1.0)
    assert not r.clear and r.witness == 2 and r.tau_star == pytest.approx(0.5)
    X = np.diag([1.5 + 0.5j, 1.5 - 0.5j])
    assert real_ray_spectrum_test(X, 1.0).clear
    assert min_abs_det_tau(X) > 1e-3


def _borderline(m):
    return 1e-7 <= m <= 1e-5


def test_ray_test_agrees_with_tau_grid(rng):
    disagreements = 0
    checked = 0
    for k in range(1000):
        n = 2 + k % 2
        X = rng.normal(size=(n, n)) * rng.uniform(0.2, 2.0)
        m = min_abs_det_tau(X)
        if _borderline(m):
            continue
        checked += 1
        if real_ray_spectrum_test(X, 1.0).clear != (m > 1e-5):
            disagreements += 1
    assert checked > 900
    assert disagreements == 0


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (2, 2), elements=st.floats(-3, 3)))
def test_ray_witness_is_a_singular_tau(X):
    r = real_ray_spectrum_test(X, 1.0)
    if not r.clear and r.tau_star is not None:
        d = np.linalg.det(np.eye(2) - r.tau_star * X)
        assert abs(d) < 1e-6 * (1 + np.abs(X).sum()) ** 2
