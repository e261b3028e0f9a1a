import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nistab.errors import DimensionMismatch
from nistab.iqc import (
    HermitianMultiplier,
    Mode,
    check_pair,
    check_pair_batch,
    corollary_gain_multipliers,
    feasibility_at_point,
    lemma1_multiplier,
    midband_multiplier,
    passivity_multiplier,
    shift_amount,
    shifted_multiplier,
)
from nistab.linalg import real_ray_spectrum_test
from nistab.verdict import thm_form_multiplier


def _cplx(rng, n, scale=1.0):
    return scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


def test_multiplier_must_be_hermitian():
    with pytest.raises(ValueError):
        HermitianMultiplier(np.array([[0, 1], [0, 0]]), "Pi0")


def test_unknown_label():
    with pytest.raises(ValueError):
        HermitianMultiplier(np.eye(2), "Nope")


def test_midband_shape():
    P = midband_multiplier(2).matrix
    assert P.shape == (4, 4) and np.allclose(P, P.conj().T)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        check_pair(passivity_multiplier(2), np.eye(1), np.eye(1))


def test_small_gain_multiplier_scalar():
    # G(0) = 0.2, Gbar(0) = 4: product 0.8 < 1
    p0, _ = corollary_gain_multipliers(np.array([[0.2]]), np.array([[0.0]]))
    r = check_pair(p0, np.array([[4.0]]), np.array([[0.2]]), mode=Mode.THM)
    assert r.passed and r.upper_margin > 0


def test_batch_agrees_with_single(rng):
    Pi = lemma1_multiplier(_cplx(rng, 2))
    Abars = np.stack([_cplx(rng, 2) for _ in range(5)])
    As = np.stack([_cplx(rng, 2) for _ in range(5)])
    b = check_pair_batch(Pi, Abars, As, mode=Mode.REMARK)
    for k in range(5):
        r = check_pair(Pi, Abars[k], As[k], mode=Mode.REMARK)
        assert r.upper_margin == b.upper_margin[k]
        assert r.lower_min == b.lower_min[k]


def test_lemma1_certifies_feasible_pairs(rng):
    done = 0
    while done < 50:
        n = int(rng.integers(1, 4))
        A, B = _cplx(rng, n), _cplx(rng, n)
        if not real_ray_spectrum_test(B @ A, 1.0).clear:
            continue
        done += 1
        r = check_pair(lemma1_multiplier(B), A, B, mode=Mode.REMARK)
        assert r.upper_margin > 0
        assert -r.lower_min <= 1e-10


def test_lemma1_non_strict_form_is_zero(rng):
    B = _cplx(rng, 3)
    Y = lemma1_multiplier(B).matrix
    S = np.vstack([np.eye(3), B])
    assert np.linalg.norm(S.conj().T @ Y @ S) < 1e-12


def test_feasibility_infeasible_scalar():
    f = feasibility_at_point(np.array([[1.0]]), np.array([[2.0]]))
    assert not f.feasible
    lam, tau = f.witness
    assert lam == 2 and tau == pytest.approx(0.5)


def test_thm_form_conversion(rng):
    done = 0
    while done < 30:
        n = int(rng.integers(1, 3))
        Abar, A = _cplx(rng, n), _cplx(rng, n)
        if not real_ray_spectrum_test(A @ Abar, 1.0).clear:
            continue
        done += 1
        Pi = thm_form_multiplier(Abar, A, "Pi0")
        assert Pi is not None
        r = check_pair(Pi, Abar, A, mode=Mode.THM)
        assert r.passed, r


def test_shift_keeps_strict_and_makes_non_strict_strict(rng):
    G0 = np.array([[0.5]])
    Gb0 = np.array([[1.2]])
    p0, _ = corollary_gain_multipliers(G0, np.zeros((1, 1)))
    r = check_pair(p0, Gb0, G0, mode=Mode.THM)
    mu = shift_amount(r, Gb0)
    S = shifted_multiplier(p0, Mode.THM, mu)
    r2 = check_pair(S, Gb0, G0, mode=Mode.THM)
    assert r2.upper_margin >= r.upper_margin - 1e-12
    assert r2.lower_min > 0


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_scalar_feasibility_matches_product(a, b):
    f = feasibility_at_point(np.array([[a]]), np.array([[b]]))
    assert f.feasible == (a * b < 1 - 1e-9)
