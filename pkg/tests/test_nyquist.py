import csv

import numpy as np
import pytest

from conftest import charpoly_roots
from nistab import fixtures as F
from nistab.errors import NotRational, OnContourZero, PoleAtOrigin
from nistab.nyquist import (
    ContourSpec,
    build_contour,
    closed_loop_poles_rational,
    winding_number,
)
from nistab.tf_core import ScalarTF, TransferMatrix


def tf(num, den):
    return TransferMatrix.scalar(ScalarTF.rational(num, den))


def test_contour_validation():
    with pytest.raises(ValueError):
        ContourSpec((1.0,), 0.0)
    with pytest.raises(ValueError):
        ContourSpec((1.0,), 1e-3, arc_radius=5.0)


def test_pole_at_origin_rejected():
    with pytest.raises(PoleAtOrigin):
        build_contour(tf((1.0,), (0.0, 1.0)))


def test_contour_indents_axis_poles():
    G, Gb = F.delay_pair(1.0)
    spec = build_contour(G, Gb)
    assert spec.indent_points == pytest.approx((1.0,))
    assert spec.epsilon == pytest.approx(1e-3)


def _rhp_count(roots):
    return int(np.sum(np.asarray(roots).real > 1e-8))


@pytest.mark.parametrize("tau", [0.1, 0.3, 0.5, 1.0])
def test_scalar_winding_matches_characteristic_roots(tau):
    # closed loop of 3/(s^2+1) and 1/(s+1): (s^2+1)(s+1) - 3 tau
    G, Gb = F.unstable_scalar_pair(3.0)
    res = winding_number(G, Gb, tau)
    # s^3 + s^2 + s + 1 - 3 tau as a companion matrix
    c = [1.0 - 3 * tau, 1.0, 1.0]
    C = np.array([[0, 0, -c[0]], [1, 0, -c[1]], [0, 1, -c[2]]])
    assert res.winding == _rhp_count(charpoly_roots(C))
    assert res.residual < 0.1


@pytest.mark.parametrize("T", [0.1, 1.0, 10.0])
def test_delay_winding_zero(T):
    G, Gb = F.delay_pair(T)
    res = winding_number(G, Gb, 1.0)
    assert res.winding == 0
    assert abs(res.upper_half_winding) < 0.05
    assert res.arc_deviation < 1e-6


def test_arm_closed_loop_stable():
    for delta in ("delta1", "delta2"):
        G, Gb = F.arm_pair(delta)
        assert winding_number(G, Gb, 1.0).winding == 0
        assert np.max(closed_loop_poles_rational(G, Gb).real) < 0


def test_closed_loop_polynomial_matches_state_space():
    # 1/(s+1) in feedback with 2/(s+3): (s+1)(s+3) - 2 tau
    G = tf((1.0,), (1.0, 1.0))
    Gb = tf((2.0,), (3.0, 1.0))
    r = np.sort_complex(closed_loop_poles_rational(G, Gb, 1.0))
    assert np.allclose(r, np.sort_complex(np.roots([1, 4, 1])), atol=1e-10)


def test_closed_loop_poles_need_rational():
    G, Gb = F.delay_pair(1.0)
    with pytest.raises(NotRational):
        closed_loop_poles_rational(G, Gb)


def test_on_contour_zero():
    # det(I - G G) = s(s + 2)/(s + 1)^2 vanishes at s = 0
    G = tf((1.0,), (1.0, 1.0))
    with pytest.raises(OnContourZero):
        winding_number(G, G, 1.0)


def test_csv_output(tmp_path):
    G, Gb = F.delay_pair(1.0)
    out = tmp_path / "phase.csv"
    winding_number(G, Gb, 0.5, csv_path=out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["segment", "s_re", "s_im", "det_re", "det_im", "unwrapped_phase"]
    assert len(rows) > 100


def test_thread_cap_gives_same_answer(monkeypatch):
    G, Gb = F.arm_pair("delta1")
    a = winding_number(G, Gb, 1.0)
    monkeypatch.setenv("NI_NUM_THREADS", "1")
    b = winding_number(G, Gb, 1.0)
    assert a.winding == b.winding and a.min_abs_det == b.min_abs_det


def test_random_rational_pairs_oracles_agree(rng):
    for _ in range(8):
        G, Gb = F.random_pair(rng)
        for tau in (0.5, 1.0):
            try:
                w = winding_number(G, Gb, tau).winding
            except OnContourZero:
                continue
            assert w == _rhp_count(closed_loop_poles_rational(G, Gb, tau))
