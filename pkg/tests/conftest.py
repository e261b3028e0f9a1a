"""Shared test oracles, computed independently of the package under test."""

from __future__ import annotations

from pathlib import Path

import mpmath as mp
import numpy as np
import pytest
from scipy.optimize import minimize_scalar

ROOT = Path(__file__).resolve().parent.parent
SYSTEMS = ROOT / "systems"
REPORTS = ROOT / "reports"

mp.mp.dps = 40


# -- high-precision evaluation -------------------------------------------------

def mp_term(num, den, delay, s):
    """One ``num/den * exp(-delay s)`` term in mpmath, ascending coefficients."""
    s = mp.mpc(s)
    n = sum(mp.mpf(c) * s**k for k, c in enumerate(num))
    d = sum(mp.mpf(c) * s**k for k, c in enumerate(den))
    return n / d * mp.exp(-mp.mpf(delay) * s)


def mp_eval(M, s):
    """``M(s)`` as an mpmath matrix, using only the stored coefficients."""
    out = mp.matrix(M.rows, M.cols)
    for (i, j), e in M.iter_entries():
        out[i, j] = sum((mp_term(t.num_coeffs, t.den_coeffs, t.delay, s) for t in e.terms), mp.mpc(0))
    return out


def mp_residue(M, omega0, i=0, j=0):
    """Richardson-extrapolated ``lim h->0 h * j M(j w0 + h)`` for one entry."""
    s0 = mp.mpc(0, omega0)

    def f(h):
        return h * 1j * mp_eval(M, s0 + h)[i, j]

    hs = [mp.mpf(10) ** -k for k in range(6, 10)]
    vals = [f(h) for h in hs]
    # first-order error in h; repeated elimination with ratio 10
    for _ in range(len(vals) - 1):
        vals = [(10 * vals[k + 1] - vals[k]) / 9 for k in range(len(vals) - 1)]
    return complex(vals[0])


# -- characteristic polynomials ------------------------------------------------

def charpoly_roots(X):
    """Eigenvalues through Faddeev-LeVerrier and mpmath.polyroots."""
    X = mp.matrix(np.asarray(X, dtype=complex).tolist())
    n = X.rows
    c = [mp.mpc(1)]
    Mk = mp.zeros(n, n)
    eye = mp.eye(n)
    for k in range(1, n + 1):
        Mk = X * Mk + c[-1] * eye
        ck = -sum((X * Mk)[i, i] for i in range(n)) / k
        c.append(ck)
    roots = mp.polyroots(c, maxsteps=200, extraprec=200)
    return np.array([complex(r) for r in np.atleast_1d(roots)])


# -- brute-force tau oracle ----------------------------------------------------

def min_abs_det_tau(X, points: int = 10_000):
    """Minimum of ``|det(I - tau X)|`` over [0, 1].

    A uniform grid is followed by a bounded scalar search in the cells
    around the best few grid points, so a crossing between grid nodes is
    not missed.
    """
    X = np.asarray(X, dtype=complex)
    n = X.shape[0]
    taus = np.linspace(0.0, 1.0, points)
    dets = np.abs(np.linalg.det(np.eye(n)[None] - taus[:, None, None] * X[None]))
    best = float(dets.min())
    h = taus[1] - taus[0]
    f = lambda t: abs(np.linalg.det(np.eye(n) - t * X))
    for k in np.argsort(dets)[:3]:
        lo, hi = max(0.0, taus[k] - h), min(1.0, taus[k] + h)
        r = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        best = min(best, float(r.fun))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# -- acceptance summary --------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
