"""Reference systems: the delay example, the two-link robotic arm and random NI/SNI pairs."""

from __future__ import annotations

import numpy as np

from .tf_core import DelayedRationalTerm, ScalarTF, TransferMatrix

WN2 = 3.4**2
ARM_PREFACTOR = 1 / 6.6667e-8
ARM_RESIDUES = np.array([[3.0907, 3.557e-4], [3.557e-4, 2.35]])
ARM_FEEDTHROUGH = 0.3
ARM_INTERPRETATIONS = ("resonant", "full", "none")

IRC_GAMMA = np.array([[35.0, 15.0], [15.0, 20.0]])
IRC_PHI = np.array([[0.745, 0.521], [0.521, 1.021]])
IRC_DELTA1 = np.array([[2.0871, -1.0650], [-1.0650, 1.5229]])
IRC_DELTA2 = 10.0 * np.eye(2)


def delay_pair(T: float) -> tuple[TransferMatrix, TransferMatrix]:
    """``G = 0.2/(s^2+1)`` and ``Gbar = (e^{-Ts} + 3)/(s+1)``."""
    G = TransferMatrix.scalar(ScalarTF.rational((0.2,), (1.0, 0.0, 1.0)))
    Gbar = TransferMatrix.scalar(
        ScalarTF((DelayedRationalTerm((1.0,), (1.0, 1.0), T), DelayedRationalTerm((3.0,), (1.0, 1.0))))
    )
    return G, Gbar


def unstable_scalar_pair(gain: float = 3.0) -> tuple[TransferMatrix, TransferMatrix]:
    """``G = gain/(s^2+1)`` against ``Gbar = 1/(s+1)``; ``G(0)Gbar(0) = gain``."""
    G = TransferMatrix.scalar(ScalarTF.rational((gain,), (1.0, 0.0, 1.0)))
    Gbar = TransferMatrix.scalar(ScalarTF.rational((1.0,), (1.0, 1.0)))
    return G, Gbar


def robotic_arm(interpretation: str = "resonant") -> TransferMatrix:
    """Two-input two-output arm model with a lightly modelled resonance at 3.4 rad/s.

    ``resonant`` scales only the resonant terms by the large prefactor,
    ``full`` scales the feedthrough as well and ``none`` drops it.
    """
    if interpretation not in ARM_INTERPRETATIONS:
        raise ValueError(f"interpretation must be one of {ARM_INTERPRETATIONS}")
    pf = 1.0 if interpretation == "none" else ARM_PREFACTOR
    d = ARM_FEEDTHROUGH * (pf if interpretation == "full" else 1.0)
    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            terms = [DelayedRationalTerm((pf * ARM_RESIDUES[i, j],), (WN2, 0.0, 1.0))]
            if i == j:
                terms.append(DelayedRationalTerm((d,), (1.0,)))
            row.append(ScalarTF(tuple(terms)))
        rows.append(tuple(row))
    return TransferMatrix(tuple(rows))


def irc_controller(Gamma=IRC_GAMMA, Phi=IRC_PHI, Delta=IRC_DELTA1) -> TransferMatrix:
    """Integral resonant controller ``(sI + Gamma Phi)^{-1} Gamma - Delta`` for n = 2."""
    Gamma = np.asarray(Gamma, dtype=float)
    Delta = np.asarray(Delta, dtype=float)
    M = Gamma @ np.asarray(Phi, dtype=float)
    den = (np.linalg.det(M), np.trace(M), 1.0)
    # adj(sI + M) as (constant, s) coefficient pairs
    adj = [
        [(M[1, 1], 1.0), (-M[0, 1], 0.0)],
        [(-M[1, 0], 0.0), (M[0, 0], 1.0)],
    ]
    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            c0 = sum(adj[i][k][0] * Gamma[k, j] for k in range(2))
            c1 = sum(adj[i][k][1] * Gamma[k, j] for k in range(2))
            num = (c0 - Delta[i, j] * den[0], c1 - Delta[i, j] * den[1], -Delta[i, j])
            row.append(ScalarTF.rational(num, den))
        rows.append(tuple(row))
    return TransferMatrix(tuple(rows))


def arm_pair(delta: str = "delta1", interpretation: str = "resonant") -> tuple[TransferMatrix, TransferMatrix]:
    D = {"delta1": IRC_DELTA1, "delta2": IRC_DELTA2, "phi_inverse": np.linalg.inv(IRC_PHI)}[delta]
    return robotic_arm(interpretation), irc_controller(Delta=D)


# -- random generators -------------------------------------------------------

def _psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    v = rng.normal(size=(n, rank or n))
    return v @ v.T


def _sym(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    X = rng.normal(scale=scale, size=(n, n))
    return 0.5 * (X + X.T)


def _from_modes(n: int, modes: list[tuple[np.ndarray, tuple[float, ...]]], D: np.ndarray) -> TransferMatrix:
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            terms = [DelayedRationalTerm((float(P[i, j]),), den) for P, den in modes]
            terms.append(DelayedRationalTerm((float(D[i, j]),), (1.0,)))
            row.append(ScalarTF(tuple(terms)))
        rows.append(tuple(row))
    return TransferMatrix(tuple(rows))


def random_ni(rng: np.random.Generator, n: int, undamped: bool | None = None, scale: float = 1.0) -> TransferMatrix:
    """Sum of second-order modes with PSD gains plus a symmetric feedthrough.

    With ``undamped`` one mode sits on the imaginary axis, giving a system in
    N but not in the stable class.
    """
    if undamped is None:
        undamped = bool(rng.integers(2))
    modes = []
    for k in range(int(rng.integers(1, 3))):
        w = float(rng.uniform(0.5, 5.0))
        zeta = 0.0 if (undamped and k == 0) else float(rng.uniform(0.05, 0.8))
        modes.append((scale * w * w * _psd(rng, n, 1) * rng.uniform(0.2, 1.5), (w * w, 2 * zeta * w, 1.0)))
    return _from_modes(n, modes, _sym(rng, n, 0.3 * scale))


def random_sni(rng: np.random.Generator, n: int, scale: float = 1.0) -> TransferMatrix:
    """First-order modes ``P/(s+a)`` with a positive definite total gain."""
    modes = []
    for _ in range(n + int(rng.integers(0, 2))):
        a = float(rng.uniform(0.3, 4.0))
        modes.append((scale * a * _psd(rng, n, 1) * rng.uniform(0.2, 1.5), (a, 1.0)))
    P = sum(m[0] for m in modes)
    if np.linalg.eigvalsh(P)[0] < 1e-3 * scale:
        modes.append((scale * np.eye(n), (1.0, 1.0)))
    return _from_modes(n, modes, _sym(rng, n, 0.3 * scale))


def random_pair(rng: np.random.Generator, n: int | None = None) -> tuple[TransferMatrix, TransferMatrix]:
    n = int(rng.integers(1, 3)) if n is None else n
    scale = float(10 ** rng.uniform(-1, 0.5))
    return random_ni(rng, n, scale=scale), random_sni(rng, n, scale=float(10 ** rng.uniform(-1, 0.5)))
