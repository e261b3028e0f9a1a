"""Constant IQC multipliers and the complementary quadratic-form checks.

Two orientations are supported.  ``THM`` checks

    [Abar; I]^* Pi [Abar; I] <= -eta I   and   [I; tau A]^* Pi [I; tau A] >= 0,

``REMARK`` checks the swapped pair

    [tau Abar; I]^* Pi [tau Abar; I] >= eta I   and   [I; A]^* Pi [I; A] <= 0.

In both cases ``upper_margin`` in the report is the margin of the strict
inequality and ``lower_min`` the slack of the non-strict one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch
from .linalg import (
    TOL_PSD,
    herm,
    hermitian_defect,
    inv_sqrt_psd,
    real_ray_spectrum_test,
)

TAU_POINTS = 101
TOL_STRICT = 1e-8
TOL_MULTIPLIER_HERMITIAN = 1e-10


class Mode(str, Enum):
    THM = "ThmForm"
    REMARK = "RemarkForm"


LABELS = ("Pi0", "PiInf", "PiMid", "Custom")
CONSTRUCTIONS = ("Lemma1", "CorollaryGain", "LanPetersen", "Passivity", "Midband", "Shifted", "UserSupplied")


@dataclass(frozen=True)
class HermitianMultiplier:
    matrix: np.ndarray
    label: str = "Custom"
    construction: str = "UserSupplied"

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if X.shape[0] != X.shape[1] or X.shape[0] % 2:
            raise DimensionMismatch(f"multiplier must be 2n x 2n, got {X.shape}")
        d = hermitian_defect(X)
        if d >= TOL_MULTIPLIER_HERMITIAN:
            raise ValueError(f"multiplier is not Hermitian (defect {d:.2e})")
        object.__setattr__(self, "matrix", herm(X))
        if self.label not in LABELS:
            raise ValueError(f"unknown multiplier label {self.label!r}")

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def relabel(self, label: str) -> "HermitianMultiplier":
        return HermitianMultiplier(self.matrix, label, self.construction)


@dataclass
class IqcCheckReport:
    upper_margin: float
    lower_min: float
    tau_grid: np.ndarray = field(repr=False)
    frequency: float | str
    mode: Mode = Mode.THM
    tol_strict: float = 0.0
    tol_nonstrict: float = 0.0
    scaling: np.ndarray | None = field(default=None, repr=False)
    multiplier: HermitianMultiplier | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.upper_margin >= self.tol_strict and self.lower_min >= -self.tol_nonstrict


def default_tau_grid(points: int = TAU_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def strict_tolerance(Pi: HermitianMultiplier) -> float:
    return TOL_STRICT * (1 + Pi.norm)


def _forms(P: np.ndarray, top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    """Batched ``[top; bottom]^* P [top; bottom]``; top/bottom shaped (..., n, n)."""
    S = np.concatenate([top, bottom], axis=-2)
    return herm(S.conj().swapaxes(-1, -2) @ P @ S)


@dataclass
class BatchCheck:
    """Margins of one multiplier at many frequencies (arrays over frequency)."""

    upper_margin: np.ndarray
    lower_min: np.ndarray
    tol_strict: float
    tol_nonstrict: np.ndarray

    @property
    def passed(self) -> np.ndarray:
        return (self.upper_margin >= self.tol_strict) & (self.lower_min >= -self.tol_nonstrict)


def _tau_grid(tau_grid) -> np.ndarray:
    taus = default_tau_grid() if tau_grid is None else np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size == 0 or taus.min() < 0 or taus.max() > 1:
        raise ValueError("tau grid must be a nonempty list in [0, 1]")
    return taus


def check_pair_batch(Pi: HermitianMultiplier, Abars, As, tau_grid=None, mode: Mode | str = Mode.THM) -> BatchCheck:
    """:func:`check_pair` vectorized over a stack of ``(Abar, A)`` points."""
    mode = Mode(mode)
    n = Pi.n
    Abars = np.asarray(Abars, dtype=complex)
    As = np.asarray(As, dtype=complex)
    if Abars.shape[-2:] != (n, n) or As.shape[-2:] != (n, n) or Abars.shape != As.shape:
        raise DimensionMismatch(
            f"Abar {Abars.shape} / A {As.shape} incompatible with a {2 * n}x{2 * n} multiplier"
        )
    taus = _tau_grid(tau_grid)
    k = Abars.shape[0]
    I = np.broadcast_to(np.eye(n, dtype=complex), (k, n, n))
    P = Pi.matrix
    T = taus[None, :, None, None]
    Ik = np.broadcast_to(np.eye(n, dtype=complex), (k, len(taus), n, n))
    if mode is Mode.THM:
        strict = np.linalg.eigvalsh(_forms(P, Abars, I))
        upper = -strict[:, -1]
        ev = np.linalg.eigvalsh(_forms(P, Ik, T * As[:, None]))
        lower = ev[..., 0].min(axis=1)
        scale = np.abs(ev).max(axis=(1, 2))
    else:
        ev = np.linalg.eigvalsh(_forms(P, T * Abars[:, None], Ik))
        upper = ev[..., 0].min(axis=1)
        ns = np.linalg.eigvalsh(_forms(P, I, As))
        lower = -ns[:, -1]
        scale = np.abs(ns).max(axis=1)
    return BatchCheck(upper, lower, strict_tolerance(Pi), TOL_PSD * (1 + scale))


def check_pair(
    Pi: HermitianMultiplier,
    Abar,
    A,
    tau_grid=None,
    mode: Mode | str = Mode.THM,
    frequency: float | str = 0.0,
) -> IqcCheckReport:
    """Evaluate the complementary pair at one frequency over a tau-grid."""
    mode = Mode(mode)
    taus = _tau_grid(tau_grid)
    Abar = np.atleast_2d(np.asarray(Abar, dtype=complex))
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    b = check_pair_batch(Pi, Abar[None], A[None], taus, mode)
    return IqcCheckReport(
        upper_margin=float(b.upper_margin[0]),
        lower_min=float(b.lower_min[0]),
        tau_grid=taus,
        frequency=frequency,
        mode=mode,
        tol_strict=b.tol_strict,
        tol_nonstrict=float(b.tol_nonstrict[0]),
        multiplier=Pi,
    )


def midband_multiplier(n: int) -> HermitianMultiplier:
    if n < 1:
        raise ValueError("n must be >= 1")
    I = np.eye(n)
    Z = np.zeros((n, n))
    return HermitianMultiplier(np.block([[Z, 1j * I], [-1j * I, Z]]), "PiMid", "Midband")


def passivity_multiplier(n: int, label: str = "Custom") -> HermitianMultiplier:
    I = np.eye(n)
    Z = np.zeros((n, n))
    return HermitianMultiplier(np.block([[Z, I], [I, Z]]), label, "Passivity")


def lemma1_multiplier(B, label: str = "Custom") -> HermitianMultiplier:
    """``Y^* Y`` with ``Y = [-(I + B^*B)^{-1/2} B, (I + B^*B)^{-1/2}]``."""
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    n = B.shape[0]
    S = inv_sqrt_psd(np.eye(n) + B.conj().T @ B)
    Y = np.hstack([-S @ B, S])
    return HermitianMultiplier(herm(Y.conj().T @ Y), label, "Lemma1")


def corollary_gain_multipliers(G0, Ginf) -> tuple[HermitianMultiplier, HermitianMultiplier]:
    """Block-diagonal ``diag(G^*G, -I)`` at zero and infinite frequency."""
    out = []
    for X, label in ((G0, "Pi0"), (Ginf, "PiInf")):
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        n = X.shape[0]
        Z = np.zeros((n, n))
        out.append(
            HermitianMultiplier(np.block([[X.conj().T @ X, Z], [Z, -np.eye(n)]]), label, "CorollaryGain")
        )
    return out[0], out[1]


def lan_petersen_multiplier(Ginf) -> HermitianMultiplier:
    """``diag(-G(inf)^* G(inf), I)`` for the RemarkForm check at infinity."""
    X = np.atleast_2d(np.asarray(Ginf, dtype=complex))
    n = X.shape[0]
    Z = np.zeros((n, n))
    return HermitianMultiplier(np.block([[-X.conj().T @ X, Z], [Z, np.eye(n)]]), "PiInf", "LanPetersen")


@dataclass
class Feasibility:
    feasible: bool
    multiplier: HermitianMultiplier | None = None
    witness: tuple[complex, float | None] | None = None
    eigenvalues: tuple[complex, ...] = ()


def feasibility_at_point(A, B, label: str = "Custom") -> Feasibility:
    """Decide whether ``I - tau B A`` stays nonsingular on ``[0, 1]``.

    When it does, :func:`lemma1_multiplier` built from ``B`` certifies the
    RemarkForm pair with ``Abar = A`` (tau side) and ``A = B``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A {A.shape} and B {B.shape} must be equal square matrices")
    ray = real_ray_spectrum_test(B @ A, 1.0)
    if ray.clear:
        return Feasibility(True, lemma1_multiplier(B, label), None, ray.eigenvalues)
    return Feasibility(False, None, (ray.witness, ray.tau_star), ray.eigenvalues)


def shifted_multiplier(Pi: HermitianMultiplier, mode: Mode, mu: float) -> HermitianMultiplier:
    """``2 Pi + mu I`` (ThmForm) or ``2 Pi - mu I`` (RemarkForm).

    The shift turns the non-strict inequality into a strict one while
    keeping the strict side strict for small ``mu``, so the pair survives
    small perturbations of the frequency response.
    """
    sign = 1.0 if Mode(mode) is Mode.THM else -1.0
    M = 2 * Pi.matrix + sign * mu * np.eye(Pi.matrix.shape[0])
    return HermitianMultiplier(M, Pi.label, "Shifted")


def shift_amount(report: IqcCheckReport, Abar) -> float:
    """Shift ``mu`` for :func:`shifted_multiplier` leaving a strict margin of ``eta``.

    Doubling ``Pi`` doubles the margin to ``2 eta``; the shift moves the strict
    form by at most ``mu (1 + |Abar|^2)``.
    """
    nrm = np.linalg.norm(np.atleast_2d(Abar), 2)
    return float(report.upper_margin / (1 + nrm**2))
