"""Small dense complex/Hermitian matrix kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotPositiveDefinite

TOL_HERMITIAN = 1e-8
TOL_PSD = 1e-9
TOL_RE = 1e-9
TOL_IM = 1e-9


@dataclass(frozen=True)
class HermitianCheckResult:
    min_eig: float
    max_eig: float
    hermitian_defect: float


@dataclass(frozen=True)
class RayTestResult:
    """Outcome of the real-ray spectrum test.

    ``clear`` means no eigenvalue sits (numerically) on the real ray
    ``[threshold, inf)``.  Otherwise ``witness`` is the offending eigenvalue
    with the largest real part and ``tau_star = 1 / witness.real``.
    """

    clear: bool
    witness: complex | None = None
    tau_star: float | None = None
    eigenvalues: tuple[complex, ...] = ()


def herm(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return 0.5 * (X + X.conj().swapaxes(-1, -2))


def hermitian_defect(X) -> float:
    X = np.asarray(X, dtype=complex)
    return float(np.linalg.norm(X - X.conj().T) / max(1.0, np.linalg.norm(X)))


def hermitian_eigs(X, tol: float = TOL_HERMITIAN) -> np.ndarray:
    """Ascending real spectrum of the Hermitian part of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    d = hermitian_defect(X)
    if d >= tol:
        raise NotHermitian(f"hermitian defect {d:.3e} exceeds {tol:.1e}")
    return np.linalg.eigvalsh(herm(X))


def hermitian_check(X) -> HermitianCheckResult:
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    w = np.linalg.eigvalsh(herm(X))
    return HermitianCheckResult(float(w[0]), float(w[-1]), hermitian_defect(X))


def is_psd(X, tol_psd: float = TOL_PSD) -> bool:
    w = np.linalg.eigvalsh(herm(np.atleast_2d(X)))
    return bool(w[0] >= -tol_psd * (1 + np.max(np.abs(w))))


def is_pd(X, margin: float = 0.0) -> bool:
    w = np.linalg.eigvalsh(herm(np.atleast_2d(X)))
    return bool(w[0] > margin)


def svd_extremes(X) -> tuple[float, float]:
    """Largest and smallest singular values (``(0, 0)`` for an empty matrix)."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    if X.size == 0:
        return 0.0, 0.0
    s = np.linalg.svd(X, compute_uv=False)
    return float(s[0]), float(s[-1])


def spectral_radius(X) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    return float(np.max(np.abs(np.linalg.eigvals(X))))


def inv_sqrt_psd(X) -> np.ndarray:
    """Principal inverse square root of a Hermitian positive definite matrix."""
    w, V = np.linalg.eigh(herm(np.atleast_2d(X)))
    if w[0] <= 0:
        raise NotPositiveDefinite(f"minimum eigenvalue {w[0]:.3e} is not positive")
    Y = (V / np.sqrt(w)) @ V.conj().T
    return herm(Y)


def real_ray_spectrum_test(
    X, threshold: float = 1.0, tol_re: float = TOL_RE, tol_im: float = TOL_IM
) -> RayTestResult:
    """Check that no eigenvalue of ``X`` is real and ``>= threshold``.

    With ``threshold = 1`` this decides whether ``I - tau X`` stays
    nonsingular for every ``tau`` in ``[0, 1]``.
    """
    lam = np.linalg.eigvals(np.atleast_2d(np.asarray(X, dtype=complex)))
    on_ray = (np.abs(lam.imag) <= tol_im * (1 + np.abs(lam))) & (
        lam.real >= threshold * (1 - tol_re)
    )
    eigs = tuple(complex(v) for v in lam)
    if not np.any(on_ray):
        return RayTestResult(True, None, None, eigs)
    cand = lam[on_ray]
    w = complex(cand[np.argmax(cand.real)])
    tau_star = 1.0 / w.real if w.real > 0 else None
    return RayTestResult(False, w, tau_star, eigs)
