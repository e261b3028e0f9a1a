"""Membership tests for the negative imaginary classes N, N-hat and N_s."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch
from .linalg import TOL_PSD, hermitian_defect, herm
from .tf_core import AxisPole, PoleReport, TransferMatrix, evaluate_many, find_poles

GRID_LO = 1e-4
GRID_HI = 1e4
GRID_POINTS = 400
REFINE_LEVELS = 3
PUNCTURE = 1e-3
STRICT_MARGIN = 1e-6
TOL_RESIDUE_HERMITIAN = 1e-8


class NIVerdict(str, Enum):
    STRICTLY_NI = "StrictlyNI"
    STABLE_NI = "StableNI"
    NI = "NI"
    NOT_NI = "NotNI"

    @property
    def in_N(self) -> bool:
        return self is not NIVerdict.NOT_NI

    @property
    def in_stable(self) -> bool:
        return self in (NIVerdict.STABLE_NI, NIVerdict.STRICTLY_NI)

    @property
    def in_strict(self) -> bool:
        return self is NIVerdict.STRICTLY_NI


@dataclass
class FrequencyGrid:
    """Ascending positive frequencies standing in for ``(0, inf)``."""

    points: np.ndarray
    refinement_log: list[tuple[tuple[float, float], str]] = field(default_factory=list)
    punctured: list[float] = field(default_factory=list)

    def __post_init__(self):
        pts = np.unique(np.asarray(self.points, dtype=float))
        if pts.size and pts[0] <= 0:
            raise ValueError("grid frequencies must be positive")
        self.points = pts

    def __len__(self) -> int:
        return len(self.points)

    def doubled(self) -> "FrequencyGrid":
        """Insert the geometric midpoint of every interval."""
        p = self.points
        mids = puncture(np.sqrt(p[:-1] * p[1:]), self.punctured)
        return FrequencyGrid(np.concatenate([p, mids]), list(self.refinement_log), list(self.punctured))


def puncture(points: np.ndarray, poles: list[float], radius: float = PUNCTURE) -> np.ndarray:
    keep = np.ones(points.shape, dtype=bool)
    for w0 in poles:
        keep &= np.abs(points - w0) > radius * w0
    return points[keep]


def base_grid(
    lo: float = GRID_LO,
    hi: float = GRID_HI,
    n: int = GRID_POINTS,
    delay: bool = False,
    poles: list[float] = (),
) -> FrequencyGrid:
    if delay:
        n *= 2
    pts = np.logspace(np.log10(lo), np.log10(hi), n)
    pts = puncture(pts, list(poles))
    return FrequencyGrid(pts, [], sorted(poles))


def ni_defect_many(M: TransferMatrix, omegas) -> tuple[np.ndarray, np.ndarray]:
    """Minimum eigenvalue of ``j[M(jw) - M(jw)^*]`` and ``||M(jw)||_2`` per frequency."""
    w = np.asarray(omegas, dtype=float)
    R = evaluate_many(M, 1j * w)
    D = 1j * (R - R.conj().swapaxes(-1, -2))
    eig = np.linalg.eigvalsh(herm(D))
    scale = np.linalg.norm(R, ord=2, axis=(-2, -1)) if R.size else np.zeros(w.shape)
    return eig[..., 0], scale


def ni_defect(M: TransferMatrix, omega: float) -> float:
    if not M.is_square:
        raise DimensionMismatch(f"NI defect needs a square system, got {M.shape}")
    d, _ = ni_defect_many(M, [omega])
    return float(d[0])


def refine_grid(
    systems: list[TransferMatrix], grid: FrequencyGrid, levels: int = REFINE_LEVELS
) -> FrequencyGrid:
    """Bisect (geometrically) intervals where a defect changes sign or moves fast."""
    pts = grid.points
    log = list(grid.refinement_log)
    for level in range(levels):
        flagged = np.zeros(max(len(pts) - 1, 0), dtype=bool)
        reasons = {}
        for M in systems:
            d, scale = ni_defect_many(M, pts)
            tol = TOL_PSD * (1 + scale)
            sgn = np.where(d < -tol, -1, np.where(d > tol, 1, 0))
            change = sgn[:-1] != sgn[1:]
            mag = np.maximum(np.abs(d[:-1]), np.abs(d[1:])) + tol[:-1]
            steep = np.abs(np.diff(d)) > 0.5 * mag
            for k in np.flatnonzero(change & ~flagged):
                reasons[k] = "sign change"
            for k in np.flatnonzero(steep & ~change & ~flagged):
                reasons.setdefault(k, "steep defect")
            flagged |= change | steep
        if not flagged.any():
            break
        idx = np.flatnonzero(flagged)
        mids = np.sqrt(pts[idx] * pts[idx + 1])
        mids = puncture(mids, grid.punctured)
        for k in idx:
            log.append(((float(pts[k]), float(pts[k + 1])), f"level {level + 1}: {reasons.get(k, 'steep defect')}"))
        pts = np.union1d(pts, mids)
    return FrequencyGrid(pts, log, list(grid.punctured))


def default_grid(
    systems: list[TransferMatrix],
    lo: float = GRID_LO,
    hi: float = GRID_HI,
    n: int = GRID_POINTS,
    levels: int = REFINE_LEVELS,
) -> FrequencyGrid:
    poles: list[float] = []
    for M in systems:
        poles.extend(p.omega0 for p in find_poles(M).axis)
    delay = any(M.has_delay for M in systems)
    grid = base_grid(lo, hi, n, delay, sorted(set(poles)))
    square = [M for M in systems if M.is_square]
    return refine_grid(square, grid, levels) if levels else grid


@dataclass
class NIClassification:
    verdict: NIVerdict
    witness_frequency: float | None = None
    witness_min_eig: float | None = None
    axis_poles: list[AxisPole] = field(default_factory=list)
    grid: FrequencyGrid | None = None
    reason: str = ""
    witness_pole: complex | None = None
    poles: PoleReport | None = None
    min_defect: float | None = None

    def summary(self) -> str:
        parts = [self.verdict.value]
        details = []
        for p in self.axis_poles:
            if p.residue is not None and p.residue.size == 1:
                details.append(f"axis pole ω={p.omega0:.6g}, residue {p.residue.real.item():.6g}")
            else:
                details.append(f"axis pole ω={p.omega0:.6g}")
        if self.verdict is NIVerdict.NOT_NI:
            details.append(self.reason)
            if self.witness_frequency is not None:
                details.append(f"witness ω={self.witness_frequency:.6g}, min eig {self.witness_min_eig:.3e}")
            if self.witness_pole is not None:
                details.append(f"witness pole {self.witness_pole:.6g}")
        if details:
            parts.append("(" + "; ".join(details) + ")")
        return " ".join(parts)


def classify(
    M: TransferMatrix,
    grid: FrequencyGrid | None = None,
    strict_margin: float = STRICT_MARGIN,
) -> NIClassification:
    """Decide the strongest of StrictlyNI / StableNI / NI that ``M`` satisfies."""
    if not M.is_square:
        raise DimensionMismatch(f"classification needs a square system, got {M.shape}")
    poles = find_poles(M)
    out = NIClassification(NIVerdict.NOT_NI, axis_poles=poles.axis, poles=poles, grid=grid)
    if poles.open_rhp:
        out.reason = "pole in the open right half plane"
        out.witness_pole = complex(max(poles.open_rhp, key=lambda r: r.real))
        return out
    if poles.at_origin:
        out.reason = "pole at s = 0"
        out.witness_pole = 0j
        return out
    for p in poles.axis:
        if not p.simple or p.residue is None:
            out.reason = "imaginary-axis pole is not simple"
            out.witness_frequency = p.omega0
            return out
        if hermitian_defect(p.residue) > TOL_RESIDUE_HERMITIAN:
            out.reason = "residue matrix is not Hermitian"
            out.witness_frequency = p.omega0
            return out
        w = np.linalg.eigvalsh(herm(p.residue))
        if w[0] < -TOL_PSD * (1 + np.max(np.abs(w))):
            out.reason = "residue matrix is not positive semidefinite"
            out.witness_frequency = p.omega0
            out.witness_min_eig = float(w[0])
            return out

    if grid is None:
        grid = default_grid([M])
    out.grid = grid
    w = grid.points
    d, scale = ni_defect_many(M, w)
    tol = TOL_PSD * (1 + scale)
    out.min_defect = float(d.min()) if d.size else None
    bad = np.flatnonzero(d < -tol)
    if bad.size:
        k = bad[0]
        out.reason = "j[R(jw) - R(jw)^*] has a negative eigenvalue"
        out.witness_frequency = float(w[k])
        out.witness_min_eig = float(d[k])
        return out
    if poles.axis:
        out.verdict = NIVerdict.NI
        out.reason = "imaginary-axis poles present"
        return out
    floor = strict_margin * w / (1 + w**2)
    weak = np.flatnonzero(d < floor)
    if weak.size:
        k = weak[0]
        out.verdict = NIVerdict.STABLE_NI
        out.reason = "defect below the strict floor"
        out.witness_frequency = float(w[k])
        out.witness_min_eig = float(d[k])
        return out
    out.verdict = NIVerdict.STRICTLY_NI
    out.reason = ""
    return out


@dataclass(frozen=True)
class DetCheck:
    ok: bool
    witness: float | None
    min_sigma: float


def strict_det_condition(M: TransferMatrix, grid: FrequencyGrid, rel_tol: float = 1e-12) -> DetCheck:
    """Check ``sigma_min(M(jw)) > 0`` on the grid; reports the minimizing frequency."""
    w = grid.points
    R = evaluate_many(M, 1j * w)
    s = np.linalg.svd(R, compute_uv=False)
    smin = s[:, -1]
    k = int(np.argmin(smin / (1 + s[:, 0])))
    ok = bool(np.all(smin > rel_tol * (1 + s[:, 0])))
    return DetCheck(ok, float(w[k]), float(smin[k]))
