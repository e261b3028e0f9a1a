"""Decision logic for robust stability of the homotopy ``[tau G, Gbar]``.

The engine tries, in order, the small-gain endpoint test, the special
case with vanishing high-frequency loop gain and the general
zero/infinity feasibility test, and backs every
positive verdict with constant multipliers that are re-checked on a
frequency grid together with the mid-band NI multiplier.

Checks may run on a congruence-scaled loop ``[X G X^T, X^{-T} Gbar X^{-1}]``
for a real invertible ``X``.  The scaled pair has the same
``det(I - tau G Gbar)`` and the same NI properties, so certificates for it
are certificates for the original loop; the chosen ``X`` is stored.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .classifier import (
    GRID_HI,
    GRID_LO,
    GRID_POINTS,
    REFINE_LEVELS,
    STRICT_MARGIN,
    FrequencyGrid,
    NIClassification,
    classify,
    default_grid,
    strict_det_condition,
)
from .errors import BandGap, DimensionMismatch, HypothesisViolation
from .iqc import (
    TAU_POINTS,
    HermitianMultiplier,
    IqcCheckReport,
    Mode,
    check_pair,
    check_pair_batch,
    corollary_gain_multipliers,
    default_tau_grid,
    feasibility_at_point,
    lan_petersen_multiplier,
    lemma1_multiplier,
    midband_multiplier,
    shift_amount,
    shifted_multiplier,
)
from .linalg import TOL_PSD, herm, spectral_radius, svd_extremes
from .tf_core import TransferMatrix, dc_gain, evaluate_many, find_poles, inf_gain

log = logging.getLogger(__name__)

RESIDUE_MARGIN = 1e-9
EXTEND_DECADES = 8
POINTS_PER_DECADE = 20

NECESSITY_SCOPE = (
    "Infeasibility at zero or infinite frequency shows that I - tau G Gbar is "
    "singular there for tau = tau_star, so the loop [tau_star G, Gbar] is not "
    "internally stable. It refutes stability of the homotopy family, not "
    "necessarily of the single loop at tau = 1."
)


class Verdict(str, Enum):
    STABLE = "StableForAllTau"
    UNSTABLE = "UnstableAlongHomotopy"
    INCONCLUSIVE = "Inconclusive"


class Path(str, Enum):
    COR1 = "Cor1"
    COR2 = "Cor2"
    LAN_PETERSEN = "LanPetersen"
    THM1 = "Thm1"
    THM2 = "Thm2"
    THM3_NECESSITY = "Thm3Necessity"


@dataclass
class UserMultipliers:
    pi0: HermitianMultiplier
    pi_inf: HermitianMultiplier
    mode: Mode = Mode.THM


@dataclass
class AnalysisOptions:
    grid_lo: float = GRID_LO
    grid_hi: float = GRID_HI
    grid_points: int = GRID_POINTS
    refine_levels: int = REFINE_LEVELS
    tau_points: int = TAU_POINTS
    strict_margin: float = STRICT_MARGIN
    residue_margin: float = RESIDUE_MARGIN
    extend_decades: int = EXTEND_DECADES
    grid: FrequencyGrid | None = None
    tau_values: np.ndarray | None = None
    user_multipliers: UserMultipliers | None = None
    raise_on_hypothesis: bool = False

    def tau_grid(self) -> np.ndarray:
        if self.tau_values is not None:
            return np.asarray(self.tau_values, dtype=float)
        return default_tau_grid(self.tau_points)


@dataclass
class BandEdges:
    """Empirical three-band covering of the grid.

    Pi0 (shifted) holds on grid points ``<= omega_lo``, PiInf (shifted) on
    points ``>= omega_hi`` and the mid-band multiplier on the points strictly
    between.  When the low and high bands meet or overlap the mid band is
    empty and ``min_margin`` is ``inf``.
    """

    omega_lo: float
    omega_hi: float
    min_margin: float
    low_min_margin: float
    high_min_margin: float
    mu0: float
    mu_inf: float
    points: np.ndarray = field(repr=False)


@dataclass
class Witness:
    frequency: str
    lam: complex
    tau_star: float | None


@dataclass
class StabilityCertificate:
    verdict: Verdict
    path: Path | None = None
    pi0: HermitianMultiplier | None = None
    pi_inf: HermitianMultiplier | None = None
    multiplier_mode: Mode = Mode.THM
    scaling: np.ndarray | None = None
    midband: BandEdges | None = None
    reports: list[IqcCheckReport] = field(default_factory=list)
    witness: Witness | None = None
    oracle_agreement: bool | None = None
    diagnostics: list[str] = field(default_factory=list)
    uncovered: tuple[float, float] | None = None
    classification_G: NIClassification | None = None
    classification_Gbar: NIClassification | None = None
    gains: dict = field(default_factory=dict)
    grid: FrequencyGrid | None = None
    tau_grid: np.ndarray | None = None
    scope: str = ""

    @property
    def all_reports_pass(self) -> bool:
        return all(r.passed for r in self.reports)


# -- scaling -----------------------------------------------------------------

def scale_pair(X, Gvals, Gbvals):
    """Apply ``G -> X G X^T`` and ``Gbar -> X^{-T} Gbar X^{-1}`` to (stacks of) values."""
    Gvals = np.asarray(Gvals, dtype=complex)
    Gbvals = np.asarray(Gbvals, dtype=complex)
    if X is None:
        return Gvals, Gbvals
    X = np.asarray(X, dtype=float)
    Xi = np.linalg.inv(X)
    return X @ Gvals @ X.T, Xi.T @ Gbvals @ Xi


def _abs_power(M, p: float):
    """``|M|^p`` for the symmetric part of a real matrix; ``None`` if singular."""
    S = np.real(herm(M))
    w, V = np.linalg.eigh(S)
    if w.size == 0 or np.min(np.abs(w)) <= 1e-12 * max(1.0, np.max(np.abs(w))):
        return None
    return (V * np.abs(w) ** p) @ V.T


def _scalar(n: int, k: float) -> np.ndarray:
    return np.sqrt(k) * np.eye(n)


def _gain_candidates(gains, n):
    """Identity first, then a scalar that brings ``G`` to unit size."""
    s = max(svd_extremes(gains["G0"])[0], svd_extremes(gains["Ginf"])[0])
    out = [None]
    if s > 0 and abs(np.log10(s)) > 0.5:
        out.append(_scalar(n, 1.0 / s))
    return out


def _thm_candidates(gains, n):
    """Congruences tried, in order, for the ThmForm band certificate."""
    out = [None]
    sb = max(svd_extremes(gains["Gbar0"])[0], svd_extremes(gains["Gbarinf"])[0])
    if sb > 0:
        out.append(_scalar(n, sb))
    for key, p in (("G0", -0.5), ("Ginf", -0.5), ("Gbar0", 0.5), ("Gbarinf", 0.5)):
        X = _abs_power(gains[key], p)
        if X is not None:
            out.append(X)
    return out


# -- helpers -----------------------------------------------------------------

def _point_reports(pi0, pi_inf, gains, taus, mode, X=None) -> list[IqcCheckReport]:
    G0, Gb0 = scale_pair(X, gains["G0"], gains["Gbar0"])
    Ginf, Gbinf = scale_pair(X, gains["Ginf"], gains["Gbarinf"])
    r0 = check_pair(pi0, Gb0, G0, taus, mode, "zero")
    rinf = check_pair(pi_inf, Gbinf, Ginf, taus, mode, "infinity")
    r0.scaling = rinf.scaling = X
    return [r0, rinf]


def _responses(G, Gbar, w, X=None):
    s = 1j * np.asarray(w, dtype=float)
    return scale_pair(X, evaluate_many(G, s), evaluate_many(Gbar, s))


def _extend(points: np.ndarray, up: bool) -> np.ndarray:
    steps = np.logspace(0, 1, POINTS_PER_DECADE + 1)
    if up:
        return points[-1] * steps[1:]
    return points[0] / steps[::-1][:-1]


def verify_band_structure(
    G: TransferMatrix,
    Gbar: TransferMatrix,
    pi0: HermitianMultiplier,
    pi_inf: HermitianMultiplier,
    grid: FrequencyGrid,
    tau_grid=None,
    scaling=None,
    extend_decades: int = EXTEND_DECADES,
) -> BandEdges:
    """Cover the grid with shifted Pi0 (low), mid-band Pi_m, shifted PiInf (high).

    Both endpoint multipliers are ThmForm and refer to the loop scaled by
    ``scaling`` (see :func:`scale_pair`).  The grid is extended by whole
    decades, up to ``extend_decades``, while an endpoint band has not been
    reached at the grid edge.  Raises :class:`BandGap` when some grid point
    is covered by none of the three checks.
    """
    taus = default_tau_grid() if tau_grid is None else np.asarray(tau_grid, dtype=float)
    X = scaling
    G0, Gb0 = scale_pair(X, dc_gain(G), dc_gain(Gbar))
    Ginf, Gbinf = scale_pair(X, inf_gain(G), inf_gain(Gbar))
    r0 = check_pair(pi0, Gb0, G0, taus, Mode.THM, "zero")
    rinf = check_pair(pi_inf, Gbinf, Ginf, taus, Mode.THM, "infinity")
    if not (r0.passed and rinf.passed):
        raise ValueError("endpoint multipliers must pass before the band scan")
    mu0 = shift_amount(r0, Gb0)
    mu_inf = shift_amount(rinf, Gbinf)
    P0 = shifted_multiplier(pi0, Mode.THM, mu0)
    Pinf = shifted_multiplier(pi_inf, Mode.THM, mu_inf)

    axis = sorted({p.omega0 for M in (G, Gbar) for p in find_poles(M).axis})
    first_pole = axis[0] if axis else np.inf
    last_pole = axis[-1] if axis else 0.0

    def passes(P, w):
        R, Rb = _responses(G, Gbar, w, X)
        b = check_pair_batch(P, Rb, R, taus, Mode.THM)
        return b.passed, b.upper_margin

    pts = np.asarray(grid.points, dtype=float)
    for _ in range(extend_decades):
        if passes(Pinf, pts[-1:])[0][0]:
            break
        pts = np.concatenate([pts, _extend(pts, True)])
    for _ in range(extend_decades):
        if passes(P0, pts[:1])[0][0]:
            break
        pts = np.concatenate([_extend(pts, False), pts])

    low_ok, low_margin = passes(P0, pts)
    high_ok, high_margin = passes(Pinf, pts)
    low_ok &= pts < first_pole
    high_ok &= pts > last_pole

    L = len(pts) if low_ok.all() else int(np.argmin(low_ok))
    H = 0 if high_ok.all() else len(pts) - int(np.argmin(high_ok[::-1]))
    if L == 0:
        raise BandGap((0.0, float(pts[0])), "zero-frequency multiplier fails at the bottom of the grid")
    if H == len(pts):
        raise BandGap((float(pts[-1]), np.inf), "infinite-frequency multiplier fails at the top of the grid")

    min_margin = np.inf
    if H > L:
        mid = pts[L:H]
        R, Rb = _responses(G, Gbar, mid, X)
        b = check_pair_batch(midband_multiplier(G.rows), Rb, R, taus, Mode.THM)
        bad = np.flatnonzero(~b.passed)
        if bad.size:
            j = L + int(bad[0])
            raise BandGap(
                (float(pts[j - 1]), float(pts[j + 1]) if j + 1 < len(pts) else np.inf),
                f"no multiplier covers ω={pts[j]:.6g}",
            )
        min_margin = float(b.upper_margin.min())
    return BandEdges(
        omega_lo=float(pts[L - 1]),
        omega_hi=float(pts[H]),
        min_margin=min_margin,
        low_min_margin=float(low_margin[:L].min()),
        high_min_margin=float(high_margin[H:].min()),
        mu0=mu0,
        mu_inf=mu_inf,
        points=pts,
    )


def thm_form_multiplier(Abar, A, label: str = "Custom") -> HermitianMultiplier | None:
    """ThmForm multiplier from the inverse-square-root construction with the roles exchanged.

    ``lemma1_multiplier(Abar)`` certifies ``[tau A; I]`` strictly and
    ``[I; Abar]`` non-strictly; swapping the block rows and subtracting a
    small multiple of the identity gives ``[Abar; I]^* Pi [Abar; I] < 0`` and
    ``[I; tau A]^* Pi [I; tau A] > 0``.  Returns ``None`` if ``I - tau Abar A``
    is singular for some ``tau`` in ``[0, 1]``.
    """
    Abar = np.atleast_2d(np.asarray(Abar, dtype=complex))
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    n = A.shape[0]
    feas = feasibility_at_point(A, Abar)
    if not feas.feasible:
        return None
    L = feas.multiplier
    swap = np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    rep = check_pair(L, A, Abar, None, Mode.REMARK)
    mu = 0.5 * rep.upper_margin / (1 + np.linalg.norm(A, 2) ** 2)
    return HermitianMultiplier(swap @ L.matrix @ swap - mu * np.eye(2 * n), label, "Lemma1")


def _gains(G, Gbar) -> dict:
    return {
        "G0": dc_gain(G),
        "Gbar0": dc_gain(Gbar),
        "Ginf": inf_gain(G),
        "Gbarinf": inf_gain(Gbar),
    }


def _prepare(G, Gbar, opts: AnalysisOptions) -> StabilityCertificate:
    if not (G.is_square and Gbar.is_square) or G.shape != Gbar.shape:
        raise DimensionMismatch(f"G {G.shape} and Gbar {Gbar.shape} must be equal square sizes")
    grid = opts.grid or default_grid(
        [G, Gbar], opts.grid_lo, opts.grid_hi, opts.grid_points, opts.refine_levels
    )
    cert = StabilityCertificate(Verdict.INCONCLUSIVE, grid=grid, tau_grid=opts.tau_grid())
    cert.classification_G = classify(G, grid, opts.strict_margin)
    cert.classification_Gbar = classify(Gbar, grid, opts.strict_margin)
    return cert


def _hypothesis_ok(cert: StabilityCertificate, opts: AnalysisOptions) -> bool:
    cg, cb = cert.classification_G, cert.classification_Gbar
    msgs = []
    if not cg.verdict.in_N:
        msgs.append(f"hypothesis violated: G is not negative imaginary ({cg.summary()})")
    if not cb.verdict.in_strict:
        msgs.append(f"hypothesis violated: Gbar is not strictly negative imaginary ({cb.summary()})")
    if msgs:
        cert.diagnostics.extend(msgs)
        if opts.raise_on_hypothesis:
            raise HypothesisViolation("; ".join(msgs), (cg, cb))
        return False
    return True


def _try_band(cert, G, Gbar, pi0, pi_inf, X, opts) -> BandEdges | BandGap:
    try:
        return verify_band_structure(G, Gbar, pi0, pi_inf, cert.grid, cert.tau_grid, X, opts.extend_decades)
    except BandGap as exc:
        return exc


def _thm_band(cert, G, Gbar, opts) -> bool:
    """Search the congruence candidates for ThmForm endpoint multipliers and a band.

    On success the multipliers, scaling, reports and band are stored on
    ``cert`` (multipliers only if none are there yet).  On failure the last
    gap or tolerance problem is recorded.
    """
    gains = cert.gains
    last = "no ThmForm endpoint multiplier for the band scan"
    for X in _thm_candidates(gains, G.rows):
        G0, Gb0 = scale_pair(X, gains["G0"], gains["Gbar0"])
        Gi, Gbi = scale_pair(X, gains["Ginf"], gains["Gbarinf"])
        pi0 = thm_form_multiplier(Gb0, G0, "Pi0")
        pi_inf = thm_form_multiplier(Gbi, Gi, "PiInf")
        if pi0 is None or pi_inf is None:
            continue
        reports = _point_reports(pi0, pi_inf, gains, cert.tau_grid, Mode.THM, X)
        if not all(r.passed for r in reports):
            last = "ThmForm endpoint multipliers fall below the strict tolerance"
            continue
        band = _try_band(cert, G, Gbar, pi0, pi_inf, X, opts)
        if isinstance(band, BandGap):
            last = f"band verification: {band}"
            cert.uncovered = band.interval
            continue
        if cert.pi0 is None:
            cert.pi0, cert.pi_inf, cert.scaling = pi0, pi_inf, X
            cert.multiplier_mode = Mode.THM
        cert.reports = cert.reports + reports
        cert.midband = band
        cert.uncovered = None
        return True
    cert.diagnostics.append(last)
    return False


def _axis_path(cert, with_poles: Path, without: Path) -> Path:
    return with_poles if cert.classification_G.axis_poles else without


def _first_passing(candidates, build, gains, taus, mode):
    """First scaling whose endpoint reports all pass; returns (X, pi0, pi_inf, reports)."""
    best = None
    for X in candidates:
        pi0, pi_inf = build(X)
        reports = _point_reports(pi0, pi_inf, gains, taus, mode, X)
        best = (X, pi0, pi_inf, reports)
        if all(r.passed for r in reports):
            break
    return best


# -- public operations -------------------------------------------------------

def analyze(G: TransferMatrix, Gbar: TransferMatrix, options: AnalysisOptions | None = None) -> StabilityCertificate:
    """Certify, refute or give up on stability of ``[tau G, Gbar]`` for ``tau`` in [0, 1]."""
    opts = options or AnalysisOptions()
    if opts.user_multipliers is not None:
        um = opts.user_multipliers
        return user_multiplier_analyze(G, Gbar, um.pi0, um.pi_inf, opts, um.mode)
    cert = _prepare(G, Gbar, opts)
    if not _hypothesis_ok(cert, opts):
        return cert
    taus = cert.tau_grid
    n = G.rows
    gains = cert.gains = _gains(G, Gbar)
    det = strict_det_condition(Gbar, cert.grid)
    if not det.ok:
        cert.diagnostics.append(f"det(Gbar(jw)) nearly singular at ω={det.witness:.6g}")

    # small gain at both endpoints
    s0 = svd_extremes(gains["G0"] @ gains["Gbar0"])[0]
    sinf = svd_extremes(gains["Ginf"] @ gains["Gbarinf"])[0]
    gains["sigma0"], gains["sigma_inf"] = s0, sinf
    residues_pd = True
    for p in cert.classification_G.axis_poles:
        w = np.linalg.eigvalsh(herm(p.residue))
        if w[0] <= opts.residue_margin * (1 + np.max(np.abs(w))):
            residues_pd = False
            cert.diagnostics.append(f"residue at ω={p.omega0:.6g} is not positive definite")
    if s0 < 1 and sinf < 1 and residues_pd:

        def build_cor(X):
            return corollary_gain_multipliers(
                scale_pair(X, gains["G0"], gains["Gbar0"])[0], scale_pair(X, gains["Ginf"], gains["Gbarinf"])[0]
            )

        X, pi0, pi_inf, reports = _first_passing(_gain_candidates(gains, n), build_cor, gains, taus, Mode.THM)
        if all(r.passed for r in reports):
            cert.verdict = Verdict.STABLE
            cert.path = _axis_path(cert, Path.COR2, Path.COR1)
            cert.pi0, cert.pi_inf, cert.scaling, cert.reports = pi0, pi_inf, X, reports
            band = _try_band(cert, G, Gbar, pi0, pi_inf, X, opts)
            if isinstance(band, BandGap):
                cert.uncovered = band.interval
                cert.diagnostics.append(f"band verification (diagnostic only): {band}")
            else:
                cert.midband = band
            return cert
        cert.diagnostics.append("small-gain multipliers fall below the strict tolerance")

    # stable G with G(inf) Gbar(inf) = 0
    Ginf, Gbinf = gains["Ginf"], gains["Gbarinf"]
    w_inf = np.linalg.eigvalsh(herm(Gbinf))
    lp_ok = (
        cert.classification_G.verdict.in_stable
        and w_inf[0] >= -TOL_PSD * (1 + np.max(np.abs(w_inf)))
        and np.linalg.norm(Ginf @ Gbinf) <= 1e-12 * (1 + np.linalg.norm(Ginf) * np.linalg.norm(Gbinf))
        and spectral_radius(gains["G0"] @ gains["Gbar0"]) < 1
    )
    if lp_ok:

        def build_lp(X):
            A0 = scale_pair(X, gains["G0"], gains["Gbar0"])[0]
            Ai = scale_pair(X, Ginf, Gbinf)[0]
            return lemma1_multiplier(A0, "Pi0"), lan_petersen_multiplier(Ai)

        X, pi0, pi_inf, reports = _first_passing(_gain_candidates(gains, n), build_lp, gains, taus, Mode.REMARK)
        if all(r.passed for r in reports):
            cert.verdict = Verdict.STABLE
            cert.path = Path.LAN_PETERSEN
            cert.pi0, cert.pi_inf, cert.scaling, cert.reports = pi0, pi_inf, X, reports
            cert.multiplier_mode = Mode.REMARK
            _thm_band(cert, G, Gbar, opts)
            return cert
        cert.diagnostics.append("vanishing-gain multipliers fall below the strict tolerance")

    # general zero/infinity feasibility
    f0 = feasibility_at_point(gains["Gbar0"], gains["G0"], "Pi0")
    finf = feasibility_at_point(gains["Gbarinf"], gains["Ginf"], "PiInf")
    if not (f0.feasible and finf.feasible):
        cands = []
        if not f0.feasible:
            cands.append(Witness("zero", f0.witness[0], f0.witness[1]))
        if not finf.feasible:
            cands.append(Witness("infinity", finf.witness[0], finf.witness[1]))
        cert.witness = min(cands, key=lambda c: c.tau_star if c.tau_star is not None else np.inf)
        cert.verdict = Verdict.UNSTABLE
        cert.path = Path.THM3_NECESSITY
        cert.scope = NECESSITY_SCOPE
        return cert

    def build_l1(X):
        A0 = scale_pair(X, gains["G0"], gains["Gbar0"])[0]
        Ai = scale_pair(X, gains["Ginf"], gains["Gbarinf"])[0]
        return lemma1_multiplier(A0, "Pi0"), lemma1_multiplier(Ai, "PiInf")

    *_, remark = _first_passing(_gain_candidates(gains, n), build_l1, gains, taus, Mode.REMARK)
    cert.reports = remark
    cert.path = _axis_path(cert, Path.THM2, Path.THM1)
    if _thm_band(cert, G, Gbar, opts) and cert.all_reports_pass:
        cert.verdict = Verdict.STABLE
    elif not cert.all_reports_pass:
        cert.diagnostics.append("an endpoint certificate fell below the strict tolerance")
    return cert


def user_multiplier_analyze(
    G: TransferMatrix,
    Gbar: TransferMatrix,
    pi0: HermitianMultiplier,
    pi_inf: HermitianMultiplier,
    options: AnalysisOptions | None = None,
    mode: Mode | str = Mode.THM,
) -> StabilityCertificate:
    """Verify caller-supplied endpoint multipliers and the band covering.

    ThmForm multipliers drive the band scan directly.  RemarkForm ones are
    only checked at their endpoints; the band then uses the ThmForm
    multipliers the engine builds itself.
    """
    opts = options or AnalysisOptions()
    mode = Mode(mode)
    cert = _prepare(G, Gbar, opts)
    if not _hypothesis_ok(cert, opts):
        return cert
    cert.gains = _gains(G, Gbar)
    cert.pi0 = HermitianMultiplier(pi0.matrix, "Pi0", pi0.construction)
    cert.pi_inf = HermitianMultiplier(pi_inf.matrix, "PiInf", pi_inf.construction)
    cert.multiplier_mode = mode
    cert.reports = _point_reports(cert.pi0, cert.pi_inf, cert.gains, cert.tau_grid, mode)
    cert.path = _axis_path(cert, Path.THM2, Path.THM1)
    if not cert.all_reports_pass:
        cert.diagnostics.append("user multipliers fail the endpoint inequalities")
        return cert
    if mode is Mode.THM:
        band = _try_band(cert, G, Gbar, cert.pi0, cert.pi_inf, None, opts)
        if isinstance(band, BandGap):
            cert.uncovered = band.interval
            cert.diagnostics.append(f"band verification: {band}")
            return cert
        cert.midband = band
    elif not _thm_band(cert, G, Gbar, opts):
        return cert
    cert.verdict = Verdict.STABLE
    return cert


def oracle_agreement(cert: StabilityCertificate, G: TransferMatrix, Gbar: TransferMatrix, contour=None) -> bool | None:
    """Compare the verdict with the winding-number oracle and store the result.

    Stable verdicts need zero winding at tau in {0.1, 0.5, 1}.  Unstable
    ones need nonzero winding at ``tau_star + 0.05`` (when at most 1) or at
    ``tau = 1``.  Inconclusive verdicts are not compared.
    """
    from .errors import OnContourZero, PhaseJump
    from .nyquist import build_contour, winding_number

    if cert.verdict is Verdict.INCONCLUSIVE:
        cert.oracle_agreement = None
        return None
    spec = contour or build_contour(G, Gbar)

    def wind(tau):
        try:
            return winding_number(G, Gbar, tau, spec).winding
        except (OnContourZero, PhaseJump) as exc:
            cert.diagnostics.append(f"oracle at tau={tau:g}: {exc}")
            return None

    if cert.verdict is Verdict.STABLE:
        ok = all(wind(t) == 0 for t in (0.1, 0.5, 1.0))
    else:
        taus = [1.0]
        ts = cert.witness.tau_star if cert.witness else None
        if ts is not None and ts + 0.05 <= 1.0:
            taus.insert(0, ts + 0.05)
        ok = any(w not in (0, None) for w in map(wind, taus))
    cert.oracle_agreement = bool(ok)
    return cert.oracle_agreement
