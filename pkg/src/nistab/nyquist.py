"""Argument-principle oracle for the closed loop ``[tau G, Gbar]``.

The contour runs down the imaginary axis from ``+jR`` to ``-jR``, stepping
around every axis pole on a small semicircle to its right, and closes with
the right half of the circle ``|s| = R``.  That orientation is
counterclockwise, so the winding of ``det(I - tau G Gbar)`` counts zeros of
the determinant inside the contour (there are no open-loop poles there).
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import NotRational, OnContourZero, PhaseJump, PoleAtOrigin
from .tf_core import (
    TOL_MULTIPLE,
    TransferMatrix,
    cluster_roots,
    entry_fraction,
    evaluate_many,
    find_poles,
    inf_gain,
    poly_roots,
)

ARC_RADIUS = 1e6
AXIS_SAMPLES = 4096
CURVE_SAMPLES = 1024
TOL_DET = 1e-9
MAX_DARG = np.pi / 4
JUMP = np.pi / 2
MAX_REFINE = 30
MAX_POINTS = 2_000_000


def _workers() -> int:
    try:
        n = int(os.environ.get("NI_NUM_THREADS", "0"))
    except ValueError:
        n = 0
    return max(1, n) if n else min(4, os.cpu_count() or 1)


@dataclass(frozen=True)
class ContourSpec:
    indent_points: tuple[float, ...]
    epsilon: float
    arc_radius: float = ARC_RADIUS
    samples_per_segment: int = AXIS_SAMPLES
    samples_per_curve: int = CURVE_SAMPLES

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        top = max(self.indent_points + (1.0,))
        if self.arc_radius <= 10 * top:
            raise ValueError("arc radius must exceed ten times the largest indent frequency")


@dataclass
class ContourSample:
    segment: str
    s: complex
    value: complex
    phase: float


@dataclass
class WindingResult:
    winding: int
    min_abs_det: float
    phase_path: list[ContourSample] = field(repr=False)
    residual: float = 0.0
    upper_half_winding: float = 0.0
    indent_min_abs_det: float | None = None
    arc_deviation: float = 0.0


def build_contour(
    G: TransferMatrix,
    Gbar: TransferMatrix | None = None,
    epsilon: float | None = None,
    arc_radius: float = ARC_RADIUS,
    samples_per_segment: int = AXIS_SAMPLES,
    samples_per_curve: int = CURVE_SAMPLES,
) -> ContourSpec:
    """Indent at every positive axis-pole frequency of ``G`` and ``Gbar``."""
    freqs: set[float] = set()
    for M in (G, Gbar):
        if M is None:
            continue
        rep = find_poles(M)
        if rep.at_origin:
            raise PoleAtOrigin("contour cannot be indented around a pole at s = 0")
        freqs.update(p.omega0 for p in rep.axis)
    pts = tuple(sorted(freqs))
    if epsilon is None:
        gaps = np.diff((0.0,) + pts) if pts else np.array([1.0])
        epsilon = 1e-3 * float(gaps.min())
    return ContourSpec(pts, epsilon, arc_radius, samples_per_segment, samples_per_curve)


# -- contour pieces: each is (name, s(t) for t in [0, 1], initial t samples) --

def _pieces(spec: ContourSpec):
    R, eps = spec.arc_radius, spec.epsilon
    poles = list(spec.indent_points)
    pieces = []

    def axis(name, a, b):
        # a -> b on the imaginary axis, dense near small |omega| and near the ends
        def f(t, a=a, b=b):
            return 1j * (a + (b - a) * t)

        n = spec.samples_per_segment
        lo, hi = min(abs(a), abs(b)), max(abs(a), abs(b))
        if lo > 0:
            w = np.geomspace(lo, hi, n)
        else:
            w = np.concatenate([[0.0], np.geomspace(max(hi * 1e-10, 1e-12), hi, n - 1)])
        t = np.unique(np.clip((np.sign(a + b) * w - a) / (b - a), 0, 1))
        return (name, f, np.concatenate([[0.0], t, [1.0]]))

    def indent(name, w0):
        def f(t, w0=w0):
            theta = np.pi / 2 - np.pi * t
            return 1j * w0 + eps * np.exp(1j * theta)

        return (name, f, np.linspace(0, 1, spec.samples_per_curve))

    # positive axis, top to bottom
    edges = [R] + [x for w in reversed(poles) for x in (w + eps, w - eps)] + [0.0]
    k = 0
    for i in range(0, len(edges) - 1, 2):
        pieces.append(axis(f"axis+{k}", edges[i], edges[i + 1]))
        if i // 2 < len(poles):
            pieces.append(indent(f"indent+{k}", poles[len(poles) - 1 - i // 2]))
        k += 1
    # negative axis, top (near 0) to bottom
    edges = [0.0] + [x for w in poles for x in (-(w - eps), -(w + eps))] + [-R]
    for i in range(0, len(edges) - 1, 2):
        pieces.append(axis(f"axis-{i // 2}", edges[i], edges[i + 1]))
        if i // 2 < len(poles):
            pieces.append(indent(f"indent-{i // 2}", -poles[i // 2]))

    def arc(t):
        return R * np.exp(1j * (-np.pi / 2 + np.pi * t))

    pieces.append(("arc", arc, np.linspace(0, 1, spec.samples_per_curve)))
    return pieces


def _det(G, Gbar, tau, s):
    R = evaluate_many(G, s)
    Rb = evaluate_many(Gbar, s)
    n = G.rows
    return np.linalg.det(np.eye(n) - tau * (R @ Rb))


def _trace_piece(G, Gbar, tau, piece):
    name, f, t = piece
    t = np.asarray(t, dtype=float)
    d = _det(G, Gbar, tau, f(t))
    for _ in range(MAX_REFINE):
        # an exact zero shows up as nan here and is reported by the caller
        with np.errstate(divide="ignore", invalid="ignore"):
            dphi = np.angle(d[1:] / d[:-1])
        bad = np.flatnonzero(np.abs(dphi) > MAX_DARG)
        if not bad.size or t.size > MAX_POINTS:
            break
        mids = 0.5 * (t[bad] + t[bad + 1])
        dm = _det(G, Gbar, tau, f(mids))
        order = np.argsort(np.concatenate([t, mids]), kind="stable")
        t = np.concatenate([t, mids])[order]
        d = np.concatenate([d, dm])[order]
    return name, f(t), d


def winding_number(
    G: TransferMatrix,
    Gbar: TransferMatrix,
    tau: float,
    contour: ContourSpec | None = None,
    csv_path: str | os.PathLike | None = None,
    tol_det: float = TOL_DET,
) -> WindingResult:
    """Winding of ``det(I - tau G Gbar)`` around the origin along the indented contour."""
    spec = contour or build_contour(G, Gbar)
    pieces = _pieces(spec)
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        traced = list(pool.map(lambda p: _trace_piece(G, Gbar, tau, p), pieces))

    names = np.concatenate([[name] * len(s) for name, s, _ in traced])
    s_all = np.concatenate([s for _, s, _ in traced])
    d_all = np.concatenate([d for _, _, d in traced])
    a = np.abs(d_all)
    k = int(np.argmin(a))
    if a[k] < tol_det:
        raise OnContourZero(complex(s_all[k]), complex(d_all[k]))
    # step k goes from sample k to k+1; the last one closes the contour
    steps = np.angle(np.roll(d_all, -1) / d_all)
    j = int(np.argmax(np.abs(steps)))
    if abs(steps[j]) > JUMP:
        raise PhaseJump(f"phase step {steps[j]:.3f} rad on {names[j]} near s={s_all[j]:.6g}")
    phase = np.concatenate([[0.0], np.cumsum(steps[:-1])])
    turns = float(np.sum(steps)) / (2 * np.pi)
    winding = int(round(turns))
    residual = abs(turns - winding)
    if residual >= 0.1:
        raise PhaseJump(f"winding {turns:.3f} is not close to an integer")

    # upper half: positive axis, upper indents, top quarter of the arc, closing step
    labels = names.astype(str)
    upper_mask = np.char.startswith(labels, "axis+") | np.char.startswith(labels, "indent+")
    upper_mask |= (names == "arc") & (s_all.imag >= 0)
    upper_mask[-1] = True
    upper = float(np.sum(steps[upper_mask]))
    indent = np.char.startswith(labels, "indent")
    indent_min = float(a[indent].min()) if indent.any() else None
    samples = [
        ContourSample(str(nm), complex(si), complex(di), float(ph))
        for nm, si, di, ph in zip(names, s_all, d_all, phase)
    ]
    min_abs = float(a[k])

    limit = np.linalg.det(np.eye(G.rows) - tau * inf_gain(G) @ inf_gain(Gbar))
    arc_d = traced[-1][2]
    arc_dev = float(np.max(np.abs(arc_d - limit)) / max(abs(limit), 1e-300))

    result = WindingResult(
        winding=winding,
        min_abs_det=min_abs,
        phase_path=samples,
        residual=residual,
        upper_half_winding=2 * upper / (2 * np.pi),
        indent_min_abs_det=indent_min,
        arc_deviation=arc_dev,
    )
    if csv_path is not None:
        write_csv(result, csv_path)
    return result


def write_csv(result: WindingResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["segment", "s_re", "s_im", "det_re", "det_im", "unwrapped_phase"])
        for c in result.phase_path:
            w.writerow([c.segment, repr(c.s.real), repr(c.s.imag), repr(c.value.real), repr(c.value.imag), repr(c.phase)])


# -- second oracle: exact polynomial arithmetic ------------------------------

def _poly_from_roots(roots: list[tuple[complex, int]]) -> np.ndarray:
    p = np.ones(1, dtype=complex)
    for r, m in roots:
        for _ in range(m):
            p = P.polymul(p, [-r, 1.0])
    return np.real_if_close(p, tol=1e6).astype(complex)


def _lcm_roots(dens: list[np.ndarray]) -> list[tuple[complex, int]]:
    merged: list[list] = []
    for den in dens:
        for r, m in cluster_roots(poly_roots(den)):
            for item in merged:
                if abs(item[0] - r) <= TOL_MULTIPLE * (1 + abs(r)):
                    item[1] = max(item[1], m)
                    break
            else:
                merged.append([r, m])
    return [(complex(r), int(m)) for r, m in merged]


def _common_form(M: TransferMatrix):
    """``M = N(s) / d(s)`` with a scalar polynomial ``d`` and polynomial matrix ``N``."""
    fracs = {idx: entry_fraction(e) for idx, e in M.iter_entries()}
    roots = _lcm_roots([den for _, den in fracs.values()])
    d = _poly_from_roots(roots)
    N = np.empty(M.shape, dtype=object)
    for (i, j), (num, den) in fracs.items():
        q, _r = P.polydiv(P.polymul(num, d), den)
        N[i, j] = q
    return d, N, roots


def _pmatmul(A, B):
    n, m, k = A.shape[0], A.shape[1], B.shape[1]
    C = np.empty((n, k), dtype=object)
    for i in range(n):
        for j in range(k):
            acc = np.zeros(1, dtype=complex)
            for l in range(m):
                acc = P.polyadd(acc, P.polymul(A[i, l], B[l, j]))
            C[i, j] = acc
    return C


def _pdet(M):
    n = M.shape[0]
    if n == 1:
        return M[0, 0]
    out = np.zeros(1, dtype=complex)
    for j in range(n):
        minor = np.delete(np.delete(M, 0, axis=0), j, axis=1)
        term = P.polymul(M[0, j], _pdet(minor))
        out = P.polyadd(out, term if j % 2 == 0 else -term)
    return out


def closed_loop_poles_rational(G: TransferMatrix, Gbar: TransferMatrix, tau: float = 1.0) -> np.ndarray:
    """Zeros of ``det(I - tau G Gbar)`` from its numerator polynomial.

    Copies of open-loop poles that the common-denominator form introduces are
    cancelled against ``(d_G d_Gbar)^n`` before the roots are returned.
    """
    if G.has_delay or Gbar.has_delay:
        raise NotRational("closed-loop polynomial needs delay-free systems")
    n = G.rows
    dG, NG, rG = _common_form(G)
    dB, NB, rB = _common_form(Gbar)
    dd = P.polymul(dG, dB)
    prod = _pmatmul(NG, NB)
    M = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            M[i, j] = -tau * prod[i, j]
            if i == j:
                M[i, j] = P.polyadd(M[i, j], dd)
    p = np.real_if_close(_pdet(M), tol=1e6)
    roots = list(poly_roots(np.real(p) if np.isrealobj(p) else p))
    # cancel open-loop copies
    for r, m in rG + rB:
        for _ in range(m * n):
            if not roots:
                break
            dist = [abs(x - r) for x in roots]
            k = int(np.argmin(dist))
            if dist[k] <= 1e-5 * (1 + abs(r)):
                roots.pop(k)
    return np.asarray(roots, dtype=complex)
