"""Matrix transfer functions built from delayed proper rational terms.

Every entry of a :class:`TransferMatrix` is a sum of terms
``num(s) / den(s) * exp(-delay * s)`` with real coefficients stored in
ascending powers of ``s``.  Poles and residues are computed in closed form
from the denominators; the exponential factors never introduce poles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    DimensionMismatch,
    InvalidSystem,
    NotSimplePole,
    PoleAtOrigin,
    PoleProximity,
)

TOL_POLE = 1e-6
TOL_AXIS = 1e-8
# roots closer than this (relative) are treated as one repeated root
TOL_CLUSTER = 1e-6
# a root of multiplicity m splits by ~eps**(1/m) under companion eigensolves
TOL_MULTIPLE = 1e-5
ILL_CONDITIONED = 1e8


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


def poly_roots(coeffs: Sequence[float]) -> np.ndarray:
    """Roots of an ascending-power polynomial.

    Companion-matrix eigenvalues followed by one Newton step per root.
    """
    c = np.asarray(_trim(coeffs), dtype=float)
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    roots = P.polyroots(c).astype(complex)
    dc = P.polyder(c)
    p = P.polyval(roots, c)
    dp = P.polyval(roots, dc)
    step = np.zeros_like(roots)
    ok = np.abs(dp) > 1e-12 * np.abs(c).sum() * (1 + np.abs(roots)) ** (len(c) - 2)
    step[ok] = p[ok] / dp[ok]
    polished = roots - step
    # keep the polish only where it reduces the residual
    better = np.abs(P.polyval(polished, c)) <= np.abs(p)
    return np.where(better, polished, roots)


def cluster_roots(roots: np.ndarray, tol: float = TOL_MULTIPLE) -> list[tuple[complex, int]]:
    """Group numerically repeated roots; returns ``(centre, multiplicity)``."""
    remaining = list(np.asarray(roots, dtype=complex))
    out: list[tuple[complex, int]] = []
    while remaining:
        r = remaining.pop(0)
        members = [r]
        keep = []
        for q in remaining:
            if abs(q - r) <= tol * (1 + abs(r)):
                members.append(q)
            else:
                keep.append(q)
        remaining = keep
        out.append((complex(np.mean(members)), len(members)))
    return out


def root_condition(coeffs: Sequence[float], root: complex) -> float:
    """Relative condition number of a simple root (inf for repeated roots)."""
    c = np.asarray(_trim(coeffs), dtype=float)
    dp = P.polyval(root, P.polyder(c))
    scale = np.sum(np.abs(c) * np.abs(root) ** np.arange(len(c)))
    if dp == 0:
        return float("inf")
    return float(scale / (abs(dp) * max(abs(root), 1e-300)))


@dataclass(frozen=True)
class DelayedRationalTerm:
    """``num(s)/den(s) * exp(-delay*s)`` with ascending-power coefficients."""

    num_coeffs: tuple[float, ...]
    den_coeffs: tuple[float, ...]
    delay: float = 0.0

    def __post_init__(self):
        num = _trim(self.num_coeffs) if len(self.num_coeffs) else (0.0,)
        if len(self.den_coeffs) == 0:
            raise InvalidSystem("den_coeffs must be nonempty")
        den = tuple(float(x) for x in self.den_coeffs)
        if den[-1] == 0.0:
            raise InvalidSystem("leading denominator coefficient must be nonzero")
        if not all(np.isfinite(num)) or not all(np.isfinite(den)):
            raise InvalidSystem("coefficients must be finite")
        if any(num) and len(num) > len(den):
            raise InvalidSystem(
                f"improper term: deg(num)={len(num) - 1} > deg(den)={len(den) - 1}"
            )
        delay = float(self.delay)
        if not np.isfinite(delay) or delay < 0:
            raise InvalidSystem(f"delay must be finite and >= 0, got {self.delay!r}")
        object.__setattr__(self, "num_coeffs", num)
        object.__setattr__(self, "den_coeffs", den)
        object.__setattr__(self, "delay", delay)

    @property
    def is_zero(self) -> bool:
        return not any(self.num_coeffs)

    @cached_property
    def _num(self) -> np.ndarray:
        return np.asarray(self.num_coeffs, dtype=float)

    @cached_property
    def _den(self) -> np.ndarray:
        return np.asarray(self.den_coeffs, dtype=float)

    @cached_property
    def roots(self) -> np.ndarray:
        if self.is_zero:
            return np.zeros(0, dtype=complex)
        return poly_roots(self.den_coeffs)

    @cached_property
    def root_clusters(self) -> list[tuple[complex, int]]:
        return cluster_roots(self.roots)

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        if self.is_zero:
            return np.zeros_like(s)
        val = P.polyval(s, self._num) / P.polyval(s, self._den)
        if self.delay:
            val = val * np.exp(-self.delay * s)
        return val

    @property
    def inf_value(self) -> float:
        """Limit along the positive real axis."""
        if self.is_zero or self.delay > 0:
            return 0.0
        if len(self.num_coeffs) == len(self.den_coeffs):
            return self.num_coeffs[-1] / self.den_coeffs[-1]
        return 0.0

    def residue_at(self, omega0: float) -> complex:
        """Contribution to ``lim (s - j w0) j R(s)`` at ``s = j*omega0``."""
        s0 = 1j * omega0
        for r, mult in self.root_clusters:
            if abs(r - s0) <= TOL_CLUSTER * (1 + abs(s0)):
                if mult > 1:
                    raise NotSimplePole(
                        f"root {r!r} has multiplicity {mult} in term {self}"
                    )
                dden = P.polyval(s0, P.polyder(self._den))
                return complex(
                    1j * P.polyval(s0, self._num) / dden * np.exp(-1j * omega0 * self.delay)
                )
        return 0j


@dataclass(frozen=True)
class ScalarTF:
    terms: tuple[DelayedRationalTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise InvalidSystem("a scalar transfer function needs at least one term")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def zero(cls) -> "ScalarTF":
        return cls((DelayedRationalTerm((0.0,), (1.0,)),))

    @classmethod
    def rational(cls, num: Sequence[float], den: Sequence[float], delay: float = 0.0) -> "ScalarTF":
        return cls((DelayedRationalTerm(tuple(num), tuple(den), delay),))

    @property
    def is_zero(self) -> bool:
        return all(t.is_zero for t in self.terms)

    @property
    def has_delay(self) -> bool:
        return any(t.delay > 0 and not t.is_zero for t in self.terms)

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for t in self.terms:
            out = out + t(s)
        return out

    @property
    def inf_value(self) -> float:
        return float(sum(t.inf_value for t in self.terms))

    def __add__(self, other: "ScalarTF") -> "ScalarTF":
        return ScalarTF(self.terms + other.terms)


def _as_scalar(x) -> ScalarTF:
    if isinstance(x, ScalarTF):
        return x
    if isinstance(x, DelayedRationalTerm):
        return ScalarTF((x,))
    if isinstance(x, (int, float, np.floating, np.integer)):
        return ScalarTF.rational((float(x),), (1.0,))
    raise TypeError(f"cannot interpret {x!r} as a scalar transfer function")


@dataclass(frozen=True)
class AxisPole:
    """Simple (or not) pole at ``j*omega0`` with the residue of ``j R``."""

    omega0: float
    residue: np.ndarray | None
    simple: bool
    entries: tuple[tuple[int, int], ...] = ()

    @property
    def hermitian_defect(self) -> float:
        if self.residue is None:
            return float("inf")
        r = self.residue
        return float(np.linalg.norm(r - r.conj().T) / max(1.0, np.linalg.norm(r)))


@dataclass
class PoleReport:
    open_rhp: list[complex] = field(default_factory=list)
    axis: list[AxisPole] = field(default_factory=list)
    open_lhp_count: int = 0
    at_origin: bool = False
    conjugate_paired: bool = True
    ill_conditioned: list[tuple[complex, float]] = field(default_factory=list)


@dataclass(frozen=True)
class TransferMatrix:
    """``rows x cols`` grid of :class:`ScalarTF` entries."""

    entries: tuple[tuple[ScalarTF, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_as_scalar(e) for e in row) for row in self.entries)
        if not rows or not rows[0]:
            raise InvalidSystem("transfer matrix must have at least one entry")
        if any(len(r) != len(rows[0]) for r in rows):
            raise InvalidSystem("ragged transfer matrix")
        object.__setattr__(self, "entries", rows)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def has_delay(self) -> bool:
        return any(e.has_delay for row in self.entries for e in row)

    @classmethod
    def scalar(cls, tf) -> "TransferMatrix":
        return cls(((_as_scalar(tf),),))

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "TransferMatrix":
        cols = rows if cols is None else cols
        return cls(tuple(tuple(ScalarTF.zero() for _ in range(cols)) for _ in range(rows)))

    @classmethod
    def constant(cls, matrix) -> "TransferMatrix":
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(tuple(tuple(ScalarTF.rational((v,), (1.0,)) for v in row) for row in m))

    def iter_entries(self) -> Iterable[tuple[tuple[int, int], ScalarTF]]:
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                yield (i, j), e

    def iter_terms(self) -> Iterable[tuple[tuple[int, int], DelayedRationalTerm]]:
        for idx, e in self.iter_entries():
            for t in e.terms:
                if not t.is_zero:
                    yield idx, t

    def __add__(self, other: "TransferMatrix") -> "TransferMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return TransferMatrix(
            tuple(
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(self.entries, other.entries)
            )
        )

    def __call__(self, s) -> np.ndarray:
        return evaluate(self, s)


def _check_proximity(M: TransferMatrix, s: np.ndarray, tol_pole: float) -> None:
    for idx, t in M.iter_terms():
        for r in t.roots:
            d = np.abs(s - r)
            k = int(np.argmin(d))
            if d[k] <= tol_pole * (1 + abs(r)):
                raise PoleProximity(idx, complex(r), complex(s[k]))


def evaluate_many(M: TransferMatrix, s, tol_pole: float = TOL_POLE) -> np.ndarray:
    """Frequency response at each point of ``s``; shape ``s.shape + (rows, cols)``."""
    s = np.asarray(s, dtype=complex)
    flat = s.reshape(-1)
    if flat.size:
        _check_proximity(M, flat, tol_pole)
    out = np.zeros(flat.shape + M.shape, dtype=complex)
    for (i, j), e in M.iter_entries():
        out[:, i, j] = e(flat)
    return out.reshape(s.shape + M.shape)


def evaluate(M: TransferMatrix, s: complex, tol_pole: float = TOL_POLE) -> np.ndarray:
    """``M(s)`` as a ``rows x cols`` complex array."""
    return evaluate_many(M, np.asarray([s], dtype=complex), tol_pole)[0]


def dc_gain(M: TransferMatrix) -> np.ndarray:
    for idx, t in M.iter_terms():
        for r in t.roots:
            if abs(r) <= TOL_AXIS:
                raise PoleAtOrigin(f"entry {idx} has a pole at s = 0")
    return evaluate(M, 0.0)


def inf_gain(M: TransferMatrix) -> np.ndarray:
    """Limit of ``M(s)`` as ``s -> +inf`` along the real axis (exact)."""
    out = np.zeros(M.shape, dtype=complex)
    for (i, j), e in M.iter_entries():
        out[i, j] = e.inf_value
    return out


def _is_axis(r: complex, tol_axis: float) -> bool:
    return abs(r.real) <= tol_axis * (1 + abs(r))


def find_poles(M: TransferMatrix, tol_axis: float = TOL_AXIS) -> PoleReport:
    """Classify every denominator root of ``M`` as open-RHP, axis or open-LHP."""
    report = PoleReport()
    rhp: list[complex] = []
    lhp: list[complex] = []
    axis_freqs: list[float] = []
    axis_entries: list[set] = []
    axis_simple: list[bool] = []
    all_real = True
    for idx, t in M.iter_terms():
        for r, mult in t.root_clusters:
            cond = root_condition(t.den_coeffs, r) if mult == 1 else float("inf")
            if cond > ILL_CONDITIONED:
                report.ill_conditioned.append((r, cond))
            if _is_axis(r, tol_axis):
                w = float(r.imag)
                if abs(w) <= tol_axis:
                    report.at_origin = True
                    continue
                if w < 0:
                    continue
                for k, w0 in enumerate(axis_freqs):
                    if abs(w - w0) <= tol_axis * (1 + w0) or abs(w - w0) <= TOL_CLUSTER * w0:
                        axis_entries[k].add(idx)
                        axis_simple[k] = axis_simple[k] and mult == 1
                        break
                else:
                    axis_freqs.append(w)
                    axis_entries.append({idx})
                    axis_simple.append(mult == 1)
            elif r.real > 0:
                rhp.append(r)
            else:
                lhp.append(r)
        # conjugate pairing: each non-real root must have its mirror
        for r, _ in t.root_clusters:
            if abs(r.imag) > tol_axis * (1 + abs(r)):
                if not any(abs(q - np.conj(r)) <= TOL_CLUSTER * (1 + abs(r)) for q, _ in t.root_clusters):
                    all_real = False
    report.conjugate_paired = all_real
    report.open_rhp = [r for r, _ in cluster_roots(np.asarray(rhp), TOL_CLUSTER)]
    report.open_lhp_count = len(cluster_roots(np.asarray(lhp), TOL_CLUSTER))
    order = np.argsort(axis_freqs)
    for k in order:
        w0 = axis_freqs[k]
        residue = None
        simple = axis_simple[k]
        if simple and M.is_square:
            try:
                residue = residue_matrix(M, w0)
            except NotSimplePole:
                simple = False
        report.axis.append(
            AxisPole(w0, residue, simple, tuple(sorted(axis_entries[k])))
        )
    return report


def residue_matrix(M: TransferMatrix, omega0: float) -> np.ndarray:
    """``lim_{s -> j w0} (s - j w0) j M(s)`` assembled entrywise."""
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    out = np.zeros(M.shape, dtype=complex)
    for (i, j), e in M.iter_entries():
        out[i, j] = sum(t.residue_at(omega0) for t in e.terms if not t.is_zero)
    return out


def hermitian_residue_defect(R: np.ndarray) -> float:
    return float(np.linalg.norm(R - R.conj().T) / max(1.0, np.linalg.norm(R)))


def max_delay(M: TransferMatrix) -> float:
    return max((t.delay for _, t in M.iter_terms()), default=0.0)


def is_rational(M: TransferMatrix) -> bool:
    return not M.has_delay


def entry_fraction(e: ScalarTF) -> tuple[np.ndarray, np.ndarray]:
    """Combine a delay-free scalar entry into a single ``num/den`` pair."""
    if e.has_delay:
        raise ValueError("entry has a delay term")
    num = np.zeros(1)
    den = np.ones(1)
    for t in e.terms:
        if t.is_zero:
            continue
        num = P.polyadd(P.polymul(num, t._den), P.polymul(t._num, den))
        den = P.polymul(den, t._den)
    return num, den
