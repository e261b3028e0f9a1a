"""JSON system files, machine-readable reports and report replay."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from .classifier import FrequencyGrid, NIClassification
from .errors import SchemaError
from .iqc import TOL_STRICT, HermitianMultiplier, IqcCheckReport, Mode, check_pair
from .linalg import TOL_PSD
from .tf_core import TOL_AXIS, TOL_POLE, DelayedRationalTerm, ScalarTF, TransferMatrix
from .verdict import AnalysisOptions, StabilityCertificate, UserMultipliers, analyze, scale_pair

_NUMBER = {"type": "number"}
_COMPLEX = {"oneOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _COMPLEX}}

SYSTEM_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["G", "Gbar"],
    "additionalProperties": False,
    "$defs": {
        "term": {
            "type": "object",
            "required": ["num", "den"],
            "additionalProperties": False,
            "properties": {
                "num": {"type": "array", "items": _NUMBER, "minItems": 1},
                "den": {"type": "array", "items": _NUMBER, "minItems": 1},
                "delay": {"type": "number", "minimum": 0},
            },
        },
        "system": {
            "type": "object",
            "required": ["rows", "cols"],
            "additionalProperties": False,
            "properties": {
                "rows": {"type": "integer", "minimum": 1},
                "cols": {"type": "integer", "minimum": 1},
                "entries": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["row", "col", "terms"],
                        "additionalProperties": False,
                        "properties": {
                            "row": {"type": "integer", "minimum": 0},
                            "col": {"type": "integer", "minimum": 0},
                            "terms": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/term"}},
                        },
                    },
                },
            },
        },
    },
    "properties": {
        "G": {"$ref": "#/$defs/system"},
        "Gbar": {"$ref": "#/$defs/system"},
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grid": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "lo": {"type": "number", "exclusiveMinimum": 0},
                        "hi": {"type": "number", "exclusiveMinimum": 0},
                        "points": {"type": "integer", "minimum": 2},
                        "refine_levels": {"type": "integer", "minimum": 0},
                        "frequencies": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                    },
                },
                "tolerances": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "strict_margin": {"type": "number", "minimum": 0},
                        "residue_margin": {"type": "number", "minimum": 0},
                    },
                },
                "tau_points": {"type": "integer", "minimum": 2},
                "user_multipliers": {
                    "type": "object",
                    "required": ["pi0", "pi_inf"],
                    "additionalProperties": False,
                    "properties": {
                        "pi0": _MATRIX,
                        "pi_inf": _MATRIX,
                        "mode": {"enum": [m.value for m in Mode]},
                    },
                },
            },
        },
    },
}


@dataclass
class SystemFile:
    G: TransferMatrix
    Gbar: TransferMatrix
    options: dict = field(default_factory=dict)


# -- primitive encoders ------------------------------------------------------

def _num(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _cplx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _matrix(X) -> list | None:
    if X is None:
        return None
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    return [[_cplx(v) for v in row] for row in X]


def _from_cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _from_matrix(rows) -> np.ndarray | None:
    if rows is None:
        return None
    return np.array([[_from_cplx(v) for v in row] for row in rows], dtype=complex)


# -- systems -----------------------------------------------------------------

def system_from_dict(d: dict) -> TransferMatrix:
    rows, cols = d["rows"], d["cols"]
    grid: list[list[ScalarTF]] = [[ScalarTF.zero() for _ in range(cols)] for _ in range(rows)]
    seen = set()
    for e in d.get("entries", []):
        i, j = e["row"], e["col"]
        if i >= rows or j >= cols:
            raise SchemaError(f"entry ({i}, {j}) outside a {rows}x{cols} system")
        if (i, j) in seen:
            raise SchemaError(f"entry ({i}, {j}) given twice")
        seen.add((i, j))
        grid[i][j] = ScalarTF(
            tuple(DelayedRationalTerm(tuple(t["num"]), tuple(t["den"]), t.get("delay", 0.0)) for t in e["terms"])
        )
    return TransferMatrix(tuple(tuple(r) for r in grid))


def system_to_dict(M: TransferMatrix) -> dict:
    zero = ScalarTF.zero()
    entries = []
    for (i, j), e in M.iter_entries():
        if e == zero:
            continue
        entries.append(
            {
                "row": i,
                "col": j,
                "terms": [
                    {"num": list(t.num_coeffs), "den": list(t.den_coeffs), "delay": t.delay} for t in e.terms
                ],
            }
        )
    return {"rows": M.rows, "cols": M.cols, "entries": entries}


def _validate(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(SYSTEM_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors[:10]:
            where = "/".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{where}: {err.message}")
        raise SchemaError("\n".join(lines))


def parse_system_text(text: str) -> SystemFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    _validate(doc)
    try:
        G = system_from_dict(doc["G"])
        Gbar = system_from_dict(doc["Gbar"])
    except (ValueError, TypeError) as exc:
        raise SchemaError(str(exc)) from exc
    return SystemFile(G, Gbar, doc.get("options", {}))


def load_system_file(path) -> SystemFile:
    return parse_system_text(FsPath(path).read_text())


def dump_system_file(sf: SystemFile) -> str:
    doc = {"G": system_to_dict(sf.G), "Gbar": system_to_dict(sf.Gbar)}
    if sf.options:
        doc["options"] = sf.options
    return json.dumps(doc, indent=2)


def options_from_file(opts: dict, **overrides) -> AnalysisOptions:
    """Analysis options from the file's ``options`` block; non-None keyword overrides win."""
    o = AnalysisOptions()
    g = opts.get("grid", {})
    o.grid_lo = g.get("lo", o.grid_lo)
    o.grid_hi = g.get("hi", o.grid_hi)
    o.grid_points = g.get("points", o.grid_points)
    o.refine_levels = g.get("refine_levels", o.refine_levels)
    if "frequencies" in g:
        o.grid = FrequencyGrid(np.asarray(g["frequencies"], dtype=float))
    tol = opts.get("tolerances", {})
    o.strict_margin = tol.get("strict_margin", o.strict_margin)
    o.residue_margin = tol.get("residue_margin", o.residue_margin)
    o.tau_points = opts.get("tau_points", o.tau_points)
    um = opts.get("user_multipliers")
    if um:
        o.user_multipliers = UserMultipliers(
            HermitianMultiplier(_from_matrix(um["pi0"]), "Pi0"),
            HermitianMultiplier(_from_matrix(um["pi_inf"]), "PiInf"),
            Mode(um.get("mode", Mode.THM.value)),
        )
    for k, v in overrides.items():
        if v is not None:
            setattr(o, k, v)
    return o


# -- reports -----------------------------------------------------------------

def _multiplier(Pi: HermitianMultiplier | None) -> dict | None:
    if Pi is None:
        return None
    return {"matrix": _matrix(Pi.matrix), "label": Pi.label, "construction": Pi.construction}


def _multiplier_back(d: dict | None) -> HermitianMultiplier | None:
    if d is None:
        return None
    return HermitianMultiplier(_from_matrix(d["matrix"]), d["label"], d["construction"])


def _report(r: IqcCheckReport) -> dict:
    return {
        "frequency": r.frequency,
        "mode": r.mode.value,
        "upper_margin": r.upper_margin,
        "lower_min": r.lower_min,
        "tol_strict": r.tol_strict,
        "tol_nonstrict": r.tol_nonstrict,
        "passed": r.passed,
        "scaling": None if r.scaling is None else np.asarray(r.scaling, dtype=float).tolist(),
        "multiplier": _multiplier(r.multiplier),
    }


def _classification(c: NIClassification | None) -> dict | None:
    if c is None:
        return None
    return {
        "verdict": c.verdict.value,
        "summary": c.summary(),
        "reason": c.reason,
        "witness_frequency": c.witness_frequency,
        "witness_min_eig": c.witness_min_eig,
        "witness_pole": None if c.witness_pole is None else _cplx(c.witness_pole),
        "min_defect": c.min_defect,
        "axis_poles": [
            {"omega0": p.omega0, "simple": p.simple, "residue": _matrix(p.residue)} for p in c.axis_poles
        ],
    }


def certificate_to_dict(cert: StabilityCertificate, G: TransferMatrix, Gbar: TransferMatrix, options: AnalysisOptions) -> dict:
    """Everything needed to re-verify ``cert``: systems, grids, tolerances and multipliers."""
    grid = cert.grid
    gains = {k: (_matrix(v) if isinstance(v, np.ndarray) else _num(v)) for k, v in cert.gains.items()}
    band = cert.midband
    return {
        "tool": {"name": "nistab", "version": __version__},
        "systems": {"G": system_to_dict(G), "Gbar": system_to_dict(Gbar)},
        "verdict": cert.verdict.value,
        "path": None if cert.path is None else cert.path.value,
        "scope": cert.scope,
        "diagnostics": list(cert.diagnostics),
        "oracle_agreement": cert.oracle_agreement,
        "classification": {"G": _classification(cert.classification_G), "Gbar": _classification(cert.classification_Gbar)},
        "tolerances": {
            "tol_strict_base": TOL_STRICT,
            "tol_psd": TOL_PSD,
            "tol_axis": TOL_AXIS,
            "tol_pole": TOL_POLE,
            "strict_margin": options.strict_margin,
            "residue_margin": options.residue_margin,
        },
        "grid": {
            "description": {
                "lo": options.grid_lo,
                "hi": options.grid_hi,
                "points": options.grid_points,
                "refine_levels": options.refine_levels,
                "extend_decades": options.extend_decades,
            },
            "frequencies": None if grid is None else grid.points.tolist(),
            "punctured": None if grid is None else list(grid.punctured),
            "refinement_log": None if grid is None else [[list(iv), why] for iv, why in grid.refinement_log],
        },
        "tau_grid": None if cert.tau_grid is None else np.asarray(cert.tau_grid).tolist(),
        "gains": gains,
        "scaling": None if cert.scaling is None else np.asarray(cert.scaling, dtype=float).tolist(),
        "multipliers": {
            "mode": cert.multiplier_mode.value,
            "pi0": _multiplier(cert.pi0),
            "pi_inf": _multiplier(cert.pi_inf),
            "user_supplied": options.user_multipliers is not None,
        },
        "reports": [_report(r) for r in cert.reports],
        "midband": None
        if band is None
        else {
            "lo": band.omega_lo,
            "hi": band.omega_hi,
            "min_margin": _num(band.min_margin),
            "low_min_margin": band.low_min_margin,
            "high_min_margin": band.high_min_margin,
            "mu0": band.mu0,
            "mu_inf": band.mu_inf,
            "points": len(band.points),
        },
        "uncovered": None if cert.uncovered is None else [_num(x) for x in cert.uncovered],
        "witness": None
        if cert.witness is None
        else {
            "frequency": cert.witness.frequency,
            "lambda": _cplx(cert.witness.lam),
            "tau_star": cert.witness.tau_star,
        },
    }


def dump_report(doc: dict) -> str:
    # floats go through repr, the shortest round-trip decimal
    return json.dumps(doc, indent=2, allow_nan=False)


# -- replay ------------------------------------------------------------------

@dataclass
class ReplayResult:
    ok: bool
    verdict: str
    stored_verdict: str
    max_margin_diff: float
    messages: list[str] = field(default_factory=list)


def _endpoint_values(G, Gbar, frequency):
    from .tf_core import dc_gain, inf_gain

    if frequency == "zero":
        return dc_gain(G), dc_gain(Gbar)
    return inf_gain(G), inf_gain(Gbar)


def replay_report(doc: dict, tol: float = 1e-12) -> ReplayResult:
    """Re-verify a stored report.

    Every stored IQC report is recomputed from its embedded multiplier,
    scaling and tau-grid, then the whole analysis is re-run on the stored
    frequency grid and compared with the stored verdict and band.
    """
    G = system_from_dict(doc["systems"]["G"])
    Gbar = system_from_dict(doc["systems"]["Gbar"])
    taus = np.asarray(doc["tau_grid"], dtype=float)
    msgs: list[str] = []
    worst = 0.0
    for k, r in enumerate(doc["reports"]):
        Pi = _multiplier_back(r["multiplier"])
        X = None if r["scaling"] is None else np.asarray(r["scaling"], dtype=float)
        A, Abar = scale_pair(X, *_endpoint_values(G, Gbar, r["frequency"]))
        again = check_pair(Pi, Abar, A, taus, Mode(r["mode"]), r["frequency"])
        for key in ("upper_margin", "lower_min"):
            diff = abs(getattr(again, key) - r[key])
            worst = max(worst, diff)
            if diff > tol:
                msgs.append(f"report {k} {key}: stored {r[key]!r}, recomputed {getattr(again, key)!r}")
        if again.passed != r["passed"]:
            msgs.append(f"report {k}: pass flag changed")

    g = doc["grid"]
    desc = g["description"]
    opts = AnalysisOptions(
        grid_lo=desc["lo"],
        grid_hi=desc["hi"],
        grid_points=desc["points"],
        refine_levels=desc["refine_levels"],
        extend_decades=desc["extend_decades"],
        strict_margin=doc["tolerances"]["strict_margin"],
        residue_margin=doc["tolerances"]["residue_margin"],
        tau_values=taus,
    )
    if g["frequencies"] is not None:
        opts.grid = FrequencyGrid(
            np.asarray(g["frequencies"], dtype=float),
            [((iv[0], iv[1]), why) for iv, why in g["refinement_log"]],
            list(g["punctured"]),
        )
    m = doc["multipliers"]
    if m["user_supplied"]:
        opts.user_multipliers = UserMultipliers(_multiplier_back(m["pi0"]), _multiplier_back(m["pi_inf"]), Mode(m["mode"]))
    cert = analyze(G, Gbar, opts)
    fresh = certificate_to_dict(cert, G, Gbar, opts)
    if fresh["verdict"] != doc["verdict"] or fresh["path"] != doc["path"]:
        msgs.append(f"verdict {fresh['verdict']}/{fresh['path']} differs from stored {doc['verdict']}/{doc['path']}")
    if len(fresh["reports"]) != len(doc["reports"]):
        msgs.append("number of reports differs")
    else:
        for k, (a, b) in enumerate(zip(fresh["reports"], doc["reports"])):
            for key in ("upper_margin", "lower_min"):
                diff = abs(a[key] - b[key])
                worst = max(worst, diff)
                if diff > tol:
                    msgs.append(f"re-run report {k} {key} differs by {diff:.3e}")
    sb, fb = doc["midband"], fresh["midband"]
    if (sb is None) != (fb is None):
        msgs.append("band presence differs")
    elif sb is not None:
        for key in ("lo", "hi", "min_margin", "low_min_margin", "high_min_margin"):
            a, b = fb[key], sb[key]
            if (a is None) != (b is None) or (a is not None and abs(a - b) > tol * max(1.0, abs(b))):
                msgs.append(f"band {key}: stored {b!r}, recomputed {a!r}")
    return ReplayResult(not msgs, fresh["verdict"], doc["verdict"], worst, msgs)
