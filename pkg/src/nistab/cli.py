"""Command-line entry point ``ni``.

Exit codes: 0 stable (or both systems in the required classes), 1 input
error, 2 classification failure, 3 unstable along the homotopy, 4
inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .classifier import classify, default_grid, ni_defect_many
from .errors import NIError, SchemaError
from .linalg import svd_extremes
from .reporting import (
    certificate_to_dict,
    dump_report,
    load_system_file,
    options_from_file,
    replay_report,
)
from .tf_core import evaluate_many
from .verdict import Verdict, analyze, oracle_agreement

EXIT_OK, EXIT_INPUT, EXIT_CLASS, EXIT_UNSTABLE, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
VERDICT_EXIT = {
    Verdict.STABLE: EXIT_OK,
    Verdict.UNSTABLE: EXIT_UNSTABLE,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


def _load(path):
    try:
        return load_system_file(path)
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from exc


def cmd_classify(args) -> int:
    sf = _load(args.file)
    opts = options_from_file(sf.options)
    grid = default_grid([sf.G, sf.Gbar], opts.grid_lo, opts.grid_hi, opts.grid_points, opts.refine_levels)
    cg = classify(sf.G, grid, opts.strict_margin)
    cb = classify(sf.Gbar, grid, opts.strict_margin)
    print(f"G: {cg.summary()}, Gbar: {cb.summary()}")
    return EXIT_OK if cg.verdict.in_N and cb.verdict.in_strict else EXIT_CLASS


def cmd_analyze(args) -> int:
    sf = _load(args.file)
    opts = options_from_file(
        sf.options,
        tau_points=args.tau_points,
        grid_lo=args.grid_lo,
        grid_hi=args.grid_hi,
        grid_points=args.grid_points,
    )
    cert = analyze(sf.G, sf.Gbar, opts)
    if args.oracle:
        oracle_agreement(cert, sf.G, sf.Gbar)
    print(f"verdict: {cert.verdict.value}")
    if cert.path is not None:
        print(f"path: {cert.path.value}")
    if cert.witness is not None:
        w = cert.witness
        ts = "none" if w.tau_star is None else f"{w.tau_star:.6g}"
        print(f"witness: frequency {w.frequency}, eigenvalue {w.lam:.6g}, tau* = {ts}")
    if cert.midband is not None:
        print(f"band: low up to {cert.midband.omega_lo:.6g}, high from {cert.midband.omega_hi:.6g}")
    if args.oracle:
        print(f"oracle_agreement: {str(cert.oracle_agreement).lower()}")
    for d in cert.diagnostics:
        print(f"note: {d}")
    if args.json:
        doc = certificate_to_dict(cert, sf.G, sf.Gbar, opts)
        with open(args.json, "w") as fh:
            fh.write(dump_report(doc))
    return VERDICT_EXIT[cert.verdict]


def cmd_sweep(args) -> int:
    sf = _load(args.file)
    opts = options_from_file(sf.options, grid_lo=args.grid_lo, grid_hi=args.grid_hi, grid_points=args.grid_points)
    grid = default_grid([sf.G, sf.Gbar], opts.grid_lo, opts.grid_hi, opts.grid_points, 0)
    w = grid.points
    cols: dict[str, np.ndarray] = {}
    if args.what == "ni-defect":
        for name, M in (("G", sf.G), ("Gbar", sf.Gbar)):
            cols[f"{name}_ni_defect"] = ni_defect_many(M, w)[0]
    elif args.what == "singvals":
        for name, M in (("G", sf.G), ("Gbar", sf.Gbar)):
            R = evaluate_many(M, 1j * w)
            ext = np.array([svd_extremes(X) for X in R])
            cols[f"{name}_sigma_max"], cols[f"{name}_sigma_min"] = ext[:, 0], ext[:, 1]
    else:
        R = evaluate_many(sf.G, 1j * w) @ evaluate_many(sf.Gbar, 1j * w)
        cols["abs_det"] = np.abs(np.linalg.det(np.eye(sf.G.rows) - R))
    with open(args.csv, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["omega", *cols])
        for k, om in enumerate(w):
            out.writerow([repr(float(om)), *(repr(float(c[k])) for c in cols.values())])
    return EXIT_OK


def cmd_winding(args) -> int:
    from .nyquist import winding_number

    sf = _load(args.file)
    res = winding_number(sf.G, sf.Gbar, args.tau, csv_path=args.csv)
    print(f"winding: {res.winding}")
    print(f"min |det|: {res.min_abs_det:.6g}")
    print(f"upper-half estimate: {res.upper_half_winding:.6g}")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        with open(args.report) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"{args.report}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        res = replay_report(doc)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed report: missing or invalid {exc}") from exc
    print(f"verdict: {res.verdict} (stored {res.stored_verdict})")
    print(f"max margin difference: {res.max_margin_diff:.3e}")
    for m in res.messages:
        print(f"mismatch: {m}")
    print("replay: ok" if res.ok else "replay: FAILED")
    return EXIT_OK if res.ok else EXIT_INCONCLUSIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ni", description="Stability analysis of negative imaginary feedback loops.")
    p.add_argument("--version", action="version", version=f"ni {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="classify G and Gbar")
    c.add_argument("file")
    c.set_defaults(func=cmd_classify)

    a = sub.add_parser("analyze", help="certify or refute stability for tau in [0, 1]")
    a.add_argument("file")
    a.add_argument("--oracle", action="store_true", help="cross-check with the winding-number oracle")
    a.add_argument("--json", metavar="OUT", help="write a replayable report")
    a.add_argument("--tau-points", type=int)
    a.add_argument("--grid-lo", type=float)
    a.add_argument("--grid-hi", type=float)
    a.add_argument("--grid-points", type=int)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="write frequency-sweep data as CSV")
    s.add_argument("file")
    s.add_argument("--what", choices=["ni-defect", "det", "singvals"], required=True)
    s.add_argument("--csv", metavar="OUT", required=True)
    s.add_argument("--grid-lo", type=float)
    s.add_argument("--grid-hi", type=float)
    s.add_argument("--grid-points", type=int)
    s.set_defaults(func=cmd_sweep)

    w = sub.add_parser("winding", help="winding number of det(I - tau G Gbar)")
    w.add_argument("file")
    w.add_argument("--tau", type=float, default=1.0)
    w.add_argument("--csv", metavar="OUT")
    w.set_defaults(func=cmd_winding)

    r = sub.add_parser("replay", help="re-verify a stored report")
    r.add_argument("report")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
