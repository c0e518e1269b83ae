"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
configuration errors. Machine-readable output goes to stdout or ``--out``;
diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .caustics import (
    Window,
    critical_curves,
    fmt,
    grid_csv,
    map_to_caustics,
    multiplicity_scan,
    polylines_csv,
)
from .config import load_config
from .errors import ConfigError, EliminationDegenerate, EmptyWindow, LensfixError
from .lefschetz import report_jsonl, summarize, summary_record
from .lens import validate
from .oracle import ORACLE_SEED, verify_model
from .solver import solve_fixed_points

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text: str, n: int, what: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != n:
        raise UsageError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"cannot parse {what} {text!r}") from exc


def parse_source(text: str) -> complex:
    re, im = _floats(text, 2, "--source")
    return complex(re, im)


def parse_window(text: str) -> Window:
    cx, cy, hw, hh, nx, ny = _floats(text, 6, "--window")
    if nx != int(nx) or ny != int(ny):
        raise UsageError("window node counts must be integers")
    try:
        return Window(complex(cx, cy), hw, hh, int(nx), int(ny))
    except ValueError as exc:
        raise UsageError(f"malformed window: {exc}") from exc


def read_sources(path) -> list[complex]:
    out = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise UsageError(f"{path}:{lineno}: expected 're,im'")
        try:
            out.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            if lineno == 1:
                continue  # header row
            raise UsageError(f"{path}:{lineno}: cannot parse {line!r}")
    return out


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    model, _ = load_config(args.model)
    report = validate(model)
    _emit(report.text() + "\n", args.out)
    if not report.ok:
        print(f"failing invariants: {', '.join(report.failing())}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_images(args) -> int:
    model, opts = load_config(args.model)
    zeta = parse_source(args.source)
    try:
        points = solve_fixed_points(model, zeta, opts)
        report = summarize(model.name, zeta, points, opts)
        text = report_jsonl(report)
        valid = report.valid
    except EliminationDegenerate as exc:
        print(f"degenerate source: {exc}", file=sys.stderr)
        rec = {
            "record": "summary",
            "model": model.name,
            "zeta_re": float(fmt(zeta.real)),
            "zeta_im": float(fmt(zeta.imag)),
            "n_fixed": 0,
            "n_real": 0,
            "complex_sum_re": None,
            "complex_sum_im": None,
            "real_sum": None,
            "valid": False,
        }
        text = json.dumps(rec) + "\n"
        valid = False
    _emit(text, args.out)
    if not valid:
        print("source lies on a caustic or is degenerate; report is invalid", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


INVARIANT_COLUMNS = ["zeta_re", "zeta_im", "n_fixed", "n_real", "sum_re", "sum_im", "real_sum", "valid"]


def invariant_rows(model, sources, opts):
    rows = []
    for zeta in sources:
        try:
            points = solve_fixed_points(model, zeta, opts)
            rec = summary_record(summarize(model.name, zeta, points, opts))
            rows.append(
                {
                    "zeta_re": zeta.real,
                    "zeta_im": zeta.imag,
                    "n_fixed": rec["n_fixed"],
                    "n_real": rec["n_real"],
                    "sum_re": rec["complex_sum_re"],
                    "sum_im": rec["complex_sum_im"],
                    "real_sum": rec["real_sum"],
                    "valid": rec["valid"],
                }
            )
        except LensfixError:
            rows.append(
                {
                    "zeta_re": zeta.real,
                    "zeta_im": zeta.imag,
                    "n_fixed": 0,
                    "n_real": 0,
                    "sum_re": float("nan"),
                    "sum_im": float("nan"),
                    "real_sum": float("nan"),
                    "valid": False,
                }
            )
    return rows


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if v is None:
        return "nan"
    return fmt(v)


def cmd_invariant(args) -> int:
    model, opts = load_config(args.model)
    if args.sources:
        sources = read_sources(args.sources)
    elif args.random is not None:
        box = parse_window(args.window) if args.window else Window(0j, 1.5, 1.5, 8, 8)
        rng = np.random.default_rng(args.seed)
        sources = [
            complex(
                box.center.real + rng.uniform(-box.half_width, box.half_width),
                box.center.imag + rng.uniform(-box.half_height, box.half_height),
            )
            for _ in range(args.random)
        ]
    else:
        raise UsageError("invariant needs --sources FILE or --random N")
    rows = invariant_rows(model, sources, opts)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(INVARIANT_COLUMNS)
    for r in rows:
        w.writerow([_cell(r[c]) for c in INVARIANT_COLUMNS])
    _emit(buf.getvalue(), args.out)
    bad = [
        k
        for k, r in enumerate(rows)
        if r["valid"] and not abs(complex(r["sum_re"], r["sum_im"]) - 1.0) < args.tol
    ]
    for k in bad:
        r = rows[k]
        print(
            f"row {k}: zeta = {r['zeta_re']:.10g}{r['zeta_im']:+.10g}i, sum = {r['sum_re']:.10g}{r['sum_im']:+.10g}i",
            file=sys.stderr,
        )
    n_invalid = sum(not r["valid"] for r in rows)
    if n_invalid:
        print(f"{n_invalid} degenerate source(s) excluded", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def cmd_scan(args) -> int:
    model, opts = load_config(args.model)
    window = parse_window(args.window)
    grid = multiplicity_scan(model, window, opts, jobs=args.jobs)
    _emit(grid_csv(grid), args.out)
    if args.polylines:
        _emit(polylines_csv({"caustic": grid.caustic_polylines}), args.polylines)
    if args.svg:
        from .plotting import plot_multiplicity

        plot_multiplicity(grid, args.svg)
    print(f"max_count = {grid.max_count}, masked nodes = {int((grid.counts < 0).sum())}", file=sys.stderr)
    return EXIT_OK


def cmd_caustics(args) -> int:
    model, _ = load_config(args.model)
    window = parse_window(args.window)
    try:
        crit = critical_curves(model, window)
    except EmptyWindow as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    caus = map_to_caustics(model, crit)
    _emit(polylines_csv({"critical": crit, "caustic": caus}), args.out)
    if args.svg:
        from .plotting import plot_caustics

        plot_caustics(crit, caus, args.svg)
    print(f"{len(crit)} critical polyline(s)", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    model, opts = load_config(args.model)
    checks = verify_model(model, opts, n_sources=args.random or 20, seed=args.seed, tol=args.tol)
    _emit("".join(c.line() + "\n" for c in checks), args.out)
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"verification failed: {failed[0].name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lensfix", description="Complex images and the magnification sum rule.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", required=True, help="model config file")
        p.add_argument("--out", help="write machine-readable output here instead of stdout")
        return p

    p = common(sub.add_parser("validate", help="check the model invariants"))
    p.set_defaults(func=cmd_validate)

    p = common(sub.add_parser("images", help="all complex images for one source (JSON lines)"))
    p.add_argument("--source", required=True, metavar="RE,IM")
    p.set_defaults(func=cmd_images)

    p = common(sub.add_parser("invariant", help="magnification sums over many sources (CSV)"))
    src = p.add_mutually_exclusive_group()
    src.add_argument("--sources", metavar="FILE", help="file of 're,im' lines")
    src.add_argument("--random", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", metavar="CX,CY,HW,HH,NX,NY", help="sampling box for --random")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_invariant)

    p = common(sub.add_parser("scan", help="real-image counts over a source-plane grid (CSV)"))
    p.add_argument("--window", required=True, metavar="CX,CY,HW,HH,NX,NY")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--polylines", metavar="PATH", help="write caustic polylines CSV here")
    p.add_argument("--svg", metavar="PATH")
    p.set_defaults(func=cmd_scan)

    p = common(sub.add_parser("caustics", help="critical curves and caustics (CSV)"))
    p.add_argument("--window", required=True, metavar="CX,CY,HW,HH,NX,NY", help="lens-plane window")
    p.add_argument("--svg", metavar="PATH")
    p.set_defaults(func=cmd_caustics)

    p = common(sub.add_parser("verify", help="cross-check the solver against independent oracles"))
    p.add_argument("--random", type=int, default=20, metavar="N", help="number of seeded sources")
    p.add_argument("--seed", type=int, default=ORACLE_SEED)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "jobs", 1) < 1:
        print("--jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
