"""`figure` command: render one figure id from qnetcap output files.

Examples:
    figure --id F1 --hist hist.csv --survival surv.csv --out f1.png
    figure --id F3 --summary summary.csv --er-summary er1.csv --out f3.svg
    figure --id F6 --records records.csv --points 0,5 --out f6.png

Prints a JSON metadata record (including the crossing density for F3)
to stdout; exits non-zero on schema mismatches, naming the offender.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import csvio, panels

FIGURES = {
    "F1": ("degree statistics", ("hist", "survival")),
    "F2": ("capacity vs distance scatter", ("records",)),
    "F3": ("capacity transition", ("summary",)),
    "F4": ("growth-model saturation", ("summary",)),
    "F5": ("giant component", ("giant",)),
    "F6": ("capacity distribution shading", ("records",)),
    "F7": ("mean vs median capacity", ("summary",)),
    "F8": ("bound convergence", ("bounds",)),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="figure",
        description="Render qnetcap CSV/JSON outputs into figure panels (PNG or SVG by extension).",
    )
    p.add_argument("--id", required=True, choices=sorted(FIGURES),
                   help="figure layout to render")
    p.add_argument("--out", required=True, help="output image path (.png or .svg)")
    p.add_argument("--records", help="records CSV from `qnetcap sweep`")
    p.add_argument("--summary", help="summary CSV from `qnetcap sweep`")
    p.add_argument("--er-summary", action="append", default=[],
                   help="uniform-probability model summary CSV (repeatable; F3 panel c)")
    p.add_argument("--hist", help="degree histogram CSV from `qnetcap stats`")
    p.add_argument("--survival", help="cumulative degree CSV from `qnetcap stats`")
    p.add_argument("--giant", help="CSV with rho,giant_fraction columns")
    p.add_argument("--bounds", help="JSON-lines file of `qnetcap asymptotics` records")
    p.add_argument("--points", help="comma-separated point indices (F2/F6)")
    p.add_argument("--level", type=float, default=1.0,
                   help="capacity level for the crossing marker (F3)")
    p.add_argument("--bins", type=int, default=20, help="distance bin count (F2/F6)")
    return p


def _require(args, names):
    missing = [n for n in names if not getattr(args, n)]
    if missing:
        flags = ", ".join(f"--{n.replace('_', '-')}" for n in missing)
        raise csvio.SchemaError(f"figure {args.id} needs {flags}")


def _parse_points(spec):
    if spec is None:
        return None
    try:
        return [int(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError as exc:
        raise csvio.SchemaError(f"--points must be comma-separated integers: {spec!r}") from exc


def run(args) -> dict:
    _require(args, FIGURES[args.id][1])
    if args.id == "F1":
        meta = panels.render_f1(csvio.load_histogram(args.hist),
                                csvio.load_survival(args.survival), args.out)
    elif args.id == "F2":
        meta = panels.render_f2(csvio.load_records(args.records), args.out,
                                points=_parse_points(args.points), bin_count=args.bins)
    elif args.id == "F3":
        meta = panels.render_f3(
            csvio.load_summary(args.summary), args.out,
            er_summaries=[csvio.load_summary(p) for p in args.er_summary],
            level=args.level,
        )
    elif args.id == "F4":
        meta = panels.render_f4(csvio.load_summary(args.summary), args.out)
    elif args.id == "F5":
        meta = panels.render_f5(csvio.load_giant(args.giant), args.out)
    elif args.id == "F6":
        meta = panels.render_f6(csvio.load_records(args.records), args.out,
                                points=_parse_points(args.points), bin_count=args.bins)
    elif args.id == "F7":
        meta = panels.render_f7(csvio.load_summary(args.summary), args.out)
    else:
        meta = panels.render_f8(csvio.load_bounds_jsonl(args.bounds), args.out)
    meta.update({"figure": args.id, "out": args.out})
    return meta


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        meta = run(args)
    except (csvio.SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    json.dump(meta, sys.stdout)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
