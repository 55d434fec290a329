"""``lab`` command line: run sweeps, emit plot data, verify acceptance checks.

Exit codes: 0 ok, 1 a check failed, 2 usage or runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiments import ResultRecord, SpecError, emit_plotdata, load_spec, run

log = logging.getLogger("lab")


def _cmd_run(args) -> int:
    spec = load_spec(args.spec)
    if args.out:
        spec.output = args.out
    if not spec.output:
        spec.output = str(Path(args.spec).with_suffix(""))
    rec = run(spec, workers=args.workers)
    log.info("wrote %s.csv and %s.json (%d rows, %.2fs)", spec.output, spec.output, len(rec.rows), rec.wall_clock)
    return 0


def _cmd_plotdata(args) -> int:
    rec = ResultRecord.from_json(Path(args.record).read_text())
    overlays = []
    for path in args.overlay or []:
        obj = json.loads(Path(path).read_text())
        overlays.extend(obj if isinstance(obj, list) else [obj])
    text = emit_plotdata(rec, overlays, x=args.x)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_verify(args) -> int:
    from .acceptance import run_all

    results = run_all(only=args.only)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="execute an experiment spec (JSON or TOML)")
    p.add_argument("spec")
    p.add_argument("--out", help="output path stem (overrides the output field)")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: $LAB_WORKERS or 1)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("plotdata", help="long-format CSV from a result record")
    p.add_argument("record")
    p.add_argument("--overlay", action="append", help="JSON curve spec (repeatable)")
    p.add_argument("--x", help="swept parameter to use as x axis")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_plotdata)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", type=int, action="append", help="criterion number (repeatable)")
    p.set_defaults(func=_cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (SpecError, OSError, ValueError, KeyError) as exc:
        print(f"lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
