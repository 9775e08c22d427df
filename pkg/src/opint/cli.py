"""``opint`` command line: ``verify``, ``gen`` and ``report``.

Exit codes: 0 all checks passed, 1 check failures, 2 usage errors,
3 I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import DEFAULT
from .errors import InvalidInputError
from .linalg import JORDAN_GRAMMAR, JordanSpec, random_jordan_matrix, write_matrix
from .report import ReportFormatError, load_report, merge_reports, render, render_bounds_csv
from .suites import HARNESS_TOLERANCES, SUITE_NAMES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
FORMATS = ("json", "csv", "markdown")
MAX_DIM = 64


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opint", description="Generalized double/triple operator integrals: verification harness.")
    sub = p.add_subparsers(dest="command")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--config", help="JSON file with suite settings; flags override it")
    v.add_argument("--suite")
    v.add_argument("--seed", type=int)
    v.add_argument("--trials", type=int)
    v.add_argument("--max-dim", type=int, dest="max_dim")
    v.add_argument("--tol", action="append", default=[], metavar="KEY=VAL")
    v.add_argument("--out")
    v.add_argument("--format")
    v.add_argument("--jobs", type=int)
    v.add_argument("--bounds-csv", dest="bounds_csv", help="also write norm-bound rows as CSV")

    g = sub.add_parser("gen", help="generate a matrix from a Jordan spec")
    g.add_argument("spec", help=JORDAN_GRAMMAR)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)

    r = sub.add_parser("report", help="merge and render suite reports")
    r.add_argument("inputs", nargs="+")
    r.add_argument("--format", default="markdown")
    r.add_argument("--out")
    return p


def _default_seed() -> int:
    env = os.environ.get("OPINT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"OPINT_SEED must be an integer, got {env!r}") from None


def _parse_tol(items) -> dict:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects KEY=VAL, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"tolerance {key!r} needs a number, got {val!r}") from None
    return out


def _verify_config(args) -> dict:
    cfg = {"suite": "all", "seed": None, "trials": 20, "max_dim": 6, "tol": {}, "out": None, "format": "json",
           "jobs": os.cpu_count() or 1, "bounds_csv": None}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except ValueError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError(f"config {args.config} must hold a JSON object")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    for key in ("suite", "seed", "trials", "max_dim", "out", "format", "jobs", "bounds_csv"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    cfg["tol"] = {**cfg["tol"], **_parse_tol(args.tol)}
    if cfg["seed"] is None:
        cfg["seed"] = _default_seed()

    if cfg["suite"] not in SUITE_NAMES:
        raise UsageError(f"unknown suite {cfg['suite']!r}; choose from {', '.join(SUITE_NAMES)}")
    if cfg["format"] not in FORMATS:
        raise UsageError(f"unknown format {cfg['format']!r}; choose from {', '.join(FORMATS)}")
    if not isinstance(cfg["trials"], int) or cfg["trials"] < 1:
        raise UsageError("--trials must be a positive integer")
    if not isinstance(cfg["max_dim"], int) or not 2 <= cfg["max_dim"] <= MAX_DIM:
        raise UsageError(f"--max-dim must be between 2 and {MAX_DIM}")
    if not isinstance(cfg["jobs"], int) or cfg["jobs"] < 1:
        raise UsageError("--jobs must be a positive integer")
    unknown = set(cfg["tol"]) - set(DEFAULT.keys())
    if unknown:
        raise UsageError(f"unknown tolerance keys: {', '.join(sorted(unknown))}")
    return cfg


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_verify(args) -> int:
    cfg = _verify_config(args)
    tol = HARNESS_TOLERANCES.with_overrides(cfg["tol"])
    report = run_suite(cfg["suite"], cfg["seed"], cfg["trials"], cfg["max_dim"], tol, cfg["jobs"])
    _write(cfg["out"], render(report, cfg["format"]))
    if cfg["bounds_csv"]:
        _write(cfg["bounds_csv"], render_bounds_csv(report))
    s = report.summary
    print(f"{report.suite}: pass {s['pass']} / fail {s['fail']}", file=sys.stderr)
    return EXIT_OK if s["fail"] == 0 else EXIT_FAIL


def cmd_gen(args) -> int:
    try:
        spec = JordanSpec.parse(args.spec)
    except (InvalidInputError, ValueError) as exc:
        raise UsageError(f"cannot parse spec {args.spec!r}: {exc}\ngrammar: {JORDAN_GRAMMAR}") from None
    seed = args.seed if args.seed is not None else _default_seed()
    X, _ = random_jordan_matrix(spec, seed)
    out = Path(args.out)
    write_matrix(out, X)
    sidecar = out.with_name(out.name + ".meta.json")
    sidecar.write_text(json.dumps({"spec": spec.to_string(), "seed": seed}, indent=2) + "\n")
    return EXIT_OK


def cmd_report(args) -> int:
    if args.format not in FORMATS:
        raise UsageError(f"unknown format {args.format!r}; choose from {', '.join(FORMATS)}")
    reports = []
    for path in args.inputs:
        text = Path(path).read_text()
        try:
            reports.append(load_report(text))
        except ReportFormatError as exc:
            raise UsageError(f"malformed report {path}: {exc}") from None
    merged = merge_reports(reports)
    _write(args.out, render(merged, args.format))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    handler = {"verify": cmd_verify, "gen": cmd_gen, "report": cmd_report}[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"opint: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"opint: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
