"""Serialization and rendering of suite reports.

JSON is the canonical format.  CSV has one row per check with the fixed
header ``name,seed,residual,threshold,passed,details``; markdown gives one
summary table plus a per-kind breakdown for each suite.
"""

from __future__ import annotations

import csv
import io
import json
from collections import OrderedDict

from .suites import SuiteReport

__all__ = [
    "CSV_HEADER",
    "BOUNDS_CSV_HEADER",
    "ReportFormatError",
    "to_json_text",
    "load_report",
    "merge_reports",
    "render",
    "render_csv",
    "render_markdown",
    "render_bounds_csv",
]

CSV_HEADER = ("name", "seed", "residual", "threshold", "passed", "details")
BOUNDS_CSV_HEADER = ("kind", "seed", "lower", "observed", "upper", "upper_literal", "hypothesis_eq3_holds")


class ReportFormatError(ValueError):
    """A file is not a valid suite report."""


def to_json_text(report: SuiteReport, include_metadata: bool = True) -> str:
    return json.dumps(report.to_json(include_metadata), indent=2, sort_keys=True) + "\n"


def load_report(text: str) -> SuiteReport:
    try:
        obj = json.loads(text)
        if not isinstance(obj, dict) or not isinstance(obj.get("trials"), list):
            raise ReportFormatError("missing 'trials' list")
        return SuiteReport.from_json(obj)
    except ReportFormatError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ReportFormatError(str(exc)) from exc


def merge_reports(reports) -> SuiteReport:
    """Concatenate trials; suites are joined with ``+`` in first-seen order."""
    reports = list(reports)
    if len(reports) == 1:
        return reports[0]
    names = list(OrderedDict.fromkeys(r.suite for r in reports))
    trials = [t for r in reports for t in r.trials]
    return SuiteReport("+".join(names), reports[0].seed, trials, {"merged_from": len(reports)})


def render_csv(report: SuiteReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for t in report.trials:
        d = t.to_json()
        w.writerow([d["name"], d["seed"], repr(float(t.residual)), repr(float(t.threshold)), str(d["passed"]).lower(),
                    json.dumps(d["details"], sort_keys=True)])
    return buf.getvalue()


def _by(items, key):
    groups: OrderedDict = OrderedDict()
    for t in items:
        groups.setdefault(key(t), []).append(t)
    return groups


def _row(label, trials) -> str:
    passed = sum(t.passed for t in trials)
    worst = max((t.residual for t in trials), default=0.0)
    return f"| {label} | {len(trials)} | {passed} | {len(trials) - passed} | {worst:.3e} |"


def render_markdown(report: SuiteReport) -> str:
    s = report.summary
    lines = [
        f"# Suite `{report.suite}` (seed {report.seed})",
        "",
        f"pass {s['pass']} / fail {s['fail']}",
        "",
        "| suite | trials | pass | fail | max residual |",
        "|---|---|---|---|---|",
    ]
    families = _by(report.trials, lambda t: t.name.split(".")[0])
    for fam, trials in families.items():
        lines.append(_row(fam, trials))
    lines += ["", "| check | trials | pass | fail | max residual |", "|---|---|---|---|---|"]
    for name, trials in _by(report.trials, lambda t: t.name).items():
        lines.append(_row(name, trials))
    failed = [t for t in report.trials if not t.passed]
    if failed:
        lines += ["", "## Failures", ""]
        for t in failed:
            msg = t.details.get("message", "")
            lines.append(f"- `{t.name}` seed {t.seed}: residual {t.residual:.3e} > {t.threshold:.3e} {msg}".rstrip())
    return "\n".join(lines) + "\n"


def render(report: SuiteReport, fmt: str) -> str:
    if fmt == "json":
        return to_json_text(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "markdown":
        return render_markdown(report)
    raise ValueError(f"unknown format {fmt!r}")


def render_bounds_csv(report: SuiteReport) -> str:
    """Norm-bound rows for every bound check in ``report``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOUNDS_CSV_HEADER)
    for t in report.trials:
        d = t.details
        if "lower" not in d or "upper" not in d:
            continue
        w.writerow([d.get("kind", t.name), t.seed] + [repr(float(d[k])) for k in ("lower", "observed", "upper", "upper_literal")]
                   + [str(bool(d.get("hypothesis_eq3_holds", False))).lower()])
    return buf.getvalue()
