"""Worked-example corpus runner.

Each case file names a CLI subcommand, a config document, flag overrides,
and a list of expected result fields with tolerances. Every expectation
carries a provenance tag: "trivial" for values that follow immediately from
definitions, "derived" for values produced by the oracle routines. Derived
values are refreshed only by scripts/regen_expected.py, never by hand.

Run as a module:  python -m macfb.examples --cases cases --out /tmp/corpus
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import cli
from ._io import atomic_write_text
from .errors import ValidationError

_PROVENANCE = ("trivial", "derived")


@dataclass
class Expectation:
    field: str
    value: object
    tol: float
    provenance: str


@dataclass
class ExampleCase:
    label: str
    command: str
    config: str  # path relative to the case file's directory
    flags: dict
    expects: list
    exit_code: int = 0
    path: Path = None


@dataclass
class CaseOutcome:
    case: str
    field: str
    expected: object
    actual: object
    diff: float
    ok: bool
    provenance: str


@dataclass
class ExamplesReport:
    outcomes: list
    stdouts: dict  # case label -> captured CLI stdout
    out_dir: Path
    rendered: str = ""

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes)

    @property
    def n_pass(self) -> int:
        return sum(1 for o in self.outcomes if o.ok)

    @property
    def n_fail(self) -> int:
        return sum(1 for o in self.outcomes if not o.ok)


def _case_from(doc: dict, path: Path) -> ExampleCase:
    for key in ("label", "command", "config", "expect"):
        if key not in doc:
            raise ValidationError(f"{path.name}:{key}", "missing case key")
    expects = []
    for raw in doc["expect"]:
        prov = raw.get("provenance")
        if prov not in _PROVENANCE:
            raise ValidationError(
                f"{path.name}:expect.provenance", f"must be one of {_PROVENANCE}"
            )
        expects.append(
            Expectation(raw["field"], raw["value"], float(raw.get("tol", 0.0)), prov)
        )
    return ExampleCase(
        label=doc["label"],
        command=doc["command"],
        config=doc["config"],
        flags=doc.get("flags") or {},
        expects=expects,
        exit_code=int(doc.get("exit_code", 0)),
        path=path,
    )


def load_cases(cases_dir) -> list:
    cases_dir = Path(cases_dir)
    cases = []
    for path in sorted(cases_dir.glob("*.yaml")):
        doc = yaml.safe_load(path.read_text())
        cases.append(_case_from(doc, path))
    if not cases:
        raise ValidationError(str(cases_dir), "no case files found")
    return cases


def case_argv(case: ExampleCase, cases_dir: Path, out_prefix: Path) -> list:
    argv = [case.command, "--config", str(cases_dir / case.config)]
    for key in sorted(case.flags):
        val = case.flags[key]
        if val is True:
            argv.append(f"--{key}")
        elif val is False or val is None:
            continue
        else:
            argv.extend([f"--{key}", str(val)])
    argv.extend(["--out", str(out_prefix)])
    return argv


def _lookup(doc, dotted: str):
    node = doc
    for token in dotted.split("."):
        if isinstance(node, list):
            node = node[int(token)]
        elif isinstance(node, dict):
            if token not in node:
                raise KeyError(dotted)
            node = node[token]
        else:
            raise KeyError(dotted)
    return node


def _compare(expected, actual, tol: float):
    """Return (max numeric deviation or None, ok)."""
    if isinstance(expected, bool) or isinstance(actual, bool):
        return None, expected == actual
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        diff = abs(float(expected) - float(actual))
        return diff, diff <= tol
    if isinstance(expected, (list, tuple)) and isinstance(actual, (list, tuple)):
        if len(expected) != len(actual):
            return None, False
        worst = 0.0
        ok = True
        for e, a in zip(expected, actual):
            d, good = _compare(e, a, tol)
            ok = ok and good
            if d is not None:
                worst = max(worst, d)
        return worst, ok
    return None, expected == actual


def run_case(case: ExampleCase, cases_dir: Path, out_dir: Path):
    """Execute one case through the CLI; returns (outcomes, stdout text)."""
    out_prefix = out_dir / case.label
    argv = case_argv(case, cases_dir, out_prefix)
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv)
    text = buf.getvalue()
    outcomes = []
    if code != case.exit_code:
        outcomes.append(
            CaseOutcome(case.label, "<exit_code>", case.exit_code, code, None, False, "trivial")
        )
        return outcomes, text
    doc = json.loads(text)
    for exp in case.expects:
        try:
            actual = _lookup(doc, exp.field)
        except (KeyError, IndexError, ValueError):
            outcomes.append(
                CaseOutcome(case.label, exp.field, exp.value, "<missing>", None, False,
                            exp.provenance)
            )
            continue
        diff, ok = _compare(exp.value, actual, exp.tol)
        outcomes.append(
            CaseOutcome(case.label, exp.field, exp.value, actual, diff, ok, exp.provenance)
        )
    return outcomes, text


def _render_table(outcomes: list) -> str:
    headers = ("case", "field", "expected", "actual", "diff", "status")
    rows = [
        (
            o.case,
            o.field,
            _short(o.expected),
            _short(o.actual),
            "-" if o.diff is None else f"{o.diff:.3g}",
            "pass" if o.ok else "FAIL",
        )
        for o in outcomes
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    lines.extend(fmt.format(*row) for row in rows)
    n_fail = sum(1 for o in outcomes if not o.ok)
    lines.append("")
    lines.append(f"{len(outcomes) - n_fail} passed, {n_fail} failed")
    return "\n".join(lines) + "\n"


def _short(value) -> str:
    text = repr(value)
    return text if len(text) <= 40 else text[:37] + "..."


def _render_csv(outcomes: list) -> str:
    lines = ["case,field,expected,actual,abs_diff,status,provenance"]
    for o in outcomes:
        diff = "" if o.diff is None else f"{o.diff:.17g}"
        status = "pass" if o.ok else "fail"
        lines.append(
            f"{o.case},{o.field},{_csv_cell(o.expected)},{_csv_cell(o.actual)},"
            f"{diff},{status},{o.provenance}"
        )
    return "\n".join(lines) + "\n"


def _csv_cell(value) -> str:
    text = f"{value:.17g}" if isinstance(value, float) else str(value)
    return '"' + text.replace('"', '""') + '"' if ("," in text or '"' in text) else text


def run_examples(cases_dir, out_dir, report_prefix=None) -> ExamplesReport:
    """Run every case sequentially; optionally write the two report files."""
    cases_dir = Path(cases_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outcomes = []
    stdouts = {}
    for case in load_cases(cases_dir):
        case_outcomes, text = run_case(case, cases_dir, out_dir)
        outcomes.extend(case_outcomes)
        stdouts[case.label] = text
    report = ExamplesReport(outcomes, stdouts, out_dir, _render_table(outcomes))
    if report_prefix is not None:
        atomic_write_text(f"{report_prefix}.txt", report.rendered)
        atomic_write_text(f"{report_prefix}.csv", _render_csv(outcomes))
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m macfb.examples", description=__doc__)
    parser.add_argument("--cases", default="cases", help="directory of case files")
    parser.add_argument("--out", required=True, help="directory for case outputs")
    parser.add_argument("--report", default=None, help="report file prefix")
    args = parser.parse_args(argv)
    report = run_examples(args.cases, args.out, args.report)
    print(report.rendered, end="")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
