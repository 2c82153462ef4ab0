"""Command-line front end.

Exit codes: 0 success, 1 an identity or cross-check failed, 2 malformed
input, 3 a physics invariant (measurement completeness) is violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .measurement import COMPLETENESS_TOL, MissingReadoutsError
from .oracle import IDENTITY_TOL, sample_joint, sample_output_error, verify_identities
from .quasiprob import TableTooLargeError, joint_quasiprob, negativity_report
from .scenarios import BUILTINS, FAMILIES, SWEEP_COLUMNS_TAIL, Scenario, builtin, evaluate, sweep
from .serialize import ScenarioError, dump_scenario, load_scenario
from .uncertainty import REPORT_COLUMNS, hall_optimal_readouts, output_error_sq
from .weak import WEAK_TABLE_COLUMNS, weak_table

EXIT_OK = 0
EXIT_IDENTITY = 1
EXIT_INPUT = 2
EXIT_PHYSICS = 3

SEED_ENV = "QUASIREAL_SEED"


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def fmt(x) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def write_output(text: str, path: Optional[str]) -> None:
    """Write to ``path`` atomically (temp file + rename), or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _load(spec: str, tol: float) -> Scenario:
    if spec.startswith("builtin:"):
        try:
            return builtin(spec[len("builtin:"):])
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    return load_scenario(spec, completeness_tol=tol)


def _parse_range(text: str) -> list:
    """``"2..6"`` (inclusive) or ``"2,3,5"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise UsageError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer range {text!r}") from None


def _finite(x):
    return float(x) if x is not None and math.isfinite(x) else None


def cmd_analyze(args) -> int:
    scenario = _load(args.scenario, args.tol)
    source = "file"
    unconstrained = [False] * scenario.model.n_outcomes
    if args.optimal_readouts:
        opt = hall_optimal_readouts(scenario.model, scenario.psi, scenario.A)
        scenario = scenario.with_optimal_readouts()
        source = "hall-optimal"
        unconstrained = [bool(x) for x in opt.unconstrained]
    if not scenario.model.has_readouts:
        raise ScenarioError("/measurement/readouts",
                            "readout values are required (or pass --optimal-readouts)")

    ev = evaluate(scenario)
    routes = ["operator", "weak", "quasiprob"] if args.formulation == "all" else [args.formulation]
    formulations = {
        r: {
            "eps_sq": ev.eps_sq[r],
            "eps": math.sqrt(max(ev.eps_sq[r], 0.0)),
            "eta_sq": ev.eta_sq[r],
            "eta": math.sqrt(max(ev.eta_sq[r], 0.0)),
        }
        for r in routes
    }
    table = weak_table(scenario.model, scenario.psi, scenario.A, scenario.probe)
    try:
        negativity = negativity_report(joint_quasiprob(scenario.model, scenario.psi, scenario.A,
                                                       scenario.probe)).as_dict()
    except TableTooLargeError:
        negativity = None

    xdev_ok = ev.max_xdev < args.tol
    code = EXIT_OK if (args.formulation != "all" or xdev_ok) else EXIT_IDENTITY

    if args.format == "csv":
        header = ["scenario", *REPORT_COLUMNS]
        row = [scenario.name, *ev.report.row()]
        for r in routes:
            header += [f"eps_{r}", f"eta_{r}"]
            row += [formulations[r]["eps"], formulations[r]["eta"]]
        header.append("max_xdev")
        row.append(ev.max_xdev)
        write_output(to_csv(header, [row]), args.output)
        return code

    doc = {
        "scenario": scenario.name,
        "parameters": scenario.parameters,
        "formulation": args.formulation,
        "tolerance": args.tol,
        "readouts": list(scenario.model.readouts),
        "readouts_source": source,
        "unconstrained": unconstrained,
        "completeness_residual": ev.completeness,
        "report": ev.report.as_dict(),
        "formulations": formulations,
        "max_xdev": ev.max_xdev,
        "cross_check_pass": xdev_ok,
        "cells": [
            {k: (_finite(v) if isinstance(v, float) else v) for k, v in zip(WEAK_TABLE_COLUMNS, row)}
            for row in table.rows()
        ],
        "negativity": negativity,
    }
    write_output(to_json(doc), args.output)
    return code


_ALIASES = {"\u03c6": "phi"}


def _parse_param(text: str, default_name: str):
    """``NAME=start:stop:steps`` or bare ``start:stop:steps``."""
    name, spec = text.split("=", 1) if "=" in text else (default_name, text)
    name = _ALIASES.get(name.strip(), name.strip())
    try:
        start, stop, steps = spec.split(":")
        start, stop, steps = float(start), float(stop), int(steps)
    except ValueError:
        raise UsageError(f"--param must look like NAME=start:stop:steps, got {text!r}") from None
    if steps < 1:
        raise UsageError(f"steps must be >= 1, got {steps}")
    if stop < start:
        raise UsageError(f"reversed range {start} > {stop}")
    return name, start, stop, steps


def cmd_sweep(args) -> int:
    if args.family not in FAMILIES:
        raise UsageError(f"unknown family {args.family!r}; available families: {', '.join(FAMILIES)}")
    pname = FAMILIES[args.family][0]
    if args.param is None:
        raise UsageError(f"--param {pname}=start:stop:steps is required")
    name, start, stop, steps = _parse_param(args.param, pname)
    if name != pname:
        raise UsageError(f"family {args.family!r} sweeps {pname!r}, not {name!r}")
    grid = [start] if steps == 1 else list(np.linspace(start, stop, steps))
    rows = sweep(args.family, grid)
    write_output(to_csv([pname, *SWEEP_COLUMNS_TAIL], [r.row() for r in rows]), args.output)
    worst = max((r.evaluation.max_xdev for r in rows), default=0.0)
    return EXIT_OK if worst < args.tol else EXIT_IDENTITY


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    report = verify_identities(_parse_range(args.dims), _parse_range(args.kraus), args.trials, seed,
                               tol=args.tol, self_test_fail=args.self_test_fail)
    doc = report.as_dict()
    write_output(to_json(doc), args.output)
    return EXIT_OK if report.passed else EXIT_IDENTITY


def cmd_sample(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    seed = args.seed if args.seed is not None else _default_seed()
    scenario = _load(args.scenario, args.tol)
    rep = sample_joint(scenario.model, scenario.psi, scenario.probe, args.n, seed)
    doc = {"scenario": scenario.name, "tolerance": args.tol, "joint": rep.as_dict()}
    if scenario.model.has_readouts:
        est = sample_output_error(scenario.model, scenario.psi, scenario.A, args.n, seed)
        exact = output_error_sq(scenario.model, scenario.psi, scenario.A)
        z = (est.mean - exact) / est.stderr if est.stderr > 0 else (0.0 if est.mean == exact else None)
        doc["output_error"] = {"estimate": est.mean, "stderr": est.stderr, "analytic": exact, "z": z}
    else:
        doc["output_error"] = None
    write_output(to_json(doc), args.output)
    return EXIT_OK


def cmd_export(args) -> int:
    try:
        scenario = builtin(args.name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    write_output(dump_scenario(scenario) + "\n", args.output)
    return EXIT_OK


def _table(header, rows) -> str:
    cells = [[fmt(x) for x in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)


def render_report(doc, title: str = "") -> str:
    """Aligned text rendering of a JSON report: scalars as key/value rows, lists of objects as tables."""
    blocks = []
    scalars = []
    for key, value in doc.items():
        name = f"{title}.{key}" if title else key
        if isinstance(value, dict):
            blocks.append(render_report(value, name))
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            header = list(dict.fromkeys(k for v in value for k in v))
            rows = [[_cell(v.get(k)) for k in header] for v in value]
            blocks.append(f"[{name}]\n" + _table(header, rows))
        else:
            scalars.append((key, _cell(value)))
    out = []
    if scalars:
        out.append((f"[{title}]\n" if title else "") + _table(["field", "value"], scalars))
    out.extend(b for b in blocks if b)
    return "\n\n".join(out)


def _cell(v):
    if isinstance(v, list):
        return json.dumps(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return v


def cmd_report(args) -> int:
    try:
        with open(args.path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report {args.path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("report must be a JSON object")
    write_output(render_report(doc) + "\n", args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasireal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=IDENTITY_TOL):
        p.add_argument("--output", "-o", default=None, help="write here instead of stdout")
        p.add_argument("--tol", type=float, default=tol, help=f"tolerance (default {tol:g})")

    p = sub.add_parser("analyze", help="uncertainty report for a scenario file")
    p.add_argument("scenario", help="scenario JSON path, or builtin:NAME")
    p.add_argument("--formulation", choices=["operator", "weak", "quasiprob", "all"], default="all")
    p.add_argument("--optimal-readouts", action="store_true", help="replace readouts by Hall-optimal values")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="CSV sweep of a scenario family")
    p.add_argument("family", help=f"one of: {', '.join(FAMILIES)}")
    p.add_argument("--param", help="NAME=start:stop:steps, inclusive grid")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="randomized cross-formulation identity suite")
    p.add_argument("--dims", default="2..6")
    p.add_argument("--kraus", default="1..5")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--self-test-fail", action="store_true", help="include a deliberately corrupted fixture")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="Monte-Carlo check of joint probabilities and output error")
    p.add_argument("scenario", help="scenario JSON path, or builtin:NAME")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    common(p, COMPLETENESS_TOL)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("report", help="pretty-print a JSON report")
    p.add_argument("path")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export", help="write a built-in scenario as a JSON file")
    p.add_argument("name", help=f"one of: {', '.join(BUILTINS)}")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (UsageError, MissingReadoutsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
