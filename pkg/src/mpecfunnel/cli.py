"""Command-line front end.

Subcommands::

    solve     --problem <name|path> [--x0 v1,v2,...] [--config path] [--trace path] [--result path]
    check     --problem <name|path> --point v1,... [--multipliers path]
    gradcheck --problem <name|path> --point v1,...

Exit codes: 0 success (S-stationary / all checks pass), 1 weaker
stationarity or a failed check, 2 iteration limit, 3 restoration failure,
4 input error, 5 degenerate complementarity gradient.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .config import SolverConfig, load_config
from .errors import MpecError
from .funnel import TRACE_FIELDS, SolveResult, Status, StepKind, TraceRecord, solve
from .measures import infeasibility
from .model import MpecProblem, check_gradients, evaluate
from .problems import load_quadratic_mpec, registry_get, registry_names
from .stationarity import (MpecMultipliers, StationarityLevel, Tolerances, classify, estimate_multipliers,
                           mfcq_diagnostic)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 1
EXIT_MAX_ITER = 2
EXIT_RESTORATION = 3
EXIT_INPUT = 4
EXIT_DEGENERATE = 5

STATUS_EXIT = {
    Status.SStationaryPoint: EXIT_OK,
    Status.WeakerStationaryPoint: EXIT_NOT_CERTIFIED,
    Status.MaxIterations: EXIT_MAX_ITER,
    Status.RestorationFailure: EXIT_RESTORATION,
    Status.Degenerate: EXIT_DEGENERATE,
}


class InputError(MpecError):
    """Bad command-line input; maps to exit code 4."""


@dataclass
class RunRequest:
    problem: str
    x0: str | None = None
    config: str | None = None
    trace: str | None = None
    result: str | None = None
    point: str | None = None
    multipliers: str | None = None
    verbosity: int = 0
    timing: bool = True


def parse_vector(text, label="vector"):
    """Parse ``"v1,v2,..."`` into a float array."""
    try:
        values = [float(tok) for tok in text.split(",")]
    except (AttributeError, ValueError):
        raise InputError(f"malformed {label} {text!r}: expected comma-separated numbers") from None
    arr = np.array(values)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"malformed {label} {text!r}: entries must be finite")
    return arr


def _read(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {what} {path!r}: {exc.strerror}") from None


def load_problem(source) -> MpecProblem:
    """Registry name, or a path to a quadratic-MPEC document."""
    if source in registry_names():
        return registry_get(source)
    if os.path.isfile(source):
        return load_quadratic_mpec(_read(source, "problem file"), name=os.path.basename(source))
    raise InputError(f"unknown problem {source!r}: not a registry name "
                     f"({', '.join(registry_names())}) or a readable file")


def _point(text, problem, label):
    x = parse_vector(text, label)
    if x.shape[0] != problem.n:
        raise InputError(f"{label} has {x.shape[0]} entries, problem has n={problem.n}")
    return x


def _fmt(value):
    if isinstance(value, StepKind):
        return value.value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return "%.17g" % value


def emit_trace(records, path_or_file):
    """Write trace records as CSV with 17-significant-digit floats."""
    if hasattr(path_or_file, "write"):
        _write_trace(records, path_or_file)
        return
    with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
        _write_trace(records, fh)


def _write_trace(records, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_FIELDS)
    for rec in records:
        writer.writerow([_fmt(v) for v in rec.row()])


def read_trace(path_or_text):
    """Parse a trace file back into ``TraceRecord`` objects."""
    if "\n" in path_or_text or not os.path.exists(path_or_text):
        fh = io.StringIO(path_or_text)
    else:
        with open(path_or_text, encoding="utf-8") as f:
            fh = io.StringIO(f.read())
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != TRACE_FIELDS:
        raise InputError("trace header does not match the expected columns")
    out = []
    for row in reader:
        vals = {}
        for name in TRACE_FIELDS:
            if name in ("k", "qp_iters"):
                vals[name] = int(row[name])
            elif name == "kind":
                vals[name] = StepKind(row[name])
            else:
                vals[name] = float(row[name])
        out.append(TraceRecord(**vals))
    return out


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def result_document(problem, result: SolveResult, timing=True) -> dict:
    mult = result.multipliers.to_dict() if result.multipliers is not None else None
    return {
        "problem": problem.name,
        "status": result.status.value,
        "message": result.message,
        "x": [float(v) for v in result.x_final],
        "f": _json_float(result.f_final),
        "theta": _json_float(result.theta_final),
        "multipliers": mult,
        "class": result.stationarity.level.name if result.stationarity is not None else None,
        "stationarity_residual": (_json_float(result.stationarity.kkt_residual)
                                  if result.stationarity is not None else None),
        "iterations": result.iterations,
        "wall_time": result.wall_time if timing else None,
    }


def run_solve(request: RunRequest, out=sys.stdout) -> int:
    problem = load_problem(request.problem)
    cfg = load_config(_read(request.config, "config file")) if request.config else SolverConfig()
    x0 = _point(request.x0, problem, "x0") if request.x0 else None
    if x0 is None and problem.info.get("x0") is None:
        raise InputError(f"problem {problem.name!r} has no default starting point; pass --x0")
    result = solve(problem, x0, cfg)
    if request.trace:
        emit_trace(result.trace, request.trace)
    doc = result_document(problem, result, timing=request.timing)
    if request.result:
        with open(request.result, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"{problem.name}: {result.status.value} after {result.iterations} iterations", file=out)
    print(f"  x = {np.array2string(result.x_final, precision=10)}", file=out)
    print(f"  f = {result.f_final:.12g}  theta = {result.theta_final:.3e}", file=out)
    if result.stationarity is not None:
        print(f"  {result.stationarity}", file=out)
    if result.status is not Status.SStationaryPoint:
        print(f"  {result.message}", file=out)
    return STATUS_EXIT[result.status]


def run_check(request: RunRequest, out=sys.stdout) -> int:
    problem = load_problem(request.problem)
    if not request.point:
        raise InputError("check needs --point")
    x = _point(request.point, problem, "point")
    ev = evaluate(problem, x)
    grad = check_gradients(problem, x)
    if request.multipliers:
        mult = MpecMultipliers.from_json(_read(request.multipliers, "multiplier file"),
                                         problem.m, problem.p, problem.q)
        origin = "from file"
    else:
        mult = estimate_multipliers(ev)
        origin = "least-squares estimate"
    cls = classify(ev, mult, Tolerances())
    mfcq = mfcq_diagnostic(ev)
    print(f"{problem.name} at {np.array2string(x, precision=10)} (theta={infeasibility(ev).theta:.3e})", file=out)
    print(str(grad), file=out)
    print(f"multipliers ({origin}): {json.dumps(mult.to_dict())}", file=out)
    print(str(cls), file=out)
    print(str(mfcq), file=out)
    ok = grad.passed and cls.level is StationarityLevel.SStationary and mfcq.holds
    return EXIT_OK if ok else EXIT_NOT_CERTIFIED


def run_gradcheck(request: RunRequest, out=sys.stdout) -> int:
    problem = load_problem(request.problem)
    if not request.point:
        raise InputError("gradcheck needs --point")
    report = check_gradients(problem, _point(request.point, problem, "point"))
    print(str(report), file=out)
    return EXIT_OK if report.passed else EXIT_NOT_CERTIFIED


def build_parser():
    parser = argparse.ArgumentParser(prog="mpecfunnel", description="Trust-funnel SQP solver for MPECs.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem")
    p.add_argument("--problem", required=True, help="registry name or quadratic-MPEC JSON file")
    p.add_argument("--x0", help="starting point v1,v2,...")
    p.add_argument("--config", help="JSON file of solver parameters")
    p.add_argument("--trace", help="write the iteration trace (CSV) here")
    p.add_argument("--result", help="write the result (JSON) here")
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="store wall_time as null so result files are reproducible")

    p = sub.add_parser("check", help="verify derivatives, stationarity class and MPEC-MFCQ at a point")
    p.add_argument("--problem", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--multipliers", help="JSON file with lambda, mu, nu_hat, xi_hat")

    p = sub.add_parser("gradcheck", help="finite-difference derivative check at a point")
    p.add_argument("--problem", required=True)
    p.add_argument("--point", required=True)
    return parser


COMMANDS = {"solve": run_solve, "check": run_check, "gradcheck": run_gradcheck}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    fields = {k: v for k, v in vars(args).items() if k in RunRequest.__dataclass_fields__}
    request = RunRequest(verbosity=args.verbose, **fields)
    try:
        return COMMANDS[args.command](request, out=out)
    except (MpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
