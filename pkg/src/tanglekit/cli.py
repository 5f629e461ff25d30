"""Command-line front end.

Exit codes: 0 all checks pass, 1 a hard violation was found, 2 usage or I/O
error. ``TANGLEKIT_THREADS`` caps the number of worker processes used by
``verify`` and ``sweep``; rows are always written in index order.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .convexroof import ConvexRoofConfig
from .monogamy import CHECKS, FocusAnalysis, Tolerances, exit_status, max_abs_residual
from .qstate import (
    BASIS_CONVENTION,
    FAMILIES,
    MAX_QUBITS,
    SWEEPABLE,
    StateError,
    StateFamily,
    derive_seed,
    haar_random,
    named_state,
    read_state_file,
    state_to_json,
    write_state_file,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "TANGLEKIT_THREADS"
VERIFY_COLUMNS = ("state_id", "seed", "n", "focus", "one_tangle", "verdict", "kind", "lhs", "rhs", "residual", "pass", "conservative", "status")


class UsageError(Exception):
    pass


# -- small parsers ----------------------------------------------------------

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_number(text):
    """Evaluate a real arithmetic expression that may use ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise UsageError(f"not a number: {text!r}")

    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError, OverflowError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise UsageError(f"not a finite number: {text!r}")
    return value


def parse_params(text):
    if text is None or not text.strip():
        return ()
    return tuple(parse_number(t) for t in text.split(","))


def parse_range(text):
    """``start:stop:step`` with inclusive stop; returns the list of values."""
    parts = text.split(":") if text else []
    if len(parts) != 3:
        raise UsageError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (parse_number(p) for p in parts)
    if step == 0:
        raise UsageError("range step must be nonzero")
    span = (stop - start) / step
    if span < -1e-9:
        raise UsageError(f"range {text!r} is empty (step points away from stop)")
    count = int(math.floor(span + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def fmt(value):
    """CSV cell: floats with 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def worker_count():
    cap = os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = min(cap, max(1, int(env)))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
    return cap


def run_indexed(fn, tasks):
    """Map ``fn`` over tasks, results in task order."""
    workers = min(worker_count(), len(tasks))
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


# -- run configuration -----------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str | None = None
    state_file: str | None = None
    n: int | None = None
    focus: int = 1
    samples: int = 100
    seed: int = 0
    tol: float | None = None
    roof_restarts: int | None = None
    roof_ensemble_max: int | None = None
    check: str = "all"
    param: str | None = None
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.samples < 1:
            raise UsageError("--samples must be >= 1")
        if self.n is not None and not 2 <= self.n <= MAX_QUBITS:
            raise UsageError(f"--n must be in 2..{MAX_QUBITS}, got {self.n}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be > 0")
        if self.seed < 0:
            raise UsageError("--seed must be >= 0")

    def roof_config(self, seed=None):
        kw = {"seed": self.seed if seed is None else seed}
        if self.roof_restarts is not None:
            kw["restarts"] = self.roof_restarts
        if self.roof_ensemble_max is not None:
            kw["max_ensemble_size"] = self.roof_ensemble_max
        try:
            return ConvexRoofConfig(**kw)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def tolerances(self):
        if self.tol is None:
            return Tolerances()
        return Tolerances(identity=self.tol, inequality=self.tol, consistency=self.tol)

    @classmethod
    def from_args(cls, args):
        return cls(
            command=args.command,
            family=getattr(args, "family", None),
            state_file=getattr(args, "state_file", None),
            n=getattr(args, "n", None),
            focus=getattr(args, "focus", 1),
            samples=getattr(args, "samples", 100),
            seed=getattr(args, "seed", 0),
            tol=getattr(args, "tol", None),
            roof_restarts=getattr(args, "roof_restarts", None),
            roof_ensemble_max=getattr(args, "roof_ensemble_max", None),
            check=getattr(args, "check", "all"),
            param=getattr(args, "param", None),
            out=getattr(args, "out", None),
            format=getattr(args, "format", "json"),
        )


def _family_state(cfg, params):
    if cfg.family is None:
        raise UsageError("--family is required")
    if cfg.n is None:
        raise UsageError("--n is required with --family")
    if cfg.family == "haar" and not params:
        params = (cfg.seed,)
    return named_state(StateFamily(cfg.family, cfg.n, params))


def _emit(text, out):
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


# -- wide report rows (analyze --format csv, sweep) ----------------------------------


def wide_columns(report):
    cols = ["state_id", "n", "focus", "one_tangle"]
    for p in report.pairs:
        cols += [f"n4_{p.j}", f"n8_{p.j}", f"two_tangle_{p.j}"]
    cols += [f"three_tangle_{t.j}_{t.k}" for t in report.triples]
    cols += ["sum_n4", "x_sum"]
    cols += [f"residual_{v.id}" for v in report.verdicts]
    return cols


def wide_row(state_id, report):
    row = [state_id, report.n_qubits, report.focus, report.one_tangle]
    for p in report.pairs:
        row += [p.invariants.n4, p.invariants.n8, p.invariants.two_tangle]
    row += [t.three_tangle for t in report.triples]
    row += [report.sums.sum_n4, report.sums.x_sum]
    row += [v.residual for v in report.verdicts]
    return row


# -- commands ----------------------------------------------------------------------


def cmd_gen(cfg):
    state = _family_state(cfg, parse_params(cfg.param))
    norm = float(np.linalg.norm(state.amplitudes))
    if cfg.out:
        try:
            write_state_file(state, cfg.out)
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.out}: {exc}") from exc
        print(f"wrote {cfg.out}")
    else:
        sys.stdout.write(json.dumps(state_to_json(state), indent=1) + "\n")
    print(f"norm: {norm:.17g}", file=sys.stderr if not cfg.out else sys.stdout)
    print(f"basis: {BASIS_CONVENTION}", file=sys.stderr if not cfg.out else sys.stdout)
    return EXIT_OK


def _load_state(cfg):
    if (cfg.state_file is None) == (cfg.family is None):
        raise UsageError("give exactly one of a state file or --family")
    if cfg.state_file is not None:
        return read_state_file(cfg.state_file)
    return _family_state(cfg, parse_params(cfg.param))


def cmd_analyze(cfg):
    state = _load_state(cfg)
    analysis = FocusAnalysis(state, cfg.focus, cfg.roof_config(), cfg.tolerances())
    report = analysis.report()
    if cfg.format == "csv":
        _emit(_csv_text(wide_columns(report), [wide_row(0, report)]), cfg.out)
    else:
        _emit(json.dumps(report.to_json(), indent=1) + "\n", cfg.out)
    return exit_status(report.verdicts)


def _verify_task(task):
    cfg, i = task
    seed = derive_seed(cfg.seed, i)
    state = haar_random(cfg.n, seed)
    a = FocusAnalysis(state, cfg.focus, cfg.roof_config(seed), cfg.tolerances())
    verdicts = a.verdicts(cfg.check)
    return seed, a.one_tangle, verdicts


def cmd_verify(cfg):
    if cfg.n is None:
        raise UsageError("--n is required")
    if cfg.check not in CHECKS:
        raise UsageError(f"unknown check {cfg.check!r}; choose from {', '.join(CHECKS)}")
    if cfg.check == "ckw" and cfg.n != 3:
        raise UsageError("the CKW check requires --n 3")
    if cfg.n < 3:
        raise UsageError("verify needs --n >= 3")
    if not 1 <= cfg.focus <= cfg.n:
        raise UsageError(f"--focus must be in 1..{cfg.n}")
    results = run_indexed(_verify_task, [(cfg, i) for i in range(cfg.samples)])
    all_verdicts = [v for _, _, vs in results for v in vs]
    if cfg.format == "json":
        doc = [
            {"state_id": i, "seed": seed, "n": cfg.n, "focus": cfg.focus, "one_tangle": t1, "verdicts": [v.to_json() for v in vs]}
            for i, (seed, t1, vs) in enumerate(results)
        ]
        _emit(json.dumps(doc, indent=1) + "\n", cfg.out)
    else:
        rows = [
            [i, seed, cfg.n, cfg.focus, t1, v.id, v.kind, v.lhs, v.rhs, v.residual, v.passed, v.conservative, v.status]
            for i, (seed, t1, vs) in enumerate(results)
            for v in vs
        ]
        _emit(_csv_text(VERIFY_COLUMNS, rows), cfg.out)
    counts = {s: sum(v.status == s for v in all_verdicts) for s in ("pass", "violation", "inconclusive", "reported")}
    print(
        f"check={cfg.check} n={cfg.n} samples={cfg.samples} max|residual|={max_abs_residual(all_verdicts):.3e} "
        + " ".join(f"{k}={v}" for k, v in counts.items()),
        file=sys.stderr,
    )
    return exit_status(all_verdicts)


def _sweep_task(task):
    cfg, i, value = task
    state = named_state(StateFamily(cfg.family, cfg.n, (value,)))
    a = FocusAnalysis(state, cfg.focus, cfg.roof_config(derive_seed(cfg.seed, i)), cfg.tolerances())
    return a.report()


def cmd_sweep(cfg):
    if cfg.family not in SWEEPABLE:
        raise UsageError(f"sweep needs a one-parameter family: {', '.join(SWEEPABLE)}")
    if cfg.n is None or cfg.n < 3:
        raise UsageError("sweep needs --n >= 3")
    if cfg.param is None:
        raise UsageError("sweep needs --param start:stop:step")
    values = parse_range(cfg.param)
    reports = run_indexed(_sweep_task, [(cfg, i, v) for i, v in enumerate(values)])
    if cfg.format == "json":
        doc = [{"param": v, **r.to_json()} for v, r in zip(values, reports)]
        _emit(json.dumps(doc, indent=1) + "\n", cfg.out)
    else:
        header = ["param"] + wide_columns(reports[0])
        rows = [[v] + wide_row(i, r) for i, (v, r) in enumerate(zip(values, reports))]
        _emit(_csv_text(header, rows), cfg.out)
    return exit_status([v for r in reports for v in r.verdicts])


COMMANDS = {"gen": cmd_gen, "analyze": cmd_analyze, "verify": cmd_verify, "sweep": cmd_sweep}


def build_parser():
    p = argparse.ArgumentParser(prog="tanglekit", description="Entanglement monogamy checks for multiqubit pure states.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default):
        sp.add_argument("--seed", type=int, default=0, help="base seed (haar states, per-sample and roof seeds)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default=fmt_default)

    def analysis(sp):
        sp.add_argument("--focus", type=int, default=1, help="focus qubit (1-based)")
        sp.add_argument("--tol", type=float, help="identity and inequality tolerance override")
        sp.add_argument("--roof-restarts", type=int, help="convex-roof restarts per ensemble size")
        sp.add_argument("--roof-ensemble-max", type=int, help="largest ensemble size tried by the convex roof")

    g = sub.add_parser("gen", help="write a state file")
    g.add_argument("--family", required=True, choices=FAMILIES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--param", help="comma-separated family parameters (expressions may use pi)")
    common(g, "json")

    a = sub.add_parser("analyze", help="full monogamy report of one state")
    a.add_argument("state_file", nargs="?", help="state JSON file")
    a.add_argument("--family", choices=FAMILIES)
    a.add_argument("--n", type=int)
    a.add_argument("--param")
    analysis(a)
    common(a, "json")

    v = sub.add_parser("verify", help="run a check over Haar-random states")
    v.add_argument("--check", default="all", help=f"one of {', '.join(CHECKS)}")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--samples", type=int, default=100)
    analysis(v)
    common(v, "csv")

    s = sub.add_parser("sweep", help="reports along a one-parameter family")
    s.add_argument("--family", required=True, choices=SWEEPABLE)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--param", required=True, help="start:stop:step, stop inclusive")
    analysis(s)
    common(s, "csv")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = RunConfig.from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, StateError, ValueError) as exc:
        print(f"tanglekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
