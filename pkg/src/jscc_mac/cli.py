"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import bounds, engine, oracle
from .classexp import RhoGammaError
from .gallager import ERROR_TYPES, ErrorType
from .model import ModelError, SystemModel, parse_model, validate
from .paperex import FIXTURE_NAME, build_paper_model

EXIT_INPUT = 2
EXIT_NUMERIC = 3

log = logging.getLogger("jscc_mac")

_TAU_NAMES = {"1": ErrorType.USER1, "2": ErrorType.USER2, "both": ErrorType.BOTH, "12": ErrorType.BOTH}


class InputError(Exception):
    pass


class NumericalFailure(Exception):
    pass


def load_model(spec: str) -> SystemModel:
    if spec == FIXTURE_NAME:
        return build_paper_model()
    path = Path(spec)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read model file {path}: {exc.strerror or exc}") from exc
    try:
        return parse_model(text, name=path.stem)
    except ModelError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _scale(args) -> float:
    return 1.0 / math.log(2.0) if args.bits else 1.0


def _fmt4(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return f"{v:.4f}"


def _fmt9(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.9g}"


def _gamma(args, model: SystemModel):
    if args.gamma is not None:
        g = tuple(args.gamma)
        if not all(0.0 <= x <= 1.0 for x in g):
            raise InputError(f"--gamma values must lie in [0, 1], got {g[0]} {g[1]}")
        return g
    return model.policy.gamma


def cmd_exponent(args, model: SystemModel, out) -> None:
    report = engine.achievable_exponent(model, _gamma(args, model), args.tol, args.hull_grid)
    k = _scale(args)
    unit = "bits" if args.bits else "nats"
    g1, g2 = report.gamma_star
    print(f"model: {model.name or '-'}", file=out)
    print(f"exponent ({unit}): {report.exponent * k:.6f}", file=out)
    print(f"gamma1: {g1:.6f}", file=out)
    print(f"gamma2: {g2:.6f}", file=out)
    i1, i2 = report.lower_assignment
    print(f"lower bound ({unit}): {report.lower * k:.6f} at (Q1,{i1}, Q2,{i2})", file=out)
    print(f"upper bound ({unit}): {report.upper * k:.6f}", file=out)
    print(f"gain over lower bound: {100 * report.gain_over_lower:.3f}%", file=out)


def cmd_bounds(args, model: SystemModel, out) -> None:
    k = _scale(args)
    lower, (i1, i2), _ = bounds.lower_bound(model)
    upper, cells = bounds.upper_bound(model, args.hull_grid or bounds.HULL_POINTS)
    print(f"lower: {lower * k:.6f} at (Q1,{i1}, Q2,{i2})", file=out)
    for c in cells:
        print(f"upper {c.tau.value}: {c.value * k:.6f} (rho {c.rho_star:.6f})", file=out)
    print(f"upper: {upper * k:.6f}", file=out)


def cmd_thresholds(args, model: SystemModel, out) -> None:
    t0 = time.perf_counter()
    gamma, trace = engine.solve_thresholds(model, args.tol)
    r1, r2 = engine.equalization_residuals(gamma, model)
    print(f"gamma1: {gamma[0]:.6f}", file=out)
    print(f"gamma2: {gamma[1]:.6f}", file=out)
    print(f"d: {engine.d_value(gamma, model) * _scale(args):.6f}", file=out)
    print(f"residuals: {r1:.3e} {r2:.3e}", file=out)
    print(f"grid check: d={trace.grid_value * _scale(args):.6f} at "
          f"({trace.grid_gamma[0]:.6f}, {trace.grid_gamma[1]:.6f}), grid won: {trace.grid_won}", file=out)
    for rule in trace.endpoint_rules:
        print(f"endpoint rule: {rule[0]} at ({rule[1]:.6f}, {rule[2]:.6f})", file=out)
    log.info("thresholds solved in %.2f s", time.perf_counter() - t0)


def _table_rows(cells, k: float) -> list[str]:
    header = "tau,(1;1),(2;1),(1;2),(2;2)"
    rows = [header]
    for r, tau in enumerate(ERROR_TYPES):
        vals = [_fmt4(c.value * k) for c in cells[4 * r:4 * r + 4]]
        rows.append(",".join([tau.value.replace(",", ";")] + vals))
    return rows


def cmd_tables(args, model: SystemModel, out) -> None:
    k = _scale(args)
    gamma = _gamma(args, model)
    if gamma is None:
        gamma, _ = engine.solve_thresholds(model, args.tol)
    cells = engine.all_cells(gamma, model)
    print(f"# F at gamma = ({gamma[0]:.4f}, {gamma[1]:.4f})", file=out)
    print("\n".join(_table_rows(cells, k)), file=out)
    _, _, lower_cells = bounds.lower_bound(model)
    print("# F^L", file=out)
    print("\n".join(_table_rows(lower_cells, k)), file=out)
    _, upper_cells = bounds.upper_bound(model, args.hull_grid or bounds.HULL_POINTS)
    print("# F^U", file=out)
    print(",".join(c.tau.value.replace(",", ";") for c in upper_cells), file=out)
    print(",".join(_fmt4(c.value * k) for c in upper_cells), file=out)


def _d_rows(model: SystemModel, g1s, g2s):
    return engine.d_grid(model, g1s, g2s)


def cmd_sweep(args, model: SystemModel, out) -> None:
    k = _scale(args)
    if args.rho:
        tau = _TAU_NAMES.get(args.tau.lower()) if args.tau else None
        if tau is None:
            raise InputError(f"--rho needs --tau 1, 2 or both, got {args.tau!r}")
        i1, i2 = args.classes or (1, 1)
        if i1 not in (1, 2) or i2 not in (1, 2):
            raise InputError(f"--classes must be 1 or 2, got {i1} {i2}")
        gamma = _gamma(args, model)
        if gamma is None:
            raise InputError("--rho needs --gamma G1 G2 (or thresholds in the model)")
        n = args.grid or engine.GUARD_POINTS
        rho = np.linspace(0.0, 1.0, n)
        objective = engine.cell_objective(tau, i1, i2, gamma, model)
        vals = np.full(n, math.inf) if objective is None else objective(rho)
        print("rho,objective", file=out)
        for r, v in zip(rho, vals):
            print(f"{_fmt9(r)},{_fmt9(v * k)}", file=out)
        return
    n = args.grid or 64
    if n < 2:
        raise InputError(f"--grid must be at least 2, got {n}")
    gs = np.linspace(0.0, 1.0, n)
    if args.jobs > 1:
        chunks = np.array_split(gs, args.jobs)
        with ProcessPoolExecutor(args.jobs) as pool:
            parts = list(pool.map(_d_rows, [model] * len(chunks), chunks, [gs] * len(chunks)))
        d = np.vstack(parts)
    else:
        d = engine.d_grid(model, gs, gs)
    print("gamma1,gamma2,d", file=out)
    for j, g1 in enumerate(gs):
        for l, g2 in enumerate(gs):
            print(f"{_fmt9(g1)},{_fmt9(g2)},{_fmt9(d[j, l] * k)}", file=out)


def cmd_verify(args, model: SystemModel, out) -> None:
    """Audit the fast paths against the brute-force oracles."""
    failures = 0
    gamma = _gamma(args, model)
    if gamma is None:
        gamma, _ = engine.solve_thresholds(model, args.tol)
    n_rho = args.grid or 10_000
    for tau in ERROR_TYPES:
        for i1, i2 in engine.CLASS_PAIRS:
            fast = engine.big_f(tau, i1, i2, gamma, model).value
            ref = oracle.big_f_ref(model, tau, i1, i2, gamma, n_rho)
            ok = (fast == ref == math.inf) or abs(fast - ref) <= 1e-6
            failures += not ok
            print(f"cell {tau.value} ({i1},{i2}): golden={_fmt9(fast)} grid={_fmt9(ref)} "
                  f"{'ok' if ok else 'MISMATCH'}", file=out)
    e = engine.d_value(gamma, model)
    d, arg = oracle.gamma_sweep(model, 128)
    ok = e >= d.max() - 1e-6
    failures += not ok
    print(f"solver d={_fmt9(e)} vs 128x128 sweep max={_fmt9(float(d.max()))} at "
          f"({arg[0]:.6f}, {arg[1]:.6f}) {'ok' if ok else 'MISMATCH'}", file=out)
    if failures:
        raise NumericalFailure(f"{failures} oracle check(s) failed")


def cmd_validate(args, model: SystemModel, out) -> None:
    problems = validate(model)
    if problems:
        raise InputError("; ".join(problems))
    print(f"ok: {model.name or '-'} ({model.channel.n1}x{model.channel.n2} inputs, "
          f"{model.channel.ny} outputs)", file=out)


COMMANDS = {
    "exponent": cmd_exponent,
    "bounds": cmd_bounds,
    "thresholds": cmd_thresholds,
    "tables": cmd_tables,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model_pos", nargs="?", metavar="MODEL",
                        help=f"model file or the built-in fixture name {FIXTURE_NAME!r}")
    common.add_argument("--model", dest="model_opt", metavar="PATH|FIXTURE")
    common.add_argument("--gamma", nargs=2, type=float, metavar=("G1", "G2"))
    common.add_argument("--grid", type=int)
    common.add_argument("--hull-grid", type=int)
    common.add_argument("--tol", type=float, default=engine.GAMMA_TOL)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--bits", action="store_true", help="report exponents in bits")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="jscc-mac", description="Error exponents for joint source-channel coding over a two-user MAC.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=(fn.__doc__ or "").strip().split("\n")[0] or None)
        if name == "sweep":
            p.add_argument("--rho", action="store_true", help="sweep rho for one cell instead of the gamma grid")
            p.add_argument("--tau", help="error type for --rho: 1, 2 or both")
            p.add_argument("--classes", nargs=2, type=int, metavar=("I1", "I2"))
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    spec = args.model_opt or args.model_pos or FIXTURE_NAME
    try:
        if args.tol <= 0 or args.jobs < 1:
            raise InputError("--tol must be positive and --jobs at least 1")
        if args.hull_grid is not None and args.hull_grid < 2:
            raise InputError(f"--hull-grid must be at least 2, got {args.hull_grid}")
        model = load_model(spec)
        COMMANDS[args.command](args, model, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, RhoGammaError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
    return 0
