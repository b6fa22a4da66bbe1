"""Command-line front end: validate, landmarks, solve, menu.

Exit codes: 0 success, 1 computational or assumption failure, 2 usage or
configuration error. The thread count of ``menu`` can be overridden with the
RDU_INSURANCE_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import RunConfig, load_config, validate_config
from .errors import ConfigError, RduInsuranceError
from .landmarks import rdu_landmarks
from .loss_model import LossModel, Shape, k_of
from .numerics import Tolerance
from .oracle import check_optimality, oracle_solve
from .preferences import ARAClass
from .rdu import contract_objective, solve
from .solution import Solution
from .yaari import pi_c

THREADS_ENV = "RDU_INSURANCE_THREADS"
CURVE_COLUMNS = ("x", "indemnity", "retention", "quantile_z")
MENU_COLUMNS = ("premium", "status", "regime", "boundary", "lower", "upper", "x_lo", "x_hi",
                "expected_indemnity", "lambda_star", "objective", "certainty_equivalent", "message")


@dataclass
class ContractCurve:
    x: np.ndarray
    indemnity: np.ndarray
    retention: np.ndarray
    quantile_z: np.ndarray
    metadata: dict = field(default_factory=dict)

    def rows(self):
        return zip(self.x, self.indemnity, self.retention, self.quantile_z)


def contract_curve(solution: Solution, loss: LossModel, samples: int = 501) -> ContractCurve:
    """Uniform grid on [0, M] merged with the contract's exact kinks."""
    if samples < 2:
        raise ConfigError("--samples must be at least 2")
    x_lo, x_hi = solution.contract.breakpoints(loss)
    x = np.unique(np.concatenate([np.linspace(0.0, loss.M, samples), [x_lo, x_hi]]))
    x = x[(x >= 0.0) & (x <= loss.M)]
    ret = solution.contract.retention(x, loss)
    return ContractCurve(x, x - ret, ret, loss.cdf(x), solution_metadata(solution, loss))


def _num(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v + 0.0:.12g}"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


def solution_metadata(solution: Solution, loss: LossModel) -> dict:
    cert = solution.landmarks
    return {
        "tool": "rdu-insurance",
        "version": __version__,
        "method": solution.method,
        "regime": solution.regime,
        "boundary": solution.boundary,
        "contract": solution.contract.describe(loss),
        "premium": solution.problem.pi,
        "thresholds": dict(solution.thresholds),
        "lambda_star": solution.lambda_star,
        "residuals": dict(solution.residuals),
        "diagnostics": dict(solution.diagnostics),
        "landmarks": {"a": cert.a, "b": cert.b, "c": cert.c, "lambda_hat": cert.lambda_hat},
    }


def curve_csv(curve: ContractCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for row in curve.rows():
        writer.writerow([_num(v) for v in row])
    return buf.getvalue()


def curve_json(curve: ContractCurve, extra: dict | None = None) -> str:
    doc = dict(curve.metadata)
    if extra:
        doc.update(extra)
    doc["samples"] = [dict(zip(CURVE_COLUMNS, map(float, row))) for row in curve.rows()]
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _summary(lines: list[str], out: str | None) -> None:
    stream = sys.stdout if out is not None else sys.stderr
    for line in lines:
        print(line, file=stream)


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "tol", None) is not None:
        if not (args.tol > 0 and math.isfinite(args.tol)):
            raise ConfigError("--tol must be a positive number")
        cfg = cfg.with_tolerance(Tolerance(args.tol, cfg.tol.rel_tol, cfg.tol.max_iter))
    return cfg


def cmd_validate(args) -> int:
    cfg = _config(args)
    report = validate_config(cfg)
    for line in report.lines():
        print(line)
    print("all assumptions hold" if report.passed else f"{len(report.failures())} clause(s) failed")
    return 0 if report.passed else 1


def landmark_values(cfg: RunConfig) -> dict:
    """Weighting landmarks plus the regime thresholds relevant to the utility class."""
    from .landmarks import compute_landmarks

    cert = compute_landmarks(cfg.weighting, cfg.tol)
    out = {"a": cert.a, "b": cert.b, "c": cert.c, "lambda_hat": cert.lambda_hat}
    premiums = cfg.premiums()
    if cfg.utility.is_identity:
        out["pi_c"] = pi_c(cfg.weighting, cfg.loss, cfg.rho, cfg.tol)
        out["K_c"] = cfg.loss.mean if cert.c >= 1.0 else k_of(cert.c, cfg.loss)
    elif premiums:
        problem = cfg.problem(premiums[0])
        rl = rdu_landmarks(problem, cfg.utility, cfg.weighting, cfg.loss, cfg.tol)
        if cfg.utility.ara_class is ARAClass.CONSTANT:
            out.update({"l_Delta": rl.l_Delta, "K_Delta": rl.K_Delta,
                        "pi_hat": problem.premium_for(rl.K_Delta)})
        else:
            out.update({"l_Delta_a": rl.l_Delta_a, "l_Delta_c": rl.l_Delta_c,
                        "Delta_tilde": rl.Delta_tilde, "Delta_bar": rl.Delta_bar,
                        "pi_tilde": problem.premium_for(rl.Delta_tilde),
                        "pi_bar": problem.premium_for(rl.Delta_bar)})
    return out


def cmd_landmarks(args) -> int:
    cfg = _config(args)
    values = landmark_values(cfg)
    if args.format == "json":
        _write(json.dumps(_jsonable(values), indent=2) + "\n", args.out)
    else:
        _write("".join(f"{k} = {_num(v)}\n" for k, v in values.items()), args.out)
    return 0


def oracle_section(cfg: RunConfig, solution: Solution, n: int) -> dict:
    problem = solution.problem
    u, w, loss = cfg.utility, cfg.weighting, cfg.loss
    report = check_optimality(problem, u, w, loss, solution.contract, cfg.tol)
    oracle = oracle_solve(problem, u, w, loss, n, cfg.tol)
    objective = contract_objective(problem, u, w, loss, solution.contract, cfg.tol)
    scale = 1.0 + abs(objective)
    gap = objective - oracle.objective
    matches = gap >= -1e-6 * scale
    return {
        "n": n,
        "solver_objective": objective,
        "oracle_objective": oracle.objective,
        "objective_gap": gap,
        "objective_ok": matches,
        "check": {"verdict": report.verdict, "lambda_star": report.lambda_star,
                  "max_violation": report.max_violation, "tolerance": report.tolerance,
                  "premium_gap": report.premium_gap, "null_measure": report.null_measure},
        "oracle_band": list(oracle.band()),
        "passed": bool(report.verdict and matches),
    }


def cmd_solve(args) -> int:
    cfg = _config(args)
    if cfg.premium is None:
        raise ConfigError("solve needs a single 'premium' in [problem]; use menu for a grid")
    t0 = time.perf_counter()
    solution = solve(cfg.problem(), cfg.utility, cfg.weighting, cfg.loss, cfg.tol)
    curve = contract_curve(solution, cfg.loss, args.samples)
    extra = {}
    status = 0
    lines = [f"regime: {solution.regime}" + (" (boundary)" if solution.boundary else ""),
             "contract: " + ", ".join(f"{k}={_num(v) if not isinstance(v, str) else v}"
                                      for k, v in curve.metadata["contract"].items()),
             f"lambda_star: {_num(solution.lambda_star)}",
             "residuals: " + ", ".join(f"{k}={_num(v)}" for k, v in solution.residuals.items())]
    if args.oracle or cfg.oracle_enabled:
        n = args.oracle_n if args.oracle_n is not None else cfg.oracle_n
        section = oracle_section(cfg, solution, n)
        extra["oracle"] = section
        lines.append(f"oracle n={n}: check {'PASS' if section['check']['verdict'] else 'FAIL'} "
                     f"(max violation {_num(section['check']['max_violation'])}), objective gap "
                     f"{_num(section['objective_gap'])}")
        if not section["passed"]:
            status = 1
    lines.append(f"elapsed: {time.perf_counter() - t0:.3f} s")
    _write(curve_csv(curve) if args.format == "csv" else curve_json(curve, extra), args.out)
    _summary(lines, args.out)
    return status


def menu_row(cfg: RunConfig, premium: float) -> dict:
    """One menu entry; failures are reported in the row instead of raised."""
    row = {k: None for k in MENU_COLUMNS}
    row["premium"] = premium
    try:
        problem = cfg.problem(premium)
        sol = solve(problem, cfg.utility, cfg.weighting, cfg.loss, cfg.tol)
        obj = contract_objective(problem, cfg.utility, cfg.weighting, cfg.loss, sol.contract, cfg.tol)
        desc = sol.contract.describe(cfg.loss)
        retained = sol.quantile_solution(cfg.loss).integral()
        row.update(status="ok", regime=sol.regime, boundary=sol.boundary, lower=desc["lower"],
                   upper=desc["upper"], x_lo=desc["x_lo"], x_hi=desc["x_hi"],
                   expected_indemnity=cfg.loss.mean - retained, lambda_star=sol.lambda_star,
                   objective=obj, certainty_equivalent=float(cfg.utility.inverse(obj)), message="")
    except RduInsuranceError as exc:
        row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
    return row


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def menu_rows(cfg: RunConfig, threads: int | None = None) -> list[dict]:
    premiums = cfg.premiums()
    if not premiums:
        raise ConfigError("premium grid is empty")
    with ThreadPoolExecutor(max_workers=threads or thread_count()) as pool:
        return list(pool.map(lambda p: menu_row(cfg, p), premiums))


def menu_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MENU_COLUMNS)
    for row in rows:
        cells = []
        for k in MENU_COLUMNS:
            v = row[k]
            if v is None:
                cells.append("")
            elif isinstance(v, bool):
                cells.append("true" if v else "false")
            elif isinstance(v, str):
                cells.append(v)
            else:
                cells.append(_num(v))
        writer.writerow(cells)
    return buf.getvalue()


def cmd_menu(args) -> int:
    cfg = _config(args)
    threads = thread_count()
    rows = menu_rows(cfg, threads)
    if args.format == "json":
        doc = {"tool": "rdu-insurance", "version": __version__, "rows": rows}
        text = json.dumps(_jsonable(doc), indent=2) + "\n"
    else:
        text = menu_csv(rows)
    _write(text, args.out)
    failed = [r for r in rows if r["status"] != "ok"]
    _summary([f"{len(rows)} premiums, {len(failed)} failed"], args.out)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdu-insurance",
                                     description="Optimal insurance indemnity under rank-dependent utility.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_choices=("csv", "json"), default_fmt="csv"):
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--tol", type=float, default=None, help="absolute solver tolerance override")
        if fmt_choices:
            p.add_argument("--out", default=None, help="output file (default: stdout)")
            p.add_argument("--format", choices=fmt_choices, default=default_fmt)

    common(sub.add_parser("validate", help="check every modelling assumption"), fmt_choices=None)
    common(sub.add_parser("landmarks", help="print weighting landmarks and regime thresholds"),
           ("text", "json"), "text")
    p = sub.add_parser("solve", help="solve for a single premium")
    common(p)
    p.add_argument("--oracle", action="store_true", help="certify with the brute-force oracle")
    p.add_argument("--oracle-n", type=int, default=None, help="oracle grid size")
    p.add_argument("--samples", type=int, default=501, help="uniform curve samples on [0, M]")
    common(sub.add_parser("menu", help="solve every premium of premium_grid"))
    return parser


_COMMANDS = {"validate": cmd_validate, "landmarks": cmd_landmarks, "solve": cmd_solve, "menu": cmd_menu}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "oracle_n", None) is not None and args.oracle_n < 10:
        print("error: --oracle-n must be at least 10", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RduInsuranceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
