"""Command-line interface: ``lucas-uzawa solve|verify|compare|sweep --config FILE``.

Exit codes: 0 success, 1 invalid configuration or parameters, 2 calibration
failure, 3 a verification check failed (report still written), 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .calibration import SolutionPath, assemble_solution, calibration_from_u0
from .dynamics import StateVector, simulate_foc, simulate_scalar_u
from .errors import CalibrationError, InvalidParametersError, LucasUzawaError
from .numerics import ToleranceSettings
from .params import InitialEndowment, ModelParams, require_feasible, validate
from .verification import (
    INTERPRETATION_NOTES,
    VerificationSettings,
    _grid,
    check_admissibility,
    check_equivalence_u_forms,
    check_uniqueness_ode,
    foc_residuals,
    run_verification,
)

log = logging.getLogger("lucas_uzawa")

EXIT_OK, EXIT_INVALID, EXIT_CALIBRATION, EXIT_CHECK_FAILED, EXIT_IO = 0, 1, 2, 3, 4

PARAM_KEYS = tuple(f.name for f in fields(ModelParams))
TOL_KEYS = tuple(f.name for f in fields(ToleranceSettings))
CHECK_KEYS = ("equiv_tol", "ode_base_tol", "fd_step", "fd_tol", "bgp_T_long", "bgp_tol",
              "transversality_ratio", "grid_step")
TOP_KEYS = PARAM_KEYS + ("k0", "h0", "horizon", "output_step", "compare_horizon",
                         "tolerances", "output_dir", "sweep", "force_u0")

TRAJECTORY_COLUMNS = ("t", "k", "h", "c", "u_form1", "u_form2", "z", "lambda", "mu", "F", "B",
                      "res_k", "res_h", "res_c", "res_u")
COMPARE_COLUMNS = ("t", "u_form1", "u_form2", "u_simulated", "u_scalar_ode",
                   "gap_form2", "gap_simulated", "gap_scalar_ode")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: ModelParams
    endowment: InitialEndowment
    horizon: float = 200.0
    output_step: float = 0.1
    compare_horizon: float = 50.0
    tolerances: ToleranceSettings = field(default_factory=ToleranceSettings)
    checks: dict[str, float] = field(default_factory=dict)
    output_dir: str = "out"
    sweep: dict[str, list[float]] = field(default_factory=dict)
    force_u0: Optional[float] = None

    def verification_settings(self) -> VerificationSettings:
        return VerificationSettings(horizon=self.horizon, compare_horizon=self.compare_horizon,
                                    **self.checks)


def _number(doc: dict, key: str, default=None) -> float:
    if key not in doc:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key!r} must be a finite number, got {value!r}")
    return float(value)


def parse_config(doc: dict[str, Any]) -> RunConfig:
    """Build a :class:`RunConfig` from a flat JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(doc) - set(TOP_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    params = ModelParams(**{k: _number(doc, k, 0.0 if k in ("pi", "theta") else None)
                            for k in PARAM_KEYS})
    try:
        endowment = InitialEndowment(_number(doc, "k0"), _number(doc, "h0"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    horizon = _number(doc, "horizon", 200.0)
    step = _number(doc, "output_step", 0.1)
    compare = _number(doc, "compare_horizon", 50.0)
    if not horizon > 0:
        raise ConfigError("horizon must be positive")
    if not step > 0:
        raise ConfigError("output_step must be positive")
    if not compare >= 0:
        raise ConfigError("compare_horizon must be non-negative")
    tol_doc = doc.get("tolerances", {})
    if not isinstance(tol_doc, dict):
        raise ConfigError("tolerances must be an object")
    bad = sorted(set(tol_doc) - set(TOL_KEYS) - set(CHECK_KEYS))
    if bad:
        raise ConfigError(f"unknown tolerance keys: {', '.join(bad)}")
    try:
        tol = ToleranceSettings(**{k: (int(_number(tol_doc, k)) if k == "max_steps"
                                       else _number(tol_doc, k))
                                   for k in TOL_KEYS if k in tol_doc})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    checks = {k: _number(tol_doc, k) for k in CHECK_KEYS if k in tol_doc}
    sweep = doc.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("sweep must be an object of name -> list of values")
    for key, values in sweep.items():
        if key not in PARAM_KEYS + ("k0", "h0"):
            raise ConfigError(f"cannot sweep over {key!r}")
        if not isinstance(values, list):
            raise ConfigError(f"sweep range for {key!r} must be a list")
        for v in values:
            _number({key: v}, key)
    force = _number(doc, "force_u0") if "force_u0" in doc else None
    return RunConfig(params, endowment, horizon, step, compare, tol, checks,
                     str(doc.get("output_dir", "out")), {k: list(map(float, v)) for k, v in sweep.items()},
                     force)


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(doc)


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return format(float(x), ".12g")


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path: Path, doc) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _float_dict(obj) -> dict:
    return {k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
            for k, v in asdict(obj).items()}


def _build_solution(cfg: RunConfig) -> SolutionPath:
    """Calibrate (or honour the ``force_u0`` debug hook)."""
    if cfg.force_u0 is not None:
        dc = require_feasible(cfg.params)
        cal = calibration_from_u0(cfg.params, cfg.endowment, cfg.force_u0, cfg.tolerances)
        return SolutionPath(cfg.params, cfg.endowment, dc, cal, cfg.tolerances)
    return assemble_solution(cfg.params, cfg.endowment, cfg.tolerances)


def _check_params(cfg: RunConfig) -> Optional[int]:
    report = validate(cfg.params)
    for w in report.warnings:
        log.warning("%s", w.message)
    if not report.ok:
        for v in report.errors:
            print(f"invalid parameters: {v.message}", file=sys.stderr)
        return EXIT_INVALID
    return None


def _output_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def trajectory_rows(solution: SolutionPath, grid: np.ndarray):
    tr = solution.evaluate(grid)
    res = foc_residuals(solution, grid)
    cols = (tr.t, tr.k, tr.h, tr.c, tr.u_form1, tr.u_form2, tr.z, tr.lam, tr.mu, tr.F, tr.B,
            res["k"], res["h"], res["c"], res["u"])
    return list(zip(*cols))


def calibration_document(solution: SolutionPath) -> dict:
    doc = {
        "params": solution.params.as_dict(),
        "endowment": _float_dict(solution.endowment),
        "constants": _float_dict(solution.constants),
        "calibration": _float_dict(solution.calibration),
        "jump_residual": solution.calibration.jump_gap(solution.params),
    }
    if solution.diagnostics is not None:
        d = solution.diagnostics
        doc["diagnostics"] = {"bracket": list(d.bracket), "iterations": d.iterations,
                              "residual": d.residual, "scale": d.scale,
                              "scan_sign_pattern": d.sign_pattern}
    w = solution.welfare()
    doc["welfare"] = {"V0": w.value, "error_estimate": w.error_estimate}
    doc["warnings"] = [v.message for v in validate(solution.params).warnings]
    doc["notes"] = list(INTERPRETATION_NOTES)
    return doc


def cmd_solve(cfg: RunConfig) -> int:
    if (code := _check_params(cfg)) is not None:
        return code
    try:
        solution = _build_solution(cfg)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    try:
        rows = trajectory_rows(solution, _grid(cfg.horizon, cfg.output_step))
        doc = calibration_document(solution)
    except LucasUzawaError as exc:
        print(f"evaluation failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    try:
        out = _output_dir(cfg)
        write_csv(out / "trajectory.csv", TRAJECTORY_COLUMNS, rows)
        write_json(out / "calibration.json", doc)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    if (code := _check_params(cfg)) is not None:
        return code
    try:
        solution = _build_solution(cfg)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    report = run_verification(solution, cfg.verification_settings())
    for c in report.checks:
        print(f"{c.verdict.upper():>13}  {c.name}  {c.detail}")
    try:
        write_json(_output_dir(cfg) / "verification.json", report.to_dict())
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILED


def compare_rows(solution: SolutionPath, horizon: float, step: float):
    if horizon <= 0:
        return []
    grid = _grid(horizon, step)
    tr = solution.evaluate(grid, with_integrals=False)
    sim = simulate_foc(solution.params, solution.constants,
                       StateVector.initial(solution.endowment, solution.calibration),
                       horizon, solution.tol)
    u_sim = sim(grid)[:, 3]
    u_ode = simulate_scalar_u(solution.params, solution.constants, solution.calibration,
                              horizon, solution.tol)(grid)[:, 0]
    u1 = tr.u_form1
    gaps = [np.abs(x - u1) / np.abs(u1) for x in (tr.u_form2, u_sim, u_ode)]
    return list(zip(grid, u1, tr.u_form2, u_sim, u_ode, *gaps))


def cmd_compare(cfg: RunConfig) -> int:
    if (code := _check_params(cfg)) is not None:
        return code
    try:
        solution = _build_solution(cfg)
        rows = compare_rows(solution, cfg.compare_horizon, cfg.output_step)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except LucasUzawaError as exc:
        print(f"comparison failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    try:
        write_csv(_output_dir(cfg) / "compare.csv", COMPARE_COLUMNS, rows)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


SWEEP_RESULT_COLUMNS = ("status", "u0", "u_star", "F_star", "B_star", "equivalence_gap",
                        "equivalence", "admissibility", "uniqueness")


def sweep_points(cfg: RunConfig):
    """Parameter points in lexicographic order of (sorted key names, listed values)."""
    keys = sorted(cfg.sweep)
    for combo in itertools.product(*(cfg.sweep[k] for k in keys)):
        yield dict(zip(keys, combo))


def sweep_row(cfg: RunConfig, point: dict[str, float]) -> list:
    changes = {k: v for k, v in point.items() if k in PARAM_KEYS}
    params = cfg.params.replace(**changes)
    blank = [None] * (len(SWEEP_RESULT_COLUMNS) - 1)
    try:
        endowment = InitialEndowment(point.get("k0", cfg.endowment.k0), point.get("h0", cfg.endowment.h0))
        report = validate(params)
    except (ValueError, InvalidParametersError) as exc:
        return [f"invalid: {exc}"] + blank
    if not report.ok:
        status = ("infeasible: " if any(v.code.startswith(("xi", "u_star")) for v in report.errors)
                  else "invalid: ")
        inner = "; ".join(v.message.removeprefix("infeasible: ") for v in report.errors)
        return [status + inner] + blank
    try:
        sol = assemble_solution(params, endowment, cfg.tolerances)
    except CalibrationError as exc:
        return [f"calibration failed: {exc}"] + blank
    settings = cfg.verification_settings()
    grid = _grid(cfg.horizon, settings.grid_step)
    verdicts = []
    gap = None
    for check in (lambda: check_equivalence_u_forms(sol, grid, settings.equiv_tol),
                  lambda: check_admissibility(sol, grid),
                  lambda: check_uniqueness_ode(sol, cfg.compare_horizon, settings.ode_base_tol)):
        try:
            res = check()
            verdicts.append(res.verdict)
            if res.name == "equivalence_u_forms":
                gap = res.metrics["max_gap"]
        except (LucasUzawaError, ValueError, ArithmeticError) as exc:
            verdicts.append(f"fail: {type(exc).__name__}")
    cal = sol.calibration
    return ["ok", cal.u0, sol.constants.u_star, cal.F_star, cal.B_star, gap] + verdicts


def cmd_sweep(cfg: RunConfig) -> int:
    keys = sorted(cfg.sweep)
    rows = [[point[k] for k in keys] + sweep_row(cfg, point) for point in sweep_points(cfg)]
    try:
        write_csv(_output_dir(cfg) / "sweep.csv", tuple(keys) + SWEEP_RESULT_COLUMNS, rows)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "compare": cmd_compare, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lucas-uzawa", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--force-u0", type=float, default=None,
                        help="debug: skip calibration and use this initial control")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    if args.force_u0 is not None:
        cfg = replace(cfg, force_u0=args.force_u0)
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
