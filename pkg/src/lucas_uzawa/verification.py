"""Numerical checks of uniqueness, admissibility, equivalence and consistency.

Each check returns a :class:`CheckResult` whose verdict depends only on the
solution, the grid and the configured tolerances. A failed check is data,
not an exception; :func:`run_verification` also turns evaluator errors into
failed checks so that a report is always produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import closed_form as cf
from .calibration import SolutionPath
from .dynamics import COMPONENTS, StateVector, foc_rhs, simulate_foc, simulate_scalar_u
from .errors import LucasUzawaError
from .numerics import integrate_ode

PASS = "pass"
FAIL = "fail"
INFO = "informational"

INTERPRETATION_NOTES = (
    "human-capital exponent taken as (1-beta)/(1-beta+theta) and varphi as "
    "((delta+pi)(1-beta)+theta*delta)/beta",
    "second-set control evaluated with z = z(t) in every z-power",
    "initial costates from the first-order conditions: lambda0 = c0**-sigma, "
    "mu0 from dH/du = 0",
)


@dataclass
class CheckResult:
    name: str
    verdict: str
    metrics: dict[str, Any] = field(default_factory=dict)
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "verdict": self.verdict, "metrics": _jsonable(self.metrics),
                "detail": self.detail}


@dataclass
class VerificationReport:
    checks: list[CheckResult]
    notes: list[str] = field(default_factory=lambda: list(INTERPRETATION_NOTES))

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {"all_passed": self.all_passed, "checks": [c.to_dict() for c in self.checks],
                "notes": self.notes}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _schedule(t, base_tol):
    return base_tol * (1.0 + np.asarray(t) / 10.0)


def check_equivalence_u_forms(solution: SolutionPath, grid, equiv_tol: float = 1e-5) -> CheckResult:
    """Sup relative gap between the two published control paths."""
    t = np.asarray(grid, dtype=float)
    if t.size == 0:
        return CheckResult("equivalence_u_forms", INFO, {"gaps": [], "max_gap": None},
                           "empty grid")
    u1, u2 = solution.controls(t)
    gaps = np.abs(u1 - u2) / np.abs(u1)
    i = int(np.argmax(gaps))
    coincide = bool(gaps[i] <= equiv_tol)
    metrics = {
        "max_gap": gaps[i],
        "worst_t": t[i],
        "gap_at_t0": abs(solution.calibration.u0 - u2[0]) / solution.calibration.u0
        if t[0] == 0 else None,
        "tolerance": equiv_tol,
        "finding": "coincide" if coincide else "discrepant",
        "grid": [t[0], t[-1], t.size],
    }
    return CheckResult("equivalence_u_forms", PASS if coincide else FAIL, metrics,
                       f"max relative gap {gaps[i]:.3e} at t={t[i]:.6g}")


def _compare_grid(T: float, breakpoints, n: int = 501) -> np.ndarray:
    return np.union1d(np.linspace(0.0, T, n), np.asarray(breakpoints))


def check_uniqueness_ode(solution: SolutionPath, T: float = 50.0, base_tol: float = 1e-6) -> CheckResult:
    """Integrate the scalar control equation from u0 and compare with the first-set path."""
    if T == 0:
        return CheckResult("uniqueness_ode", PASS, {"max_gap": 0.0, "worst_t": 0.0, "T": 0.0})
    path = simulate_scalar_u(solution.params, solution.constants, solution.calibration, T,
                             solution.tol)
    t = _compare_grid(T, path.t)
    u_ode = path(t)[:, 0]
    u_cf = solution.u1(t)
    gaps = np.abs(u_ode - u_cf) / np.abs(u_cf)
    ratio = gaps / _schedule(t, base_tol)
    i = int(np.argmax(gaps))
    ok = bool(np.all(ratio <= 1.0))
    return CheckResult(
        "uniqueness_ode", PASS if ok else FAIL,
        {"max_gap": gaps[i], "worst_t": t[i], "max_gap_over_allowed": float(np.max(ratio)),
         "T": T, "base_tol": base_tol, "ode_steps": path.steps},
        f"scalar ODE vs closed form: max gap {gaps[i]:.3e} at t={t[i]:.6g}",
    )


def check_admissibility(solution: SolutionPath, grid) -> CheckResult:
    """Both control paths must stay strictly inside (0, 1)."""
    t = np.asarray(grid, dtype=float)
    if t.size == 0:
        return CheckResult("admissibility", INFO, {}, "empty grid")
    u1, u2 = solution.controls(t)
    metrics = {}
    ok = True
    for name, u in (("u_form1", u1), ("u_form2", u2)):
        lo, hi = int(np.argmin(u)), int(np.argmax(u))
        metrics[name] = {"min": u[lo], "argmin": t[lo], "max": u[hi], "argmax": t[hi]}
        inside = bool(np.all((u > 0) & (u < 1)))
        if not inside:
            bad = int(np.flatnonzero(~((u > 0) & (u < 1)))[0])
            metrics[name]["first_violation_t"] = t[bad]
        ok = ok and inside
    return CheckResult("admissibility", PASS if ok else FAIL, metrics,
                       "u in (0,1) on the grid" if ok else "u leaves (0,1)")


def mu_along_path(solution: SolutionPath, T: float):
    """Integrate log(mu)' = rho - delta - theta*delta*u/(1-beta) along the first-set control."""
    p = solution.params
    slope = p.theta * p.delta / (1.0 - p.beta)
    if slope == 0.0:
        return lambda t: np.log(solution.calibration.mu0) + (p.rho - p.delta) * np.asarray(t)
    rhs = lambda t, y: np.array([p.rho - p.delta - slope * solution.u1(t)])
    path = integrate_ode(rhs, [math.log(solution.calibration.mu0)], (0.0, T), solution.tol)
    return lambda t: path(t)[..., 0]


def _log_slope(t, logv):
    return float(np.polyfit(t, logv, 1)[0])


def check_transversality(solution: SolutionPath, sample_times, ratio: float = 1e-3) -> CheckResult:
    """exp(-rho*t)*lambda*k and exp(-rho*t)*mu*h must eventually decrease towards zero."""
    t = np.asarray(sample_times, dtype=float)
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("sample_times must be increasing with at least two entries")
    p = solution.params
    tr = solution.evaluate(t, with_integrals=False)
    log_mu = mu_along_path(solution, float(t[-1]))(t)
    log_lk = -p.rho * t - p.sigma * np.log(tr.c) + np.log(tr.k)
    log_mh = -p.rho * t + log_mu + np.log(tr.h)
    half = t >= t[0] + 0.5 * (t[-1] - t[0])
    metrics = {}
    ok = True
    for name, lv in (("lambda_k", log_lk), ("mu_h", log_mh)):
        tail = lv[half]
        decreasing = bool(np.all(np.diff(tail) < 0))
        small = bool(lv[-1] - lv[0] < math.log(ratio))
        metrics[name] = {
            "values": np.exp(lv),
            "final_over_initial": math.exp(lv[-1] - lv[0]),
            "tail_log_slope": _log_slope(t[half], tail),
            "eventually_decreasing": decreasing,
        }
        ok = ok and decreasing and small
    metrics["times"] = t
    metrics["mu_ode_vs_stationarity_max_rel"] = float(np.max(np.abs(np.exp(log_mu) / tr.mu - 1.0)))
    return CheckResult("transversality", PASS if ok else FAIL, metrics,
                       "both products decay" if ok else "a transversality product does not decay")


def _states(tr):
    return np.stack([tr.k, tr.h, tr.c, tr.u_form1, tr.lam, tr.mu], axis=1)


def foc_residuals(solution: SolutionPath, grid, fd_step: float = 1e-4) -> dict[str, np.ndarray]:
    """Relative gap between finite-difference derivatives of the closed forms and the FOC field.

    Central differences are used where ``t >= fd_step``; near zero a
    second-order forward stencil keeps all evaluations at non-negative times.
    """
    if not fd_step > 0:
        raise ValueError("fd_step must be positive")
    t = np.asarray(grid, dtype=float)
    if t.size == 0:
        return {name: np.empty(0) for name in COMPONENTS}
    central = t >= fd_step
    lo = np.where(central, t - fd_step, t)
    mid = np.where(central, t, t + fd_step)
    hi = np.where(central, t + fd_step, t + 2 * fd_step)
    allt = np.concatenate([lo, mid, hi, t])
    tr = solution.evaluate(allt, with_integrals=False)
    Y = _states(tr)
    n = t.size
    ylo, ymid, yhi, y = Y[:n], Y[n:2 * n], Y[2 * n:3 * n], Y[3 * n:]
    deriv = np.where(central[:, None], (yhi - ylo) / (2 * fd_step),
                     (-3 * ylo + 4 * ymid - yhi) / (2 * fd_step))
    field_ = np.array([foc_rhs(solution.params, solution.constants, row) for row in y])
    res = np.abs(deriv - field_) / np.abs(y)
    return {name: res[:, i] for i, name in enumerate(COMPONENTS)}


def check_foc_residuals(solution: SolutionPath, grid, fd_step: float = 1e-4,
                        tol: float = 1e-6) -> CheckResult:
    res = foc_residuals(solution, grid, fd_step)
    t = np.asarray(grid, dtype=float)
    metrics = {}
    ok = True
    for name, r in res.items():
        if r.size == 0:
            continue
        i = int(np.argmax(r))
        metrics[name] = {"max": r[i], "worst_t": t[i]}
        ok = ok and bool(r[i] <= tol)
    metrics["fd_step"] = fd_step
    metrics["tolerance"] = tol
    return CheckResult("foc_residuals", PASS if ok else FAIL, metrics)


def check_bgp_asymptotics(solution: SolutionPath, T_long: float = 400.0, tol: float = 1e-4) -> CheckResult:
    """Limits of u, z and the growth rates at a long horizon."""
    dc = solution.constants
    if not math.exp(-dc.xi * T_long) < 1e-8:
        raise ValueError(f"T_long={T_long} too short: exp(-xi*T_long) >= 1e-8")
    tr = solution.evaluate([T_long], with_integrals=False)
    y = _states(tr)[0]
    growth = foc_rhs(solution.params, dc, y) / y
    target_h = solution.params.delta * (1.0 - dc.u_star)
    errors = {
        "u": abs(tr.u_form1[0] - dc.u_star),
        "z": abs(tr.z[0] - dc.z_star) / dc.z_star,
        "k_growth": abs(growth[0] - dc.chi),
        "c_growth": abs(growth[2] - dc.chi),
        "h_growth": abs(growth[1] - target_h),
    }
    ok = all(v <= tol for v in errors.values())
    metrics = {"errors": errors, "T_long": T_long, "tolerance": tol,
               "limits": {"u_star": dc.u_star, "z_star": dc.z_star, "chi": dc.chi,
                          "h_growth": target_h}}
    return CheckResult("bgp_asymptotics", PASS if ok else FAIL, metrics)


def compare_closed_vs_simulated(solution: SolutionPath, T: float = 50.0,
                                base_tol: float = 1e-6) -> CheckResult:
    """Integrate the six-equation system from the calibrated state and compare."""
    initial = StateVector.initial(solution.endowment, solution.calibration)
    sim = simulate_foc(solution.params, solution.constants, initial, T, solution.tol)
    t = _compare_grid(T, sim.t) if T > 0 else np.array([0.0])
    Ys = sim(t)
    Yc = _states(solution.evaluate(t, with_integrals=False))
    gaps = np.abs(Ys - Yc) / np.abs(Yc)
    allowed = _schedule(t, base_tol)
    metrics = {}
    ok = True
    for i, name in enumerate(COMPONENTS):
        j = int(np.argmax(gaps[:, i]))
        metrics[name] = {"max_gap": gaps[j, i], "worst_t": t[j]}
        ok = ok and bool(np.all(gaps[:, i] <= allowed))
    metrics.update({"T": T, "base_tol": base_tol, "ode_steps": sim.steps})
    return CheckResult("closed_vs_simulated", PASS if ok else FAIL, metrics)


def check_jump_condition(solution: SolutionPath) -> CheckResult:
    cal = solution.calibration
    gap = cal.jump_gap(solution.params)
    scale = solution.constants.varphi * cal.F_star
    allowed = 10 * solution.tol.root_tol * max(scale, 1.0)
    ok = abs(gap) <= allowed
    return CheckResult("jump_condition", PASS if ok else FAIL,
                       {"residual": gap, "allowed": allowed, "u0": cal.u0})


def check_z_identity(solution: SolutionPath, grid, tol: float = 1e-8) -> CheckResult:
    """h**eta * u / k along the closed forms must reproduce z(t)."""
    t = np.asarray(grid, dtype=float)
    if t.size == 0:
        return CheckResult("z_identity", INFO, {}, "empty grid")
    tr = solution.evaluate(t, with_integrals=False)
    zz = tr.h**solution.constants.eta * tr.u_form1 / tr.k
    gaps = np.abs(zz - tr.z) / tr.z
    i = int(np.argmax(gaps))
    return CheckResult("z_identity", PASS if gaps[i] <= tol else FAIL,
                       {"max_gap": gaps[i], "worst_t": t[i]})


@dataclass(frozen=True)
class VerificationSettings:
    horizon: float = 200.0
    compare_horizon: float = 50.0
    grid_step: float = 0.5
    equiv_tol: float = 1e-5
    ode_base_tol: float = 1e-6
    fd_step: float = 1e-4
    fd_tol: float = 1e-6
    bgp_T_long: float = 400.0
    bgp_tol: float = 1e-4
    transversality_ratio: float = 1e-3
    transversality_samples: int = 41


def _grid(horizon: float, step: float) -> np.ndarray:
    n = int(math.floor(horizon / step + 1e-9))
    return np.arange(n + 1) * step


def run_verification(solution: SolutionPath, settings: VerificationSettings = VerificationSettings()
                     ) -> VerificationReport:
    """Run every check in a fixed order; evaluator failures become failed checks."""
    s = settings
    grid = _grid(s.horizon, s.grid_step)
    T_long = max(s.bgp_T_long, 20.0 / solution.constants.xi)
    plan: list[tuple[str, Callable[[], CheckResult]]] = [
        ("jump_condition", lambda: check_jump_condition(solution)),
        ("equivalence_u_forms", lambda: check_equivalence_u_forms(solution, grid, s.equiv_tol)),
        ("uniqueness_ode", lambda: check_uniqueness_ode(solution, s.compare_horizon, s.ode_base_tol)),
        ("admissibility", lambda: check_admissibility(solution, grid)),
        ("transversality", lambda: check_transversality(
            solution, np.linspace(0.0, s.horizon, s.transversality_samples), s.transversality_ratio)),
        ("foc_residuals", lambda: check_foc_residuals(solution, grid, s.fd_step, s.fd_tol)),
        ("bgp_asymptotics", lambda: check_bgp_asymptotics(solution, T_long, s.bgp_tol)),
        ("closed_vs_simulated", lambda: compare_closed_vs_simulated(
            solution, s.compare_horizon, s.ode_base_tol)),
        ("z_identity", lambda: check_z_identity(solution, grid)),
    ]
    checks = []
    for name, run in plan:
        try:
            checks.append(run())
        except (LucasUzawaError, ValueError, ArithmeticError) as exc:
            checks.append(CheckResult(name, FAIL, {"error": type(exc).__name__}, str(exc)))
    return VerificationReport(checks)
