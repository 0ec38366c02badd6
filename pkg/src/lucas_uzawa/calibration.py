"""Saddle-path calibration of the initial control and the assembled solution."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import closed_form as cf
from .closed_form import Calibration
from .errors import CalibrationError, RootFindingError
from .numerics import DEFAULT_TOL, BracketScan, ToleranceSettings, find_root, scan_brackets
from .params import DerivedConstants, InitialEndowment, ModelParams, require_feasible

log = logging.getLogger(__name__)

SCAN_POINTS = 512
EDGE = 1e-6


def jump_residual(params: ModelParams, endowment: InitialEndowment, u0_trial: float,
                  tol: ToleranceSettings = DEFAULT_TOL) -> float:
    """G(u0) = (varphi + delta*eta*u0)*F*(z0) - delta*eta*u0*B*(z0), z0 = h0**eta*u0/k0."""
    dc = require_feasible(params)
    if not 0.0 < u0_trial < 1.0:
        raise ValueError(f"u0_trial must lie in (0,1), got {u0_trial}")
    z0 = endowment.h0**dc.eta * u0_trial / endowment.k0
    de = params.delta * dc.eta
    Fs = cf.F_star(params, z0, tol)
    Bs = cf.B_star(params, z0, tol)
    return (dc.varphi + de * u0_trial) * Fs - de * u0_trial * Bs


@dataclass
class CalibrationDiagnostics:
    residual: float
    bracket: tuple[float, float]
    iterations: int
    F_star: float
    B_star: float
    scale: float
    sign_pattern: str
    feasible: bool = True
    warnings: list[str] = field(default_factory=list)


def _initial_costates(params: ModelParams, endowment: InitialEndowment, u0: float, c0: float):
    return cf.costates_at(params, endowment.k0, endowment.h0, c0, u0)


def calibration_from_u0(params: ModelParams, endowment: InitialEndowment, u0: float,
                        tol: ToleranceSettings = DEFAULT_TOL) -> Calibration:
    """Fill every calibration field for a given initial control (no root solve)."""
    dc = require_feasible(params)
    z0 = endowment.h0**dc.eta * u0 / endowment.k0
    Fs = cf.F_star(params, z0, tol)
    Bs = cf.B_star(params, z0, tol)
    c0 = endowment.k0 * z0 / Fs * z0 ** (-params.beta / params.sigma)
    lam0, mu0 = _initial_costates(params, endowment, u0, c0)
    return Calibration(u0=u0, c0=c0, z0=z0, F_star=Fs, B_star=Bs, lambda0=lam0, mu0=mu0)


def calibrate(params: ModelParams, endowment: InitialEndowment,
              tol: ToleranceSettings = DEFAULT_TOL) -> tuple[Calibration, CalibrationDiagnostics]:
    """Find the unique u0 in (0,1) solving the jump condition.

    The residual is scanned on 512 points of (1e-6, 1 - 1e-6). Exactly one
    sign change is required: none means no interior saddle path for this
    endowment, more than one contradicts uniqueness and is reported with
    every bracket.

    Raises:
        InvalidParametersError: if the parameters are infeasible.
        CalibrationError: if zero or several brackets are found, or the
            refinement fails.
    """
    dc = require_feasible(params)
    calls = 0

    def G(u):
        nonlocal calls
        calls += 1
        return jump_residual(params, endowment, u, tol)

    scan: BracketScan = scan_brackets(G, EDGE, 1.0 - EDGE, SCAN_POINTS)
    if scan.skipped:
        log.warning("jump residual not finite at %d scan points", len(scan.skipped))
    if not scan.brackets:
        raise CalibrationError(
            "no sign change of the jump residual on (0,1): no admissible saddle path "
            f"(G(eps)={scan.values[0]:.3g}, G(1-eps)={scan.values[-1]:.3g})"
        )
    if len(scan.brackets) > 1:
        raise CalibrationError(
            f"{len(scan.brackets)} sign changes of the jump residual: u0 is not unique",
            scan.brackets,
        )
    bracket = scan.brackets[0]
    before = calls
    try:
        # the first-set control amplifies u0 error like exp((xi - varphi)*t); refine past root_tol
        u0 = find_root(G, bracket, tol.root_tol * 1e-3)
    except RootFindingError as exc:
        raise CalibrationError(f"root refinement failed: {exc}", [bracket]) from None
    cal = calibration_from_u0(params, endowment, u0, tol)
    diag = CalibrationDiagnostics(
        residual=cal.jump_gap(params),
        bracket=bracket,
        iterations=calls - before,
        F_star=cal.F_star,
        B_star=cal.B_star,
        scale=dc.varphi * cal.F_star,
        sign_pattern=scan.sign_pattern(),
    )
    return cal, diag


@dataclass(frozen=True)
class Trajectory:
    """Closed-form solution sampled on a time grid."""

    t: np.ndarray
    k: np.ndarray
    h: np.ndarray
    c: np.ndarray
    u_form1: np.ndarray
    u_form2: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    F: np.ndarray
    B: np.ndarray
    h_form2: np.ndarray


@dataclass(frozen=True)
class SolutionPath:
    """Parameters, endowment and calibration bundled for evaluation."""

    params: ModelParams
    endowment: InitialEndowment
    constants: DerivedConstants
    calibration: Calibration
    tol: ToleranceSettings = DEFAULT_TOL
    diagnostics: CalibrationDiagnostics | None = None

    def z(self, t):
        return cf.z_at(self.params, self.calibration.z0, t)

    def k(self, t):
        return cf.k_at(self.params, self.endowment, self.calibration, t, self.tol)

    def c(self, t):
        return cf.c_at(self.params, self.endowment, self.calibration, t)

    def u1(self, t):
        return cf.u_form1_at(self.params, self.calibration, t, self.tol)

    def u2(self, t):
        return cf.u_form2_at(self.params, self.endowment, self.calibration, t, self.tol)

    def h(self, t, u_value=None):
        if u_value is None:
            u_value = self.u1(t)
        return cf.h_at(self.params, self.endowment, self.calibration, t, u_value, self.tol)

    def welfare(self):
        return cf.welfare(self.params, self.endowment, self.calibration, self.tol)

    def controls(self, grid) -> tuple[np.ndarray, np.ndarray]:
        """Both control paths on ``grid``; needs no positivity of the controls."""
        p, dc, cal, e = self.params, self.constants, self.calibration, self.endowment
        pc = cf._pieces(p, cal.z0, grid, self.tol)
        return cf._u1(p, dc, cal, pc), cf._u2(p, dc, e, cal, pc)

    def evaluate(self, grid, with_integrals: bool = True) -> Trajectory:
        """Evaluate every closed-form object on ``grid`` sharing one set of tail integrals."""
        p, dc, cal, e = self.params, self.constants, self.calibration, self.endowment
        t = np.atleast_1d(np.asarray(grid, dtype=float))
        if t.size == 0:
            empty = np.empty(0)
            return Trajectory(*([empty] * 12))
        pc = cf._pieces(p, cal.z0, t, self.tol)
        k = cf._k(p, dc, e, cal, pc)
        c = cf._c(p, dc, e, cal, pc)
        u1 = cf._u1(p, dc, cal, pc)
        u2 = cf._u2(p, dc, e, cal, pc)
        h = cf._h(p, dc, e, cal, pc, u1)
        h2 = cf._h(p, dc, e, cal, pc, u2) if np.all(u2 > 0) else np.full_like(u2, np.nan)
        lam, mu = cf.costates_at(p, k, h, c, u1)
        if with_integrals:
            F = cf.cumulative_integral(p, cal.z0, dc.xi, t, self.tol)
            B = cf.cumulative_integral(p, cal.z0, dc.xi - dc.varphi, t, self.tol)
        else:
            F = B = np.full_like(t, np.nan)
        return Trajectory(t, k, h, c, u1, u2, pc.z, np.atleast_1d(lam), np.atleast_1d(mu),
                          np.atleast_1d(F), np.atleast_1d(B), h2)


def assemble_solution(params: ModelParams, endowment: InitialEndowment,
                      tol: ToleranceSettings = DEFAULT_TOL) -> SolutionPath:
    """Calibrate and bundle everything needed to evaluate or simulate the model."""
    dc = require_feasible(params)
    cal, diag = calibrate(params, endowment, tol)
    return SolutionPath(params, endowment, dc, cal, tol, diag)
