"""Structural parameters, endowments and the derived closed-form constants.

Notation follows the model: ``beta`` is the capital share, ``sigma`` the
inverse elasticity of intertemporal substitution, ``rho`` the discount rate,
``delta`` and ``gamma`` the education and goods technology levels, ``pi`` the
depreciation rate of physical capital and ``theta`` the human-capital
externality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from functools import lru_cache

from .errors import InvalidParametersError

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class ModelParams:
    beta: float
    sigma: float
    rho: float
    delta: float
    gamma: float
    pi: float = 0.0
    theta: float = 0.0

    def replace(self, **changes) -> "ModelParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ModelParams(**values)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class InitialEndowment:
    k0: float
    h0: float

    def __post_init__(self):
        if not (self.k0 > 0 and self.h0 > 0):
            raise ValueError(f"endowment must be positive, got k0={self.k0}, h0={self.h0}")


@dataclass(frozen=True)
class DerivedConstants:
    """Exponents and rates that appear in the closed-form solution.

    Attributes:
        eta: exponent on human capital, (1 - beta + theta) / (1 - beta).
        phi: growth rate multiplying F* - F(t) in the capital path.
        chi: asymptotic growth rate of consumption and physical capital.
        xi: phi - chi, the discount rate inside F.
        varphi: constant term of the control equation.
        a: linear rate of the z-ratio dynamics, delta*eta + varphi + pi.
        z_star: steady state of z.
        u_star: steady-state control, (xi - varphi) / (delta*eta).
    """

    eta: float
    phi: float
    chi: float
    xi: float
    varphi: float
    a: float
    z_star: float
    u_star: float


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    severity: str = ERROR


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == ERROR]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == WARNING]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return bool(self.violations)

    def messages(self) -> list[str]:
        return [f"{v.severity}: {v.message}" for v in self.violations]


def _structural_violations(p: ModelParams) -> list[Violation]:
    out = []
    for name in ("beta", "sigma", "rho", "delta", "gamma", "pi", "theta"):
        if not math.isfinite(getattr(p, name)):
            out.append(Violation(f"{name}_nonfinite", f"{name} is not finite"))
    if out:
        return out
    if not 0.0 < p.beta < 1.0:
        out.append(Violation("beta_range", "beta out of (0,1)"))
    if not p.sigma > 0.0:
        out.append(Violation("sigma_positive", "sigma must be positive"))
    if p.sigma == 1.0:
        out.append(Violation("sigma_one", "sigma equals 1"))
    if p.sigma == p.beta:
        out.append(Violation("sigma_beta", "sigma equals beta"))
    if not p.rho > 0.0:
        out.append(Violation("rho_positive", "rho must be positive"))
    if not p.delta > 0.0:
        out.append(Violation("delta_positive", "delta must be positive"))
    if not p.gamma > 0.0:
        out.append(Violation("gamma_positive", "gamma must be positive"))
    if not p.pi >= 0.0:
        out.append(Violation("pi_nonnegative", "pi must be non-negative"))
    if not p.theta >= 0.0:
        out.append(Violation("theta_nonnegative", "theta must be non-negative"))
    return out


def _feasibility_violations(p: ModelParams, dc: DerivedConstants) -> list[Violation]:
    out = []
    if not dc.xi > 0.0:
        out.append(Violation("xi_positive", "infeasible: xi<=0 (F* diverges)"))
    if not dc.xi > dc.varphi:
        out.append(Violation("xi_varphi", "infeasible: xi<=varphi (B* diverges)"))
    elif not dc.xi - dc.varphi < p.delta * dc.eta:
        out.append(Violation("u_star_below_one", "infeasible: u_star>=1"))
    if not p.rho > (1.0 - p.sigma) * dc.chi:
        out.append(
            Violation(
                "transversality_decay",
                "rho<=(1-sigma)*chi: transversality products and welfare do not decay",
                WARNING,
            )
        )
    return out


def validate(params: ModelParams) -> ValidationReport:
    """Check structural invariants, then feasibility of the derived rates.

    The report is empty iff every invariant holds. The transversality-decay
    condition is reported as a warning only.
    """
    structural = _structural_violations(params)
    if structural:
        return ValidationReport(structural)
    return ValidationReport(_feasibility_violations(params, _derive(params)))


def require_feasible(params: ModelParams) -> DerivedConstants:
    """Return derived constants, raising unless ``params`` are fully feasible."""
    report = validate(params)
    if not report.ok:
        raise InvalidParametersError(report.errors)
    return _derive(params)


def derive_constants(params: ModelParams) -> DerivedConstants:
    """Compute every derived constant.

    Raises:
        InvalidParametersError: if a structural invariant fails. Feasibility
            (xi > varphi, ...) is not required here; see ``require_feasible``.
    """
    structural = _structural_violations(params)
    if structural:
        raise InvalidParametersError(structural)
    return _derive(params)


@lru_cache(maxsize=256)
def _derive(p: ModelParams) -> DerivedConstants:
    b, s, r, d, g, pi, th = p.beta, p.sigma, p.rho, p.delta, p.gamma, p.pi, p.theta
    eta = (1.0 - b + th) / (1.0 - b)
    phi = ((1.0 - b) * (d + pi * (1.0 - b)) + th * d) / (b * (1.0 - b))
    chi = ((1.0 - b) * (d - r) + th * d) / (s * (1.0 - b))
    xi = phi - chi
    # the printed varphi carries gamma*delta; the control equation has theta*delta
    varphi = ((d + pi) * (1.0 - b) + th * d) / b
    a = d * eta + varphi + pi
    z_star = (a / g) ** (1.0 / (1.0 - b))
    u_star = (xi - varphi) / (d * eta)
    return DerivedConstants(eta, phi, chi, xi, varphi, a, z_star, u_star)
