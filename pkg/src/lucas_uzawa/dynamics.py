"""First-order-condition dynamics, integrated numerically as an oracle.

State vectors are ordered ``(k, h, c, u, lambda, mu)``.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from . import closed_form as cf
from .closed_form import Calibration
from .errors import HorizonExceededError, IntegrationError, PositivityError
from .numerics import DEFAULT_TOL, DenseTrajectory, ToleranceSettings, integrate_ode
from .params import DerivedConstants, InitialEndowment, ModelParams, derive_constants

COMPONENTS = ("k", "h", "c", "u", "lambda", "mu")


@dataclass(frozen=True)
class StateVector:
    k: float
    h: float
    c: float
    u: float
    lam: float
    mu: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, y) -> "StateVector":
        return cls(*(float(v) for v in y))

    @classmethod
    def initial(cls, endowment: InitialEndowment, cal: Calibration) -> "StateVector":
        return cls(endowment.k0, endowment.h0, cal.c0, cal.u0, cal.lambda0, cal.mu0)


def foc_rhs(params: ModelParams, constants: DerivedConstants, state) -> np.ndarray:
    """Right-hand sides of the six first-order-condition equations."""
    y = state.as_array() if isinstance(state, StateVector) else np.asarray(state, dtype=float)
    k, h, c, u, lam, mu = y
    b, s, r, d, g, pi, th = (params.beta, params.sigma, params.rho, params.delta,
                             params.gamma, params.pi, params.theta)
    eta, varphi = constants.eta, constants.varphi
    zpow = (h**eta * u / k) ** (1.0 - b)
    out = np.array([
        (g * zpow - pi) * k - c,
        d * (1.0 - u) * h,
        (-(r + pi) / s + g * b / s * zpow) * c,
        (varphi - c / k + d * eta * u) * u,
        (r + pi - g * b * zpow) * lam,
        (r - d - th * d / (1.0 - b) * u) * mu,
    ])
    if not np.all(np.isfinite(out)):
        bad = COMPONENTS[int(np.flatnonzero(~np.isfinite(out))[0])]
        raise FloatingPointError(f"non-finite derivative in component {bad!r}")
    return out


def hamiltonian(params: ModelParams, state) -> float:
    """Current-value Hamiltonian at ``state``."""
    st = state if isinstance(state, StateVector) else StateVector.from_array(state)
    b, s = params.beta, params.sigma
    eta = derive_constants(params).eta
    utility = (st.c ** (1.0 - s) - 1.0) / (1.0 - s)
    goods = params.gamma * st.k**b * (st.h**eta * st.u) ** (1.0 - b) - params.pi * st.k - st.c
    return utility + goods * st.lam + params.delta * (1.0 - st.u) * st.h * st.mu


def _guarded(rhs, names):
    def wrapped(t, y):
        nonpos = np.flatnonzero(~(y > 0))
        if nonpos.size:
            raise PositivityError(names[int(nonpos[0])], t)
        try:
            return rhs(t, y)
        except FloatingPointError as exc:
            raise IntegrationError(str(exc), t) from None
    return wrapped


def simulate_foc(params: ModelParams, constants: DerivedConstants, initial: StateVector,
                 T: float, tol: ToleranceSettings = DEFAULT_TOL) -> DenseTrajectory:
    """Integrate the six-equation system forward from ``initial`` on [0, T].

    The system is saddle-path unstable, so calibration error grows
    exponentially; keep ``T`` moderate.

    Raises:
        PositivityError: first time a component becomes non-positive.
        IntegrationError: any other integrator failure.
    """
    y0 = initial.as_array()
    if np.any(~(y0 > 0)):
        raise PositivityError(COMPONENTS[int(np.flatnonzero(~(y0 > 0))[0])], 0.0)
    rhs = _guarded(lambda t, y: foc_rhs(params, constants, y), COMPONENTS)
    return integrate_ode(rhs, y0, (0.0, T), tol)


def scalar_u_rhs(params: ModelParams, constants: DerivedConstants, cal: Calibration, t: float,
                 u: float, tol: ToleranceSettings = DEFAULT_TOL) -> float:
    """Control equation after substituting the closed forms of k and c.

    ``du/dt = (varphi - z**q * exp(-xi*t) / (F* - F(t)) + delta*eta*u) * u``
    """
    q = (params.sigma - params.beta) / params.sigma
    z = cf.z_at(params, cal.z0, t)
    scaled = float(cf.scaled_tail(params, cal.z0, constants.xi, t, tol))
    remaining = math.exp(-constants.xi * t) * scaled
    if not remaining > np.finfo(float).tiny:
        raise HorizonExceededError("F* - F(t) below the floating-point floor", t)
    ratio = z**q / scaled  # c/k
    return (constants.varphi - ratio + params.delta * constants.eta * u) * u


def simulate_scalar_u(params: ModelParams, constants: DerivedConstants, cal: Calibration,
                      T: float, tol: ToleranceSettings = DEFAULT_TOL) -> DenseTrajectory:
    """Integrate the scalar control equation from ``cal.u0`` on [0, T]."""
    rhs = lambda t, y: np.array([scalar_u_rhs(params, constants, cal, t, y[0], tol)])
    return integrate_ode(rhs, [cal.u0], (0.0, T), tol)
