"""Closed-form trajectories of the Lucas-Uzawa model with externality.

Everything is driven by the composite ratio ``z = h**eta * u / k``, whose
dynamics do not involve ``u`` or ``c/k``::

    dz/dt = a*z - gamma*z**(2 - beta)

This is a Bernoulli equation; with ``w = z**(beta - 1)`` it becomes linear,
``w(t) = gamma/a + (w0 - gamma/a) * exp(-(1 - beta)*a*t)``.

The integrals ``F(t)`` and ``B(t)`` and their limits are evaluated by
adaptive quadrature. Wherever a formula contains ``F* - F(t)`` (or
``B* - B(t)``) the difference is computed directly as a tail integral,
scaled by ``exp(rate*t)``, so that nothing cancels catastrophically at long
horizons. All evaluators accept a scalar or an array of times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DivergentIntegralError, EvaluationError
from .numerics import DEFAULT_TOL, QuadratureResult, ToleranceSettings, adaptive_quadrature
from .params import DerivedConstants, InitialEndowment, ModelParams, derive_constants

# |w(T) - w_inf| <= SETTLE_REL * w_inf defines the truncation point of the improper integrals
SETTLE_REL = 1e-12


@dataclass(frozen=True)
class ZPath:
    """The closed-form ratio path for one initial value ``z0``."""

    z0: float
    w_inf: float
    w0: float
    decay: float
    beta: float

    @classmethod
    def from_params(cls, params: ModelParams, z0: float) -> "ZPath":
        if not z0 > 0:
            raise ValueError(f"z0 must be positive, got {z0}")
        dc = derive_constants(params)
        return cls(
            z0=z0,
            w_inf=params.gamma / dc.a,
            w0=z0 ** (params.beta - 1.0),
            decay=(1.0 - params.beta) * dc.a,
            beta=params.beta,
        )

    @property
    def z_star(self) -> float:
        return self.w_inf ** (1.0 / (self.beta - 1.0))

    def w(self, t):
        return self.w_inf + (self.w0 - self.w_inf) * np.exp(-self.decay * np.asarray(t, dtype=float))

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.z0 if t == 0 else float(self.w(t) ** (1.0 / (self.beta - 1.0)))
        z = self.w(t) ** (1.0 / (self.beta - 1.0))
        return np.where(np.asarray(t) == 0, self.z0, z)

    def settle_time(self, rel: float = SETTLE_REL) -> float:
        gap = abs(self.w0 - self.w_inf)
        if gap <= rel * self.w_inf:
            return 0.0
        return math.log(gap / (rel * self.w_inf)) / self.decay


@dataclass(frozen=True)
class Calibration:
    """Saddle-path initial data.

    ``lambda0`` and ``mu0`` are the shadow prices of physical and human
    capital implied by the first-order conditions for ``c`` and ``u``.
    """

    u0: float
    c0: float
    z0: float
    F_star: float
    B_star: float
    lambda0: float
    mu0: float

    def jump_gap(self, params: ModelParams) -> float:
        """(varphi + delta*eta*u0)*F* - delta*eta*u0*B*; zero on the saddle path."""
        dc = derive_constants(params)
        de = params.delta * dc.eta
        return (dc.varphi + de * self.u0) * self.F_star - de * self.u0 * self.B_star


def z_at(params: ModelParams, z0: float, t):
    """Ratio ``z(t)`` from the Bernoulli closed form."""
    return ZPath.from_params(params, z0)(t)


def _exponent(params: ModelParams) -> float:
    return (params.sigma - params.beta) / params.sigma


def _check_rate(rate: float, name: str) -> None:
    if not rate > 0:
        raise DivergentIntegralError(f"{name} diverges: decay rate {rate:.6g} <= 0")


def _as_times(t) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("times must be finite and non-negative")
    return arr


def _unique_sorted(t: np.ndarray):
    ts, inverse = np.unique(t, return_inverse=True)
    return ts, inverse


def scaled_tail(params: ModelParams, z0: float, rate: float, t,
                tol: ToleranceSettings = DEFAULT_TOL):
    """``exp(rate*t) * integral_t^inf z(s)**q * exp(-rate*s) ds`` with q = (sigma-beta)/sigma.

    The integral is truncated where z has settled to ``z_star`` and the
    remainder is added analytically. Evaluated at several times, the values
    are accumulated backwards from the latest one, one short quadrature per
    gap.
    """
    _check_rate(rate, "tail integral")
    path = ZPath.from_params(params, z0)
    q = _exponent(params)
    zq_star = path.z_star**q
    T_settle = path.settle_time()
    times = _as_times(t)
    ts, inverse = _unique_sorted(times)
    out = np.empty(ts.size)

    def piece(start: float, length: float) -> float:
        if length <= 0:
            return 0.0
        res = adaptive_quadrature(
            lambda tau: path(start + tau) ** q * math.exp(-rate * tau), 0.0, length, tol.quad_tol
        )
        return res.value

    last = ts[-1]
    horizon = max(T_settle - last, 0.0)
    out[-1] = piece(last, horizon) + zq_star * math.exp(-rate * horizon) / rate
    for i in range(ts.size - 2, -1, -1):
        gap = ts[i + 1] - ts[i]
        out[i] = math.exp(-rate * gap) * out[i + 1] + piece(ts[i], gap)
    res = out[inverse]
    return res[0] if np.ndim(t) == 0 else res


def cumulative_integral(params: ModelParams, z0: float, rate: float, t,
                        tol: ToleranceSettings = DEFAULT_TOL):
    """``integral_0^t z(s)**q * exp(-rate*s) ds``, accumulated forward over sorted times."""
    path = ZPath.from_params(params, z0)
    q = _exponent(params)
    times = _as_times(t)
    ts, inverse = _unique_sorted(times)
    out = np.empty(ts.size)
    acc, prev = 0.0, 0.0
    for i, ti in enumerate(ts):
        if ti > prev:
            acc += adaptive_quadrature(
                lambda s: path(s) ** q * math.exp(-rate * s), prev, ti, tol.quad_tol
            ).value
        out[i] = acc
        prev = ti
    res = out[inverse]
    return res[0] if np.ndim(t) == 0 else res


def F_at(params: ModelParams, z0: float, t, tol: ToleranceSettings = DEFAULT_TOL):
    dc = derive_constants(params)
    return cumulative_integral(params, z0, dc.xi, t, tol)


def B_at(params: ModelParams, z0: float, t, tol: ToleranceSettings = DEFAULT_TOL):
    dc = derive_constants(params)
    return cumulative_integral(params, z0, dc.xi - dc.varphi, t, tol)


def F_star(params: ModelParams, z0: float, tol: ToleranceSettings = DEFAULT_TOL) -> float:
    dc = derive_constants(params)
    _check_rate(dc.xi, "F*")
    return float(scaled_tail(params, z0, dc.xi, 0.0, tol))


def B_star(params: ModelParams, z0: float, tol: ToleranceSettings = DEFAULT_TOL) -> float:
    dc = derive_constants(params)
    _check_rate(dc.xi - dc.varphi, "B*")
    return float(scaled_tail(params, z0, dc.xi - dc.varphi, 0.0, tol))


def F_remaining(params: ModelParams, z0: float, t, tol: ToleranceSettings = DEFAULT_TOL):
    """F* - F(t), computed as a tail integral."""
    dc = derive_constants(params)
    return np.exp(-dc.xi * np.asarray(t, dtype=float)) * scaled_tail(params, z0, dc.xi, t, tol)


@dataclass(frozen=True)
class _Pieces:
    t: np.ndarray
    z: np.ndarray
    SF: np.ndarray  # exp(xi*t) * (F* - F(t))
    SB: np.ndarray  # exp((xi-varphi)*t) * (B* - B(t))


def _pieces(params: ModelParams, z0: float, t, tol: ToleranceSettings, need_b: bool = True) -> _Pieces:
    dc = derive_constants(params)
    times = _as_times(t)
    z = np.atleast_1d(z_at(params, z0, times))
    SF = np.atleast_1d(scaled_tail(params, z0, dc.xi, times, tol))
    SB = np.atleast_1d(scaled_tail(params, z0, dc.xi - dc.varphi, times, tol)) if need_b else SF * np.nan
    return _Pieces(times, z, SF, SB)


def _shape(t, arr):
    return float(arr[0]) if np.ndim(t) == 0 else arr


def _k(params, dc, endowment, cal, pc: _Pieces):
    scale = endowment.k0 * cal.z0 / cal.F_star
    return scale / pc.z * pc.SF * np.exp(dc.chi * pc.t)


def _c(params, dc, endowment, cal, pc: _Pieces):
    scale = endowment.k0 * cal.z0 / cal.F_star
    return scale * pc.z ** (-params.beta / params.sigma) * np.exp(dc.chi * pc.t)


def _u1(params, dc, cal, pc: _Pieces):
    de = params.delta * dc.eta
    jump = cal.jump_gap(params)
    lead = jump * np.exp((dc.xi - dc.varphi) * pc.t)
    rest = de * cal.u0 * (pc.SB - pc.SF)
    den = lead + rest
    bad = np.abs(den) <= 1e3 * np.finfo(float).eps * (np.abs(lead) + de * cal.u0 * (pc.SB + pc.SF))
    if np.any(bad):
        raise EvaluationError("vanishing denominator in first-set control", float(pc.t[bad][0]))
    return dc.varphi * cal.u0 * pc.SF / den


def _u2_numerator_const(params, endowment, cal) -> float:
    b, s = params.beta, params.sigma
    A = params.gamma * b * (1.0 - s)
    D = params.rho + params.pi - params.pi * s
    return cal.z0 ** (b - 1.0) * (s * cal.c0 - D * endowment.k0) + A * endowment.k0


def _u2(params, dc, endowment, cal, pc: _Pieces):
    b, s = params.beta, params.sigma
    A = params.gamma * b * (1.0 - s)
    D = params.rho + params.pi - params.pi * s
    num = cal.u0 / endowment.k0 * _u2_numerator_const(params, endowment, cal) * pc.SF
    first = (A - D * pc.z ** (b - 1.0)) * pc.SF
    second = s * pc.z ** (b - b / s)
    den = first + second
    bad = np.abs(den) <= 1e3 * np.finfo(float).eps * (np.abs(first) + np.abs(second))
    if np.any(bad):
        raise EvaluationError("vanishing denominator in second-set control", float(pc.t[bad][0]))
    return num / den


def _h(params, dc, endowment, cal, pc: _Pieces, u):
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise ValueError("u_value must be positive")
    base = cal.u0 * np.exp(dc.chi * pc.t) * pc.SF / (cal.F_star * u)
    return endowment.h0 * base ** (1.0 / dc.eta)


def k_at(params: ModelParams, endowment: InitialEndowment, cal: Calibration, t,
         tol: ToleranceSettings = DEFAULT_TOL):
    """Physical capital ``(k0*z0/F*) * z(t)**-1 * (F* - F(t)) * exp(phi*t)``."""
    dc = derive_constants(params)
    return _shape(t, _k(params, dc, endowment, cal, _pieces(params, cal.z0, t, tol, need_b=False)))


def c_at(params: ModelParams, endowment: InitialEndowment, cal: Calibration, t):
    """Consumption ``(k0*z0/F*) * z(t)**(-beta/sigma) * exp(chi*t)``."""
    dc = derive_constants(params)
    times = _as_times(t)
    z = np.atleast_1d(z_at(params, cal.z0, times))
    pc = _Pieces(times, z, z * np.nan, z * np.nan)
    return _shape(t, _c(params, dc, endowment, cal, pc))


def u_form1_at(params: ModelParams, cal: Calibration, t, tol: ToleranceSettings = DEFAULT_TOL):
    """Control path of the first solution set (solution of the scalar control ODE)."""
    dc = derive_constants(params)
    return _shape(t, _u1(params, dc, cal, _pieces(params, cal.z0, t, tol)))


def u_form2_at(params: ModelParams, endowment: InitialEndowment, cal: Calibration, t,
               tol: ToleranceSettings = DEFAULT_TOL):
    """Control path of the second solution set, evaluated with z = z(t)."""
    dc = derive_constants(params)
    return _shape(t, _u2(params, dc, endowment, cal, _pieces(params, cal.z0, t, tol, need_b=False)))


def h_at(params: ModelParams, endowment: InitialEndowment, cal: Calibration, t, u_value,
         tol: ToleranceSettings = DEFAULT_TOL):
    """Human capital for a supplied control value ``u(t)``.

    ``h0 * (u0 * exp(phi*t) * (F* - F(t)) / (F* * u))**((1-beta)/(1-beta+theta))``
    """
    dc = derive_constants(params)
    pc = _pieces(params, cal.z0, t, tol, need_b=False)
    return _shape(t, _h(params, dc, endowment, cal, pc, np.broadcast_to(u_value, pc.t.shape)))


def costates_at(params: ModelParams, k, h, c, u):
    """Shadow prices from the first-order conditions for ``c`` and ``u``.

    Returns ``(lambda, mu)`` with ``lambda = c**-sigma`` and
    ``mu = (1-beta)*gamma*z**(1-beta)*k*lambda / (delta*h*u)``.
    """
    k, h, c, u = (np.asarray(x, dtype=float) for x in (k, h, c, u))
    if np.any(~(k > 0)) or np.any(~(h > 0)) or np.any(~(c > 0)) or np.any(~(u > 0)):
        raise ValueError("costates need positive k, h, c, u")
    dc = derive_constants(params)
    b = params.beta
    lam = c ** (-params.sigma)
    z = h**dc.eta * u / k
    mu = (1.0 - b) * params.gamma * z ** (1.0 - b) * k * lam / (params.delta * h * u)
    if np.ndim(lam) == 0:
        return float(lam), float(mu)
    return lam, mu


def discounted_utility(c: Callable[[float], float], sigma: float, rho: float, growth: float,
                       T: float, tol: float = 1e-12) -> QuadratureResult:
    """Integrate CRRA utility ``(c**(1-sigma) - 1)/(1-sigma) * exp(-rho*t)`` over [0, inf).

    ``c`` is integrated numerically on [0, T]; beyond T it is replaced by its
    asymptote ``c(T)*exp(growth*(t - T))`` and integrated analytically.

    Raises:
        DivergentIntegralError: if ``rho + (sigma - 1)*growth <= 0``.
    """
    tail_rate = rho + (sigma - 1.0) * growth
    _check_rate(tail_rate, "welfare integral")
    _check_rate(rho, "welfare integral")
    one_m = 1.0 - sigma

    def flow(t):
        return (c(t) ** one_m - 1.0) / one_m * math.exp(-rho * t)

    body = adaptive_quadrature(flow, 0.0, T, tol)
    cT = c(T)
    tail = math.exp(-rho * T) * (cT**one_m / (one_m * tail_rate) - 1.0 / (one_m * rho))
    return QuadratureResult(body.value + tail, body.error_estimate, body.subdivisions_used)


def welfare(params: ModelParams, endowment: InitialEndowment, cal: Calibration,
            tol: ToleranceSettings = DEFAULT_TOL) -> QuadratureResult:
    """Lifetime welfare ``V0`` along the closed-form consumption path."""
    dc = derive_constants(params)
    path = ZPath.from_params(params, cal.z0)
    scale = endowment.k0 * cal.z0 / cal.F_star
    expo = -params.beta / params.sigma

    def c(t):
        return scale * path(t) ** expo * math.exp(dc.chi * t)

    res = discounted_utility(c, params.sigma, params.rho, dc.chi, path.settle_time(), tol.quad_tol)
    # the asymptote replaces z(t) by z_star beyond T, a relative error of order SETTLE_REL
    tail_err = abs(res.value) * SETTLE_REL * abs(expo / (params.beta - 1.0))
    return QuadratureResult(res.value, res.error_estimate + tail_err, res.subdivisions_used)
