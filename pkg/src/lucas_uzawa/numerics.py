"""Numerical kernels: Dormand-Prince integration, adaptive quadrature, root finding.

The integrator is written out here because the verification code relies on
two properties a black-box solver does not promise: a fixed-step mode for
order checks, and dense output that reproduces breakpoints exactly.
Quadrature and Brent's method are thin wrappers over QUADPACK and
``scipy.optimize.brentq``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo

from .errors import IntegrationError, QuadratureError, RootFindingError


@dataclass(frozen=True)
class ToleranceSettings:
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    quad_tol: float = 1e-12
    root_tol: float = 1e-12
    max_steps: int = 1_000_000

    def __post_init__(self):
        for name in ("ode_rel_tol", "ode_abs_tol", "quad_tol", "root_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


DEFAULT_TOL = ToleranceSettings()

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between 5th and embedded 4th order weights
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# continuous extension: y(t0 + s*h) = y0 + h * K^T @ _P @ [s, s^2, s^3, s^4]
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_ORDER = 5
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_PI_BETA = 0.04
_PI_ALPHA = 1.0 / _ORDER - 0.75 * _PI_BETA


class DenseTrajectory:
    """Piecewise quartic interpolant produced by :func:`integrate_ode`.

    ``t`` holds the strictly increasing breakpoints and ``y`` the stored
    solution, shape ``(len(t), n)``. Calling the object at a breakpoint
    returns the stored value unchanged.
    """

    def __init__(self, t: np.ndarray, y: np.ndarray, coeffs: np.ndarray, steps: int = 0,
                 rejected: int = 0):
        self.t = t
        self.y = y
        self._q = coeffs  # (len(t)-1, 4, n): h * K^T @ P per segment
        self.steps = steps
        self.rejected = rejected

    @property
    def t_span(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        t0, t1 = self.t_span
        if np.any(tq < t0) or np.any(tq > t1):
            raise ValueError(f"evaluation outside [{t0}, {t1}]")
        idx = np.searchsorted(self.t, tq, side="right") - 1
        out = np.empty((tq.size, self.y.shape[1]))
        at_end = idx >= len(self.t) - 1
        out[at_end] = self.y[-1]
        inner = ~at_end
        if np.any(inner):
            i = idx[inner]
            h = self.t[i + 1] - self.t[i]
            s = (tq[inner] - self.t[i]) / h
            powers = np.stack([s, s**2, s**3, s**4], axis=1)
            incr = np.einsum("mj,mjn->mn", powers, self._q[i])
            # s == 0 gives incr == 0 exactly, so breakpoints are reproduced bit-for-bit
            out[inner] = self.y[i] + incr
        return out[0] if scalar else out


def _initial_step(rhs, t0, y0, f0, direction_span, rtol, atol):
    scale = atol + np.abs(y0) * rtol
    d0 = np.linalg.norm(y0 / scale) / math.sqrt(y0.size)
    d1 = np.linalg.norm(f0 / scale) / math.sqrt(y0.size)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    f1 = np.asarray(rhs(t0 + h0, y0 + h0 * f0), dtype=float)
    d2 = np.linalg.norm((f1 - f0) / scale) / math.sqrt(y0.size) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / _ORDER)
    return min(100 * h0, h1, direction_span)


def _stages(rhs, t, y, f0, h):
    n = y.size
    K = np.empty((7, n))
    K[0] = f0
    for s in range(1, 7):
        dy = np.dot(_A[s], K[:s]) * h
        K[s] = rhs(t + _C[s] * h, y + dy)
    return K


def integrate_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_span: Sequence[float],
    tol: ToleranceSettings = DEFAULT_TOL,
    *,
    fixed_step: Optional[float] = None,
    first_step: Optional[float] = None,
) -> DenseTrajectory:
    """Integrate ``y' = rhs(t, y)`` with the Dormand-Prince 5(4) pair.

    Step size follows a proportional-integral controller on the embedded
    error estimate. With ``fixed_step`` the controller is bypassed and every
    step has that length (the last one is shortened to land on ``t1``).

    Raises:
        IntegrationError: on step-size underflow, too many steps, or a
            non-finite right-hand side.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    n = y.size
    if t1 < t0:
        raise ValueError("t_span must satisfy t1 >= t0")
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite initial value", t0)

    def f(t, yy):
        val = np.atleast_1d(np.asarray(rhs(t, yy), dtype=float))
        if not np.all(np.isfinite(val)):
            raise IntegrationError("non-finite right-hand side", t)
        return val

    ts = [t0]
    ys = [y.copy()]
    qs = []
    if t1 == t0:
        return DenseTrajectory(np.array(ts), np.array(ys), np.empty((0, 4, n)))

    rtol, atol = tol.ode_rel_tol, tol.ode_abs_tol
    t = t0
    fy = f(t, y)
    if fixed_step is not None:
        if not fixed_step > 0:
            raise ValueError("fixed_step must be positive")
        h = fixed_step
    elif first_step is not None:
        h = first_step
    else:
        h = _initial_step(f, t, y, fy, t1 - t0, rtol, atol)
    err_old = 1e-4
    steps = rejected = 0
    just_rejected = False

    while t < t1:
        if steps >= tol.max_steps:
            raise IntegrationError("maximum number of steps exceeded", t)
        min_step = 10 * np.finfo(float).eps * max(abs(t), 1.0)
        if h < min_step:
            raise IntegrationError("step size underflow", t)
        last = t + h >= t1 or (fixed_step is not None and t + h >= t1 - min_step)
        h_try = t1 - t if last else h
        K = _stages(f, t, y, fy, h_try)
        y_new = y + h_try * np.dot(_B[:6], K[:6])
        K[6] = f(t + h_try, y_new)

        if fixed_step is not None:
            accept = True
        else:
            scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
            err = np.linalg.norm(h_try * np.dot(_E, K) / scale) / math.sqrt(n)
            accept = err <= 1.0
            if accept:
                if err == 0.0:
                    factor = _MAX_FACTOR
                else:
                    factor = _SAFETY * err**-_PI_ALPHA * err_old**_PI_BETA
                    factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
                if just_rejected:
                    factor = min(factor, 1.0)
                just_rejected = False
                err_old = max(err, 1e-4)
            else:
                rejected += 1
                just_rejected = True
                factor = max(_MIN_FACTOR, _SAFETY * err**-_PI_ALPHA)
                h = h_try * factor
                continue

        qs.append(h_try * (K.T @ _P).T)
        t = t1 if last else t + h_try
        y = y_new
        fy = K[6]
        ts.append(t)
        ys.append(y.copy())
        steps += 1
        if fixed_step is None:
            h = h_try * factor

    return DenseTrajectory(np.array(ts), np.array(ys), np.array(qs), steps, rejected)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    subdivisions_used: int


def adaptive_quadrature(
    g: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    limit: int = 500,
) -> QuadratureResult:
    """Integrate ``g`` over ``[a, b]`` with adaptive Gauss-Kronrod (21-point).

    The absolute and relative targets are both ``tol``, so the error bound
    is ``max(tol, tol*|value|)``.

    Raises:
        QuadratureError: if the subdivision limit is hit or ``g`` returns a
            non-finite sample.
    """
    if b < a:
        raise ValueError("require b >= a")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)

    def checked(x):
        v = g(x)
        if not math.isfinite(v):
            raise QuadratureError(f"non-finite integrand sample at x={x:.12g}")
        return v

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        out = _spi.quad(checked, a, b, epsabs=tol, epsrel=tol, limit=limit, full_output=1)
    value, err, info = out[:3]
    if len(out) > 3:
        message = str(out[3])
        if "maximum number of subdivisions" in message:
            raise QuadratureError(f"subdivision limit reached on [{a}, {b}]")
        # roundoff-limited runs are accepted when the reported bound is still small
        if not err <= 1e3 * max(tol, tol * abs(value)):
            raise QuadratureError(f"quadrature did not converge on [{a}, {b}]: {message}")
    return QuadratureResult(float(value), float(err), int(info["last"]))


def find_root(
    g: Callable[[float], float],
    bracket: Sequence[float],
    tol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """Brent's method on a sign-changing bracket; never leaves the bracket."""
    lo, hi = float(bracket[0]), float(bracket[1])
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0:
        raise RootFindingError(f"no sign change on [{lo}, {hi}]: g={glo:.3g}, {ghi:.3g}")
    try:
        root, res = _spo.brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                                maxiter=maxiter, full_output=True, disp=False)
    except (ValueError, RuntimeError) as exc:
        raise RootFindingError(str(exc)) from None
    if not res.converged:
        raise RootFindingError(f"maximum iterations reached ({res.flag})")
    return float(root)


@dataclass(frozen=True)
class BracketScan:
    grid: np.ndarray
    values: np.ndarray
    brackets: list[tuple[float, float]]
    skipped: list[float]

    def sign_pattern(self) -> str:
        return "".join("+" if v > 0 else "-" if v < 0 else "0" if v == 0 else "?"
                       for v in self.values)


def scan_brackets(g: Callable[[float], float], lo: float, hi: float, n_points: int) -> BracketScan:
    """Sample ``g`` on a uniform grid and list every sign-change subinterval.

    A sample that is exactly zero closes the subinterval to its left. Samples
    where ``g`` is not finite are dropped and reported in ``skipped``;
    neighbouring finite samples are then compared directly.
    """
    if not lo < hi:
        raise ValueError("require lo < hi")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    grid = np.linspace(lo, hi, n_points)
    values = np.array([g(x) for x in grid], dtype=float)
    finite = np.isfinite(values)
    skipped = [float(x) for x in grid[~finite]]
    xs, vs = grid[finite], values[finite]
    brackets = []
    if len(xs) >= 2 and vs[0] == 0.0:
        brackets.append((float(xs[0]), float(xs[1])))
    for i in range(1, len(xs)):
        a, b = vs[i - 1], vs[i]
        if (a != 0.0 and b == 0.0) or a * b < 0:
            brackets.append((float(xs[i - 1]), float(xs[i])))
    return BracketScan(grid, values, brackets, skipped)


def scan_bracket(g: Callable[[float], float], lo: float, hi: float,
                 n_points: int) -> Optional[tuple[float, float]]:
    """Return the leftmost sign-change subinterval, or None if there is none."""
    found = scan_brackets(g, lo, hi, n_points).brackets
    return found[0] if found else None
