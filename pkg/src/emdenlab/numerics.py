"""Adaptive ODE integration, adaptive quadrature and cached antiderivatives.

The integrator is an embedded Dormand-Prince 5(4) pair with the first-same-
as-last optimization and a quartic dense-output interpolant, so trajectories
can be sampled at arbitrary output times without constraining the step
sequence.  Tableau entries are spelled as exact rationals; the test suite
checks their internal consistency identities (stage sums, interpolant
endpoint conditions) in exact arithmetic.

Quadrature is 15-point Gauss-Legendre per panel with recursive bisection:
a panel is accepted when its value agrees with the sum over its two halves
within the share of the tolerance allotted to it.  Antiderivatives built on
top cache every evaluated node, integrate from the nearest cached one, and
track an error budget so the cached network never drifts past the requested
tolerance.
"""

from __future__ import annotations

import bisect
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction as F
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "IntegratorConfig", "Trajectory", "integrate",
    "IntegrationError", "RhsError", "StepSizeUnderflowError",
    "quad", "QuadratureError", "AntiderivativeFn", "invert_monotone",
    "write_csv",
]


class IntegrationError(RuntimeError):
    pass


class RhsError(IntegrationError):
    """The right-hand side was not finite at the starting point."""


class StepSizeUnderflowError(IntegrationError):
    """The controller drove the step below resolution; t_reached says where."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(message)
        self.t_reached = t_reached


class QuadratureError(RuntimeError):
    pass


# Dormand-Prince 5(4) tableau, exact.
_C = [F(0), F(1, 5), F(3, 10), F(4, 5), F(8, 9), F(1), F(1)]
_A = [
    [],
    [F(1, 5)],
    [F(3, 40), F(9, 40)],
    [F(44, 45), F(-56, 15), F(32, 9)],
    [F(19372, 6561), F(-25360, 2187), F(64448, 6561), F(-212, 729)],
    [F(9017, 3168), F(-355, 33), F(46732, 5247), F(49, 176), F(-5103, 18656)],
    [F(35, 384), F(0), F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84)],
]
_B = [F(35, 384), F(0), F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84), F(0)]
# fifth-order weights minus the embedded fourth-order ones
_E = [F(71, 57600), F(0), F(-71, 16695), F(71, 1920),
      F(-17253, 339200), F(22, 525), F(-1, 40)]
# dense-output polynomial: y(t0+th) = y0 + h * K^T P (t, t^2, t^3, t^4)
_P = [
    [F(1), F(-8048581381, 2820520608), F(8663915743, 2820520608),
     F(-12715105075, 11282082432)],
    [F(0), F(0), F(0), F(0)],
    [F(0), F(131558114200, 32700410799), F(-68118460800, 10900136933),
     F(87487479700, 32700410799)],
    [F(0), F(-1754552775, 470086768), F(14199869525, 1410260304),
     F(-10690763975, 1880347072)],
    [F(0), F(127303824393, 49829197408), F(-318862633887, 49829197408),
     F(701980252875, 199316789632)],
    [F(0), F(-282668133, 205662961), F(2019193451, 616988883),
     F(-1453857185, 822651844)],
    [F(0), F(40617522, 29380423), F(-110615467, 29380423),
     F(69997945, 29380423)],
]

C_ARR = np.array([float(c) for c in _C])
A_ARR = [np.array([float(a) for a in row]) for row in _A]
B_ARR = np.array([float(b) for b in _B])
E_ARR = np.array([float(e) for e in _E])
P_ARR = np.array([[float(p) for p in row] for row in _P])

_ORDER_EXP = -1.0 / 5.0
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    first_step: float | None = None
    max_steps: int = 1_000_000


@dataclass
class Trajectory:
    """Accepted mesh plus a per-step interpolant of the method's order."""

    t: np.ndarray
    y: np.ndarray
    accepted: int
    rejected: int
    _seg_t: list = field(repr=False, default_factory=list)
    _seg_h: list = field(repr=False, default_factory=list)
    _seg_y: list = field(repr=False, default_factory=list)
    _seg_q: list = field(repr=False, default_factory=list)

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def __call__(self, t: float) -> np.ndarray:
        if not self._seg_t:
            if t == self.t0:
                return self.y[0].copy()
            raise ValueError("trajectory has no extent")
        lo, hi = sorted((self.t0, self.t_end))
        slack = 1e-10 * (hi - lo)
        if not (lo - slack <= t <= hi + slack):
            raise ValueError(f"t={t} outside the integrated interval [{lo}, {hi}]")
        if self.t[-1] >= self.t[0]:
            i = bisect.bisect_right(self._seg_t, t) - 1
        else:
            keys = [-s for s in self._seg_t]
            i = bisect.bisect_right(keys, -t) - 1
        i = min(max(i, 0), len(self._seg_t) - 1)
        th = (t - self._seg_t[i]) / self._seg_h[i]
        powers = np.array([th, th * th, th ** 3, th ** 4])
        return self._seg_y[i] + self._seg_q[i] @ powers

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self(float(t)) for t in ts])


def _wrap_rhs(rhs):
    def call(t, y):
        out = np.asarray(rhs(t, y), dtype=float)
        if out.shape != y.shape:
            raise IntegrationError(
                f"right-hand side returned shape {out.shape}, expected {y.shape}")
        return out
    return call


def _rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(v))))


def _initial_step(f, t0, y0, f0, direction, rel_tol, abs_tol, span):
    scale = abs_tol + rel_tol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = f(t0 + h0 * direction, y1)
    d2 = _rms((f1 - f0) / scale) / h0 if np.all(np.isfinite(f1)) else 1.0 / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate(rhs: Callable, t0: float, y0, t_end: float,
              config: IntegratorConfig | None = None) -> Trajectory:
    """Integrate y' = rhs(t, y) from t0 to t_end, either direction.

    Raises RhsError when the right-hand side is not finite at the starting
    point (a singular initial time), and StepSizeUnderflowError with the
    reached time when the error controller cannot advance (typically a
    finite-time blow-up inside the interval).
    """
    cfg = config or IntegratorConfig()
    t = float(t0)
    y = np.atleast_1d(np.asarray(y0, dtype=float))
    f = _wrap_rhs(rhs)

    ts, ys = [t], [y.copy()]
    traj = Trajectory(np.array(ts), np.array(ys), 0, 0)
    if t_end == t0:
        return traj

    try:
        k0 = f(t, y)
    except (ArithmeticError, ValueError) as exc:
        raise RhsError(f"right-hand side failed at t={t}: {exc}") from exc
    if not np.all(np.isfinite(k0)):
        raise RhsError(f"right-hand side is not finite at t={t}")

    direction = 1.0 if t_end > t0 else -1.0
    span = abs(t_end - t0)
    if cfg.first_step is not None:
        h = min(abs(cfg.first_step), span)
    else:
        h = _initial_step(f, t, y, k0, direction, cfg.rel_tol, cfg.abs_tol, span)
    h = min(h, cfg.max_step)

    K = np.empty((7, y.size))
    accepted = rejected = 0
    while (t_end - t) * direction > 0:
        h_min = max(10.0 * abs(np.nextafter(t, direction * math.inf) - t),
                    5e-15 * span)
        if h < h_min:
            raise StepSizeUnderflowError(
                f"step size underflow at t={t} (solution likely blows up here)",
                t_reached=t)
        if accepted + rejected >= cfg.max_steps:
            raise IntegrationError(
                f"exceeded {cfg.max_steps} steps at t={t}")

        clipped = h >= abs(t_end - t)
        h_use = abs(t_end - t) if clipped else h
        hd = h_use * direction

        K[0] = k0
        bad = False
        for i in range(1, 7):
            yi = y + hd * (K[:i].T @ A_ARR[i])
            K[i] = f(t + C_ARR[i] * hd, yi)
            if not np.all(np.isfinite(K[i])):
                bad = True
                break
        if not bad:
            y_new = y + hd * (K[:6].T @ B_ARR[:6])
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(hd * (K.T @ E_ARR) / scale)
        if bad or not math.isfinite(err):
            rejected += 1
            h = h_use * _MIN_FACTOR
            continue

        if err <= 1.0:
            t_new = t_end if clipped else t + hd
            q = hd * (K.T @ P_ARR)
            traj._seg_t.append(t)
            traj._seg_h.append(t_new - t)
            traj._seg_y.append(y.copy())
            traj._seg_q.append(q)
            ts.append(t_new)
            ys.append(y_new.copy())
            accepted += 1
            t, y, k0 = t_new, y_new, K[6].copy()
            factor = _MAX_FACTOR if err == 0 else min(
                _MAX_FACTOR, _SAFETY * err ** _ORDER_EXP)
        else:
            rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * err ** _ORDER_EXP)
        h = min(h_use * factor, cfg.max_step)

    traj.t = np.array(ts)
    traj.y = np.array(ys)
    traj.accepted, traj.rejected = accepted, rejected
    return traj


# ---------------------------------------------------------------------------
# quadrature

_G_NODES, _G_WEIGHTS = np.polynomial.legendre.leggauss(15)
_MAX_QUAD_DEPTH = 60
# disagreement at this level is double-precision noise, not truncation error
_QUAD_NOISE = 55.0 * np.finfo(float).eps


def _panel(f, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    total = 0.0
    for x, w in zip(_G_NODES, _G_WEIGHTS):
        v = f(mid + half * x)
        if not math.isfinite(v):
            raise QuadratureError(
                f"integrand is not finite at t={mid + half * x}")
        total += w * v
    return half * total


def quad(f: Callable[[float], float], a: float, b: float,
         tol: float = 1e-12) -> float:
    """Integral of f over [a, b] with absolute error about tol.

    Gauss panels refined by bisection; a panel is accepted when agreement
    with its two halves meets the length-proportional share of tol.
    """
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    inv_len = 1.0 / (b - a)

    def refine(lo: float, hi: float, whole: float, depth: int) -> float:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            raise QuadratureError(
                f"interval near t={mid} collapsed to machine resolution "
                "without converging")
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        noise = _QUAD_NOISE * (abs(whole) + abs(left) + abs(right))
        if abs(whole - left - right) <= max(tol * (hi - lo) * inv_len, noise):
            return left + right
        if depth >= _MAX_QUAD_DEPTH:
            raise QuadratureError(
                f"quadrature failed to converge on [{lo}, {hi}]")
        return (refine(lo, mid, left, depth + 1)
                + refine(mid, hi, right, depth + 1))

    return sign * refine(a, b, _panel(f, a, b), 0)


class AntiderivativeFn:
    """F(t) = integral of integrand from lower to t; F(lower) is exactly 0.

    Every evaluation integrates from the nearest previously computed node and
    is cached.  Each node carries an accumulated error budget; when chaining
    would push the budget past tol, the value is recomputed straight from the
    anchor instead, so every cached value stays within tol of the truth.
    """

    def __init__(self, integrand: Callable[[float], float], lower: float,
                 tol: float = 1e-12):
        self.integrand = integrand
        self.lower = float(lower)
        self.tol = float(tol)
        self._ts = [self.lower]
        self._vals = [0.0]
        self._budgets = [0.0]

    def __call__(self, t: float) -> float:
        t = float(t)
        i = bisect.bisect_left(self._ts, t)
        if i < len(self._ts) and self._ts[i] == t:
            return self._vals[i]
        cands = [j for j in (i - 1, i) if 0 <= j < len(self._ts)]
        j = min(cands, key=lambda j: abs(self._ts[j] - t))
        gap = t - self._ts[j]
        if abs(gap) <= 1e-13 * max(1.0, abs(t)):
            # below quadrature resolution (root finders probe such points);
            # a trapezoid link is exact to O(gap^3) here, and skipping the
            # cache keeps the node list from filling with near-duplicates
            f0, f1 = self.integrand(self._ts[j]), self.integrand(t)
            return self._vals[j] + 0.5 * (f0 + f1) * gap
        link_tol = self.tol / 8.0
        if self._budgets[j] + link_tol <= self.tol:
            val = self._vals[j] + quad(self.integrand, self._ts[j], t, link_tol)
            budget = self._budgets[j] + link_tol
        else:
            val = quad(self.integrand, self.lower, t, self.tol / 2.0)
            budget = self.tol / 2.0
        i = bisect.bisect_left(self._ts, t)
        self._ts.insert(i, t)
        self._vals.insert(i, val)
        self._budgets.insert(i, budget)
        return val


def invert_monotone(g: Callable[[float], float], target: float,
                    lo: float, hi: float, tol: float = 1e-13) -> float:
    """Solve g(t) = target for monotone g on [lo, hi] by bisection."""
    glo, ghi = g(lo), g(hi)
    if glo == target:
        return lo
    if ghi == target:
        return hi
    if (glo - target) * (ghi - target) > 0:
        raise ValueError(f"target {target} not bracketed on [{lo}, {hi}]")
    increasing = ghi > glo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi or hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            return mid
        gm = g(mid)
        if (gm < target) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def write_csv(dest, header: Sequence[str], rows) -> None:
    """Rows of floats at full double precision, deterministic formatting."""
    def emit(fh):
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % float(v) for v in row) + "\n")

    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="ascii", newline="") as fh:
            emit(fh)
    else:
        emit(dest)
