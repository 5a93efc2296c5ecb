"""Shared numerical kernels: adaptive Runge-Kutta, quadrature, roots, rate fits."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicHermiteSpline

from ._jit import USE_NUMBA, njit


class IntegrationError(RuntimeError):
    """Adaptive ODE integration aborted (step underflow, NaN, step budget)."""


class QuadratureError(RuntimeError):
    pass


class RootBracketError(ValueError):
    pass


class RateFitError(ValueError):
    pass


# Dormand-Prince 5(4), first-same-as-last.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
# b5 - b4
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200,
               22 / 525, -1 / 40])

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NAN = 2
STATUS_MAX_STEPS = 3


def _dopri_loop(rhs, params, t0, y0, t_end, rtol, atol, h0, max_steps):
    # numba-compatible subset only; compiled below when numba is active
    dim = y0.shape[0]
    cap = 1024
    ts = np.empty(cap)
    ys = np.empty((cap, dim))
    fs = np.empty((cap, dim))
    K = np.empty((7, dim))

    t = t0
    y = y0.copy()
    f = rhs(t, y, params)
    for i in range(dim):
        if not np.isfinite(f[i]):
            return ts, ys, fs, 0, STATUS_NAN
    ts[0] = t
    for i in range(dim):
        ys[0, i] = y[i]
        fs[0, i] = f[i]
    n = 1

    span = t_end - t0
    h = h0
    if h <= 0.0:
        d0 = 0.0
        d1 = 0.0
        for i in range(dim):
            sc = atol + rtol * abs(y[i])
            d0 += (y[i] / sc) ** 2
            d1 += (f[i] / sc) ** 2
        d0 = np.sqrt(d0 / dim)
        d1 = np.sqrt(d1 / dim)
        if d0 < 1e-5 or d1 < 1e-5:
            h = 1e-6
        else:
            h = 0.01 * d0 / d1
        h = min(h, 0.1 * span)
    h_floor = 1e-14 * max(1.0, abs(t0), abs(t_end))

    ynew = np.empty(dim)
    ytmp = np.empty(dim)
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return ts, ys, fs, n, STATUS_MAX_STEPS
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        for i in range(dim):
            K[0, i] = f[i]
        for s in range(1, 7):
            for i in range(dim):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * K[j, i]
                ytmp[i] = y[i] + h * acc
            fk = rhs(t + _C[s] * h, ytmp, params)
            for i in range(dim):
                K[s, i] = fk[i]
                if not np.isfinite(fk[i]):
                    return ts, ys, fs, n, STATUS_NAN
        # stage 7 was evaluated at the 5th-order solution (FSAL)
        for i in range(dim):
            ynew[i] = ytmp[i]
        err = 0.0
        for i in range(dim):
            e = 0.0
            for s in range(7):
                e += _E[s] * K[s, i]
            e *= h
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err += (e / sc) ** 2
        err = np.sqrt(err / dim)
        steps += 1
        if err <= 1.0:
            t = t_end if last else t + h
            for i in range(dim):
                y[i] = ynew[i]
                f[i] = K[6, i]
            if n == cap:
                cap *= 2
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, dim))
                fs2 = np.empty((cap, dim))
                for r in range(n):
                    ts2[r] = ts[r]
                    for i in range(dim):
                        ys2[r, i] = ys[r, i]
                        fs2[r, i] = fs[r, i]
                ts = ts2
                ys = ys2
                fs = fs2
            ts[n] = t
            for i in range(dim):
                ys[n, i] = y[i]
                fs[n, i] = f[i]
            n += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = h * fac
        if h < h_floor:
            return ts, ys, fs, n, STATUS_UNDERFLOW
    return ts, ys, fs, n, STATUS_OK


_dopri_compiled = njit(_dopri_loop) if USE_NUMBA else None


@dataclass
class OdeProblem:
    """First-order system ``y' = rhs(t, y)``.

    When ``params`` is given the right-hand side is called as
    ``rhs(t, y, params)``; an ``@njit`` right-hand side with an array of
    params runs the whole integration loop compiled.
    """
    rhs: Callable
    t0: float
    y0: np.ndarray
    params: Optional[np.ndarray] = None

    def __post_init__(self):
        self.y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        if self.y0.ndim != 1 or self.y0.size < 1:
            raise ValueError("state vector must be 1-D with dimension >= 1")

    @property
    def dimension(self) -> int:
        return self.y0.size


@dataclass
class Trajectory:
    """Accepted steps of an adaptive run with C^1 Hermite dense output."""
    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    _spline: Optional[CubicHermiteSpline] = field(default=None, repr=False)

    def _interp(self):
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.t, self.y, self.dy, axis=0)
        return self._spline

    def __call__(self, tq):
        tq = np.asarray(tq, dtype=float)
        if np.any(tq < self.t[0] - 1e-12) or np.any(tq > self.t[-1] + 1e-12):
            raise ValueError(f"time outside trajectory range [{self.t[0]}, {self.t[-1]}]")
        return self._interp()(np.clip(tq, self.t[0], self.t[-1]))

    def derivative(self, tq):
        tq = np.clip(np.asarray(tq, dtype=float), self.t[0], self.t[-1])
        return self._interp().derivative()(tq)

    def __len__(self):
        return self.t.size


def integrate_ode(problem: OdeProblem, t_end: float, rel_tol: float = 1e-10,
                  abs_tol: float = 1e-12, first_step: float = 0.0,
                  max_steps: int = 50_000_000) -> Trajectory:
    """Dormand-Prince 5(4) with per-step error control.

    Returns every accepted step, so the samples are monotone and include
    both ``t0`` and ``t_end``.
    """
    t0 = float(problem.t0)
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")

    rhs, params = problem.rhs, problem.params
    compiled = (_dopri_compiled is not None and params is not None
                and hasattr(rhs, "py_func"))
    if compiled:
        out = _dopri_compiled(rhs, np.asarray(params, dtype=float), t0, problem.y0,
                              float(t_end), rel_tol, abs_tol, first_step, max_steps)
    else:
        if params is None:
            user = rhs

            def rhs(t, y, _p):
                return np.asarray(user(t, y), dtype=float)
            params = np.empty(0)
        elif hasattr(rhs, "py_func"):
            rhs = rhs.py_func
        out = _dopri_loop(rhs, params, t0, problem.y0, float(t_end), rel_tol,
                          abs_tol, first_step, max_steps)
    ts, ys, fs, n, status = out
    if status == STATUS_NAN:
        raise IntegrationError(f"non-finite right-hand side near t={ts[n - 1] if n else t0}")
    if status == STATUS_UNDERFLOW:
        raise IntegrationError(f"step size underflow at t={ts[n - 1]} (stiff or blow-up)")
    if status == STATUS_MAX_STEPS:
        raise IntegrationError(f"step budget {max_steps} exhausted at t={ts[n - 1]}")
    return Trajectory(ts[:n].copy(), ys[:n].copy(), fs[:n].copy())


def quad_weighted(f: Callable[[float], float], interval: Sequence[float],
                  tol: float = 1e-12) -> float:
    """Adaptive Gauss-Kronrod (QUADPACK QAGS) on ``[lo, hi]``.

    The epsilon-extrapolation in QAGS takes care of algebraic zeros or
    integrable singularities of the weight at the endpoints.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError("need lo < hi")
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=500)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    if not np.isfinite(val):
        raise QuadratureError("non-finite quadrature value")
    return val


def find_root(g: Callable[[float], float], bracket: Sequence[float],
              tol: float = 1e-14) -> float:
    lo, hi = map(float, bracket)
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise RootBracketError(f"no sign change on [{lo}, {hi}]: g={glo}, {ghi}")
    return optimize.brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class RateFit:
    exponent: float
    amplitude: float
    window: tuple
    residual_rms: float
    n_samples: int = 0


DEFAULT_WINDOW = (1e2, 1e4)


def fit_rate(series, window=DEFAULT_WINDOW) -> RateFit:
    """Least-squares fit of ``ln v = ln C + p ln(1+t)`` over ``window``.

    ``series`` is a pair of arrays ``(t, v)`` or an (n, 2) array.
    """
    t, v = _as_series(series)
    lo, hi = window
    if not lo < hi:
        raise ValueError("window needs t_lo < t_hi")
    sel = (t >= lo) & (t <= hi) & (v > 0) & np.isfinite(v)
    if np.count_nonzero(sel) < 8:
        raise RateFitError(f"only {np.count_nonzero(sel)} positive samples in {window}")
    x = np.log1p(t[sel])
    yv = np.log(v[sel])
    slope, icpt = np.polyfit(x, yv, 1)
    res = yv - (slope * x + icpt)
    return RateFit(float(slope), float(np.exp(icpt)), (float(lo), float(hi)),
                   float(np.sqrt(np.mean(res ** 2))), int(sel.sum()))


def _as_series(series):
    if isinstance(series, tuple) and len(series) == 2:
        t, v = series
    else:
        arr = np.asarray(series, dtype=float)
        t, v = arr[:, 0], arr[:, 1]
    return np.asarray(t, dtype=float), np.asarray(v, dtype=float)


def log_resample(t, v, window, n=96):
    """Sample a dense series at ``n`` log-spaced times inside ``window``.

    Least squares in ln(1+t) over per-step output would otherwise weight
    the late, densely sampled part of a run almost exclusively.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    lo = max(window[0], t[0])
    hi = min(window[1], t[-1])
    tq = np.geomspace(lo, hi, n)
    return tq, np.interp(tq, t, v)
