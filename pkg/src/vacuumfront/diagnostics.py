"""Post-processing of solver runs: perturbation energies, the boundary shift,
the centre-of-mass law, boundary residuals and weighted field errors.

Time derivatives of the perturbation are taken from the semi-discrete
equation (accelerations and their analytic rate of change) rather than by
differencing stored snapshots, so no history levels are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .affine import CorrectionTrajectory
from .numcore import RateFit, RateFitError, fit_rate, log_resample
from .solver1d import FlowState1D, Grid1D, RunResult1D, acceleration_rate, accelerations
from .solver3d import (FlowState3D, Grid3D, RunResult3D, acceleration_rate3,
                       accelerations3)

Grid = Union[Grid1D, Grid3D]
State = Union[FlowState1D, FlowState3D]
Run = Union[RunResult1D, RunResult3D]


def _coords(grid: Grid) -> np.ndarray:
    return grid.x if isinstance(grid, Grid1D) else grid.r


def _d(f, x):
    return np.gradient(f, x, edge_order=2)


def _over_r(f, r):
    """``f / r`` on radial nodes, extended to ``r = 0`` by linear extrapolation."""
    q = np.empty_like(f)
    q[1:] = f[1:] / r[1:]
    q[0] = q[1] - r[1] * (q[2] - q[1]) / (r[2] - r[1])
    return q


def _trap(f, x):
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))


# -- shift and centre of mass ------------------------------------------------

def shift_theta0(state0: FlowState1D, grid: Grid1D) -> float:
    """Initial centre of mass plus mean velocity, ``(1/M) sum m_i (w0 + w1)``."""
    if not isinstance(grid, Grid1D):
        return 0.0   # spherical symmetry
    w0 = state0.eta - grid.x
    w1 = state0.eta_t - grid.x / grid.profile.k
    return float(np.dot(grid.m, w0 + w1) / grid.m.sum())


@dataclass
class CenterOfMassReport:
    t: np.ndarray
    theta: np.ndarray
    predicted: np.ndarray

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.theta - self.predicted)

    @property
    def max_deviation(self) -> float:
        return float(self.deviation.max())


def center_of_mass_law(run: RunResult1D) -> CenterOfMassReport:
    """Compare ``theta(t)`` with ``theta(0) + (1 - e^-t) theta'(0)`` at every snapshot."""
    m = run.grid.m
    M = m.sum()
    t = run.times
    theta = np.array([np.dot(m, s.eta) / M for s in run.snapshots])
    vel0 = np.dot(m, run.initial.eta_t) / M
    pred = theta[0] + (1.0 - np.exp(-t)) * vel0
    return CenterOfMassReport(t, theta, pred)


# -- energies ------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    t: float
    E: tuple                 # (E_0, E_1, E_2)
    E_mixed: Dict[tuple, float]   # {(j, i): E_{j,i}} for i >= 1, j + i <= 2
    gradient_part: float     # share of E coming from spatial-derivative terms

    @property
    def total(self) -> float:
        return float(sum(self.E) + sum(self.E_mixed.values()))


def _perturbation_1d(state, grid, c):
    x = grid.x
    lam, lt, ltt, lttt = c.strain(state.t)
    a = accelerations(state, grid)
    adot = acceleration_rate(state, grid)
    return [state.eta - lam * x, state.eta_t - lt * x, a - ltt * x, adot - lttt * x]


def _perturbation_3d(state, grid, c):
    r = grid.r
    lam, lt, ltt, lttt = c.strain(state.t)
    a = accelerations3(state, grid)
    adot = acceleration_rate3(state, grid)
    return [_over_r(state.eta, r) - lam, _over_r(state.eta_t, r) - lt,
            _over_r(a, r) - ltt, _over_r(adot, r) - lttt]


def energies(state: State, c: CorrectionTrajectory, grid: Grid) -> EnergyReport:
    """Weighted perturbation energies truncated at ``j + i <= 2``.

    1D uses ``w = eta - x lam``; 3D uses ``zeta = eta/r - lam`` with the
    ``r^4 rho0`` and ``r^2 rho0^gamma`` weights.
    """
    g = grid.profile.gamma
    one = 1.0 + state.t
    x = _coords(grid)
    rho0 = grid.rho0
    rg = rho0 ** g
    three = isinstance(grid, Grid3D)
    if three:
        d = _perturbation_3d(state, grid, c)
        wa, wb = x ** 4 * rho0, x ** 2 * rg   # weights of zeta^2 and |(zeta, r zeta_r)|^2
    else:
        d = _perturbation_1d(state, grid, c)
        wa, wb = rho0, rg
    E, grad = [], 0.0
    for j in range(3):
        dx_j = _d(d[j], x)
        if three:
            gterm = wb * (d[j] ** 2 + (x * dx_j) ** 2)
        else:
            gterm = wb * dx_j ** 2
        gpart = one ** (2 * j) * _trap(gterm, x)
        E.append(one ** (2 * j) * _trap(wa * d[j] ** 2 + one * wa * d[j + 1] ** 2, x) + gpart)
        grad += gpart
    mixed = {}
    r2 = x ** 2 if three else 1.0
    r4 = x ** 4 if three else 1.0
    for j, i in ((0, 1), (0, 2), (1, 1)):
        f = d[j]
        for _ in range(i):
            f = _d(f, x)
        fx = _d(f, x)
        val = one ** (2 * j) * _trap(r2 * rho0 ** (1 + (i - 1) * (g - 1)) * f ** 2
                                     + r4 * rho0 ** (g + i * (g - 1)) * fx ** 2, x)
        mixed[(j, i)] = val
        grad += val
    return EnergyReport(float(state.t), tuple(E), mixed, float(grad))


def energy_series(run: Run) -> List[EnergyReport]:
    if run.correction is None:
        raise ValueError("energies need the correction trajectory of the run")
    return [energies(s, run.correction, run.grid) for s in run.snapshots]


# -- field errors ----------------------------------------------------------------

def field_errors(state: State, grid: Grid, c: CorrectionTrajectory | None = None):
    """Weighted sup-norm density and velocity errors against Barenblatt.

    Density: ``|rho(eta) - rho_bar(eta_bar)| / rho0``, scaled by ``(1+t)^(2/k)``
    in 1D and ``(1+t)^(4/k)`` in 3D; both reduce to strain ratios.  Velocity:
    ``|u(eta) - u_bar(eta_bar)| (1+t)``, divided by ``r`` in 3D.  ``c`` is
    accepted for interface symmetry.
    """
    p = grid.profile
    k = p.k
    one = 1.0 + state.t
    sx = one ** (1.0 / k)
    x = _coords(grid)
    if isinstance(grid, Grid3D):
        q = _over_r(state.eta, x)
        er = _d(state.eta, x)
        dens = np.abs(1.0 / (q * q * er) - sx ** -3) * one ** (4.0 / k)
        vel = np.abs(_over_r(state.eta_t, x) - sx / (k * one)) * one
    else:
        ex = _d(state.eta, x)
        dens = np.abs(1.0 / ex - 1.0 / sx) * one ** (2.0 / k)
        vel = np.abs(state.eta_t - x * sx / (k * one)) * one
    return float(dens.max()), float(vel.max())


def eulerian_mass(state: State, grid: Grid) -> float:
    """Trapezoidal Eulerian mass of the reconstructed density."""
    x = _coords(grid)
    if isinstance(grid, Grid3D):
        rho = grid.rho0 / (_over_r(state.eta, x) ** 2 * _d(state.eta, x))
        return 4.0 * math.pi * _trap(rho * state.eta ** 2, state.eta)
    rho = grid.rho0 / _d(state.eta, x)
    return _trap(rho, state.eta)


def boundary_c2_slope(state: State, grid: Grid) -> float:
    """One-sided slope of ``c^2`` at the outer vacuum boundary over its Barenblatt value.

    Finite and close to 1 for a physical vacuum boundary.
    """
    p = grid.profile
    x = _coords(grid)
    if isinstance(grid, Grid3D):
        rho = grid.rho0[-2] * x[-2] ** 2 / (state.eta[-2] ** 2 * _d(state.eta, x)[-2])
    else:
        rho = grid.rho0[-2] / _d(state.eta, x)[-2]
    c2 = p.gamma * rho ** (p.gamma - 1.0)
    slope = c2 / (state.eta[-2] - state.eta[-1])
    one = 1.0 + state.t
    exact = -2.0 * p.gamma * p.B * p.radius0 * one ** (-p.gamma / p.k) if p.dim == 1 else \
        -2.0 * p.gamma * p.B * p.radius0 * one ** (-(3.0 * p.gamma - 2.0) / p.k)
    return float(slope / exact)


# -- boundary asymptotics ------------------------------------------------------

@dataclass
class AsymptoticsReport:
    theta0: float
    t: np.ndarray
    residual: np.ndarray                 # x_+ - xbar_+ - theta0 (1D), R - Rbar (3D)
    residual_minus: Optional[np.ndarray]
    snapshot_t: np.ndarray
    density_error: np.ndarray
    velocity_error: np.ndarray
    energy_total: Optional[np.ndarray]
    window: tuple
    fits: Dict[str, Optional[RateFit]] = field(default_factory=dict)


def default_window(t_end: float) -> tuple:
    return (max(1e2, t_end / 100.0), t_end)


def _try_fit(t, v, window):
    t, v = np.asarray(t), np.abs(v)
    try:
        # dense per-step series are thinned to log-uniform samples first
        if np.count_nonzero((t >= window[0]) & (t <= window[1])) > 200:
            t, v = log_resample(t, v, window)
        return fit_rate((t, v), window)
    except (RateFitError, ValueError):
        return None


def boundary_asymptotics(run: Run, theta0: float | None = None, window=None,
                         with_energy: bool = True) -> AsymptoticsReport:
    p = run.grid.profile
    Rbar = p.radius0 * (1.0 + run.t) ** (1.0 / p.k)
    if isinstance(run, RunResult3D):
        theta0 = 0.0
        res, res_m = run.radius - Rbar, None
    else:
        if theta0 is None:
            theta0 = shift_theta0(run.initial, run.grid)
        res = run.x_plus - Rbar - theta0
        res_m = run.x_minus + Rbar - theta0
    st = run.times
    errs = np.array([field_errors(s, run.grid) for s in run.snapshots])
    energy = None
    if with_energy and run.correction is not None:
        energy = np.array([e.total for e in energy_series(run)])
    t_end = float(run.t[-1])
    window = default_window(t_end) if window is None else tuple(window)
    fits = {}
    if t_end > window[0]:
        fits["boundary"] = _try_fit(run.t, res, window)
        if res_m is not None:
            fits["boundary_minus"] = _try_fit(run.t, res_m, window)
        fits["density"] = _try_fit(st, errs[:, 0], window)
        fits["velocity"] = _try_fit(st, errs[:, 1], window)
        if energy is not None:
            fits["energy"] = _try_fit(st, energy, window)
    return AsymptoticsReport(float(theta0), run.t, res, res_m, st, errs[:, 0], errs[:, 1],
                             energy, window, fits)
