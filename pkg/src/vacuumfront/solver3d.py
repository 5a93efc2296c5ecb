"""Lagrangian solver for spherically symmetric motion.

Radial particle map ``eta(r, t)`` on ``I = (0, sqrt(A/B))`` with

    rho0 eta_tt + rho0 eta_t + (eta/r)^2 [ (r^2 rho0 / (eta^2 eta_r))^gamma ]_r = 0,

multiplied through by ``r^2`` so node masses are ``r^2 rho0 dr`` (mass / 4 pi).
The centre node stays at ``eta = 0``.  Face pressures use the exact volume
ratio of each shell, which is regular at the centre without a special stencil.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from . import kernels
from .affine import CorrectionTrajectory
from .barenblatt import BarenblattProfile, cumulative_mass
from .perturbation import PerturbationSpec
from .solver1d import MASS_RULES, SolverAbort, output_times

_CHUNK = 65536


@dataclass(frozen=True)
class Grid3D:
    profile: BarenblattProfile
    r: np.ndarray        # nodes, r[0] = 0, r[-1] = R
    dr: np.ndarray
    dvol: np.ndarray     # r_{i+1}^3 - r_i^3
    Sf: np.ndarray       # rho0^gamma at faces
    r0gm1: np.ndarray    # rho0^(gamma-1) at faces
    rho0: np.ndarray     # rho0 at nodes
    m: np.ndarray        # node masses divided by 4 pi; m[0] = 0
    mass_rule: str = "balanced"
    graded: bool = False

    @property
    def n(self) -> int:
        return self.r.size - 1

    @property
    def total_mass(self) -> float:
        return float(4.0 * np.pi * self.m.sum())


def make_grid3d(profile: BarenblattProfile, n: int, graded: bool = False,
                mass_rule: str = "balanced") -> Grid3D:
    """Radial grid.  ``graded`` clusters nodes toward the vacuum boundary.

    The balanced masses ``m_i = k r_i (Sf_{i-1/2} - Sf_{i+1/2})`` make
    ``eta = lam(t) r`` exact for the semi-discrete system.
    """
    if profile.dim != 3:
        raise ValueError("Grid3D needs a 3D profile")
    if n < 4:
        raise ValueError("need at least 4 cells")
    if mass_rule not in MASS_RULES:
        raise ValueError(f"mass_rule must be one of {MASS_RULES}")
    R = profile.radius0
    s = np.arange(n + 1) / n
    r = R * (np.sin(0.5 * np.pi * s) if graded else s)
    r[0], r[-1] = 0.0, R
    rf = 0.5 * (r[1:] + r[:-1])
    base_f = np.maximum(profile.A - profile.B * rf ** 2, 0.0)
    Sf = base_f ** (profile.alpha + 1.0)
    rho0 = np.maximum(profile.A - profile.B * r ** 2, 0.0) ** profile.alpha
    if mass_rule == "integral":
        edges = np.concatenate(([0.0], rf, [R]))
        m = np.diff(cumulative_mass(profile, edges)) / (4.0 * np.pi)
        m[0] = 0.0
    else:
        Sx = np.concatenate(([Sf[0]], Sf, [0.0]))
        m = profile.k * r * (Sx[:-1] - Sx[1:])
    if not np.all(m[1:] > 0):
        raise ValueError("non-positive lumped mass")
    return Grid3D(profile, r, np.diff(r), np.diff(r ** 3), Sf, base_f, rho0, m,
                  mass_rule, graded)


@dataclass
class FlowState3D:
    eta: np.ndarray
    eta_t: np.ndarray
    t: float
    history: tuple = ()

    def copy(self) -> "FlowState3D":
        return FlowState3D(self.eta.copy(), self.eta_t.copy(), self.t, self.history)


def init_state3(grid: Grid3D, c: CorrectionTrajectory | None,
                pert: PerturbationSpec) -> FlowState3D:
    """``eta = r (1 + zeta0)``, ``eta_t = r (1/k + zeta1)``."""
    z0, z1 = pert.fields(grid.r, dim=3)
    eta = grid.r * (1.0 + z0)
    eta_t = grid.r * (1.0 / grid.profile.k + z1)
    eta[0] = eta_t[0] = 0.0
    if not np.all(np.diff(eta) > 0):
        raise ValueError("perturbed initial map is not monotone (particles would cross)")
    return FlowState3D(eta, eta_t, 0.0)


def accelerations3(state: FlowState3D, grid: Grid3D) -> np.ndarray:
    F = np.empty_like(state.eta)
    if kernels.forces3d_np(state.eta, grid.Sf, grid.dvol, grid.profile.gamma, F) != kernels.OK:
        raise SolverAbort("vacuum interpenetration: eta no longer increasing")
    acc = np.zeros_like(state.eta)
    acc[1:] = -state.eta_t[1:] + F[1:] / grid.m[1:]
    return acc


def acceleration_rate3(state: FlowState3D, grid: Grid3D) -> np.ndarray:
    """d/dt of eta_tt along the flow (analytic Jacobian-vector product)."""
    g = grid.profile.gamma
    eta, v = state.eta, state.eta_t
    a = accelerations3(state, grid)
    w = np.diff(eta ** 3)
    dw = np.diff(3.0 * eta ** 2 * v)
    P = grid.Sf * (grid.dvol / w) ** g
    dP = -g * P * dw / w
    dF = np.zeros_like(eta)
    dF[1:-1] = (-2.0 * eta[1:-1] * v[1:-1] * (P[1:] - P[:-1])
                - eta[1:-1] ** 2 * (dP[1:] - dP[:-1]))
    dF[-1] = 2.0 * eta[-1] * v[-1] * P[-1] + eta[-1] ** 2 * dP[-1]
    out = np.zeros_like(eta)
    out[1:] = -a[1:] + dF[1:] / grid.m[1:]
    return out


def cfl_dt3(state: FlowState3D, grid: Grid3D, cfl: float = 0.4) -> float:
    return float(kernels.cfl_dt3d_np(state.eta, grid.r0gm1, grid.dvol, grid.dr,
                                     grid.profile.gamma, cfl))


def _status_error(status, t):
    if status == kernels.INTERPENETRATION:
        return SolverAbort(f"vacuum interpenetration at t={t:.6g}")
    return SolverAbort(f"non-finite state at t={t:.6g}")


def step3(state: FlowState3D, grid: Grid3D, dt: float) -> FlowState3D:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > cfl_dt3(state, grid, cfl=1.0) * (1 + 1e-12):
        raise ValueError("dt exceeds the CFL bound")
    new = state.copy()
    g = grid.profile.gamma
    F = np.empty_like(new.eta)
    if kernels.forces3d(new.eta, grid.Sf, grid.dvol, g, F) != kernels.OK:
        raise _status_error(kernels.INTERPENETRATION, state.t)
    bt, br = np.empty(1), np.empty(1)
    t, _, status = kernels.advance3d(new.eta, new.eta_t, F, grid.m, grid.Sf, grid.r0gm1,
                                     grid.dvol, grid.dr, g, state.t, state.t + dt,
                                     math.inf, dt, bt, br)
    if status != kernels.OK:
        raise _status_error(status, t)
    new.t = t
    new.history = ((state.t, state.eta, state.eta_t),) + state.history[:2]
    return new


@dataclass
class RunResult3D:
    grid: Grid3D
    correction: CorrectionTrajectory | None
    pert: PerturbationSpec
    snapshots: List[FlowState3D]
    t: np.ndarray
    radius: np.ndarray
    steps: int = 0
    cfl: float = 0.4

    @property
    def initial(self) -> FlowState3D:
        return self.snapshots[0]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


def run3(grid: Grid3D, correction: CorrectionTrajectory | None, pert: PerturbationSpec,
         t_end: float, stride: float = 4, *, ladder: str = "geometric", cfl: float = 0.4,
         dt_max: float = math.inf, times=None) -> RunResult3D:
    """Integrate to ``t_end``; the boundary radius is recorded after every step."""
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    if not 0 < cfl <= 0.9:
        raise ValueError("cfl must lie in (0, 0.9]")
    state = init_state3(grid, correction, pert)
    snaps = [state.copy()]
    g = grid.profile.gamma
    eta, v = state.eta.copy(), state.eta_t.copy()
    F = np.empty_like(eta)
    kernels.forces3d(eta, grid.Sf, grid.dvol, g, F)
    ts, rs = [np.array([0.0])], [eta[-1:].copy()]
    bt, br = np.empty(_CHUNK), np.empty(_CHUNK)
    t = 0.0
    nsteps = 0
    targets = output_times(t_end, ladder, stride) if times is None else np.asarray(times, float)
    for target in targets:
        while t < target:
            t, n, status = kernels.advance3d(eta, v, F, grid.m, grid.Sf, grid.r0gm1, grid.dvol,
                                             grid.dr, g, t, float(target), cfl, dt_max, bt, br)
            ts.append(bt[:n].copy())
            rs.append(br[:n].copy())
            nsteps += n
            if status != kernels.OK:
                raise _status_error(status, t)
        snaps.append(FlowState3D(eta.copy(), v.copy(), t))
    return RunResult3D(grid, correction, pert, snaps, np.concatenate(ts),
                       np.concatenate(rs), nsteps, cfl)
