"""Lagrangian solver for the 1D vacuum free boundary problem.

The moving gas interval is mapped onto the fixed Barenblatt interval
``I = (-sqrt(A/B), sqrt(A/B))`` and the particle map ``eta(x, t)`` solves

    rho0 eta_tt + rho0 eta_t + (rho0^gamma eta_x^(-gamma))_x = 0.

Nodes sit on both vacuum endpoints.  The degenerate weight rho0^gamma
vanishes there, so no boundary condition is imposed: the stress beyond
the end faces is zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import kernels
from .affine import CorrectionTrajectory
from .barenblatt import BarenblattProfile, cumulative_mass
from .perturbation import PerturbationSpec


class SolverAbort(RuntimeError):
    """The time stepper stopped (particle crossing or non-finite values)."""


MASS_RULES = ("balanced", "integral")


@dataclass(frozen=True)
class Grid1D:
    profile: BarenblattProfile
    x: np.ndarray        # nodes, x[0] = -R, x[-1] = R
    dx: np.ndarray       # node spacing per face
    S: np.ndarray        # rho0^gamma at faces
    c0sq: np.ndarray     # rho0^(gamma-1) at faces
    rho0: np.ndarray     # rho0 at nodes
    m: np.ndarray        # lumped node masses
    mass_rule: str = "balanced"
    graded: bool = False

    @property
    def n(self) -> int:
        return self.x.size - 1

    @property
    def xf(self) -> np.ndarray:
        return 0.5 * (self.x[1:] + self.x[:-1])

    @property
    def total_mass(self) -> float:
        return float(self.m.sum())


def _reference_nodes(n, graded):
    j = np.arange(n + 1)
    s = -np.cos(np.pi * j / n) if graded else -1.0 + 2.0 * j / n
    return 0.5 * (s - s[::-1])   # exact antisymmetry, s = 0 at the centre for even n


def make_grid1d(profile: BarenblattProfile, n: int, graded: bool = False,
                mass_rule: str = "balanced") -> Grid1D:
    """Node grid on the Barenblatt interval.

    ``mass_rule="balanced"`` sets ``m_i x_i = k (S_{i-1/2} - S_{i+1/2})``,
    which makes ``eta = lam(t) x`` an exact solution of the semi-discrete
    system and gives ``sum m_i x_i = 0`` exactly.  ``"integral"`` uses the
    exact mass of each dual cell instead.
    """
    if profile.dim != 1:
        raise ValueError("Grid1D needs a 1D profile")
    if n < 4:
        raise ValueError("need at least 4 cells")
    if mass_rule not in MASS_RULES:
        raise ValueError(f"mass_rule must be one of {MASS_RULES}")
    R = profile.radius0
    x = R * _reference_nodes(n, graded)
    x[0], x[-1] = -R, R
    xf = 0.5 * (x[1:] + x[:-1])
    base_f = np.maximum(profile.A - profile.B * xf ** 2, 0.0)
    S = base_f ** (profile.alpha + 1.0)
    c0sq = base_f
    rho0 = np.maximum(profile.A - profile.B * x ** 2, 0.0) ** profile.alpha

    edges = np.concatenate(([x[0]], xf, [x[-1]]))
    integral = np.diff(cumulative_mass(profile, edges))
    if mass_rule == "integral":
        m = integral
    else:
        Sx = np.concatenate(([0.0], S, [0.0]))
        with np.errstate(divide="ignore", invalid="ignore"):
            m = profile.k * (Sx[:-1] - Sx[1:]) / x
        centre = np.abs(x) < 1e-12 * R
        m[centre] = integral[centre]
    if not np.all(m > 0):
        raise ValueError("non-positive lumped mass; grid too irregular near the centre")
    return Grid1D(profile, x, np.diff(x), S, c0sq, rho0, m, mass_rule, graded)


@dataclass
class FlowState1D:
    eta: np.ndarray
    eta_t: np.ndarray
    t: float
    history: tuple = ()

    def copy(self) -> "FlowState1D":
        return FlowState1D(self.eta.copy(), self.eta_t.copy(), self.t, self.history)


def init_state(grid: Grid1D, c: CorrectionTrajectory | None,
               pert: PerturbationSpec) -> FlowState1D:
    """``eta = x + w0``, ``eta_t = x (eta_bar_xt(0) + h_t(0)) + w1 = x/k + w1``."""
    w0, w1 = pert.fields(grid.x, dim=1)
    eta = grid.x + w0
    eta_t = grid.x / grid.profile.k + w1
    if not np.all(np.diff(eta) > 0):
        raise ValueError("perturbed initial map is not monotone (particles would cross)")
    return FlowState1D(eta, eta_t, 0.0)


def accelerations(state: FlowState1D, grid: Grid1D) -> np.ndarray:
    """Right-hand side eta_tt of the semi-discrete system."""
    F = np.empty_like(state.eta)
    if kernels.forces1d_np(state.eta, grid.S, grid.dx, grid.profile.gamma, F) != kernels.OK:
        raise SolverAbort("vacuum interpenetration: eta no longer increasing")
    return -state.eta_t + F / grid.m


def acceleration_rate(state: FlowState1D, grid: Grid1D) -> np.ndarray:
    """d/dt of eta_tt along the flow (analytic Jacobian-vector product)."""
    g = grid.profile.gamma
    a = accelerations(state, grid)
    J = np.diff(state.eta) / grid.dx
    dJ = np.diff(state.eta_t) / grid.dx
    dsig = -g * grid.S * J ** (-g - 1.0) * dJ
    dF = np.zeros_like(state.eta)
    dF[:-1] -= dsig
    dF[1:] += dsig
    return -a + dF / grid.m


def cfl_dt(state: FlowState1D, grid: Grid1D, cfl: float = 0.4) -> float:
    """cfl * min dx / c_eff with c_eff^2 = gamma rho0^(gamma-1) eta_x^(-gamma-1) at faces."""
    return float(kernels.cfl_dt1d_np(state.eta, grid.c0sq, grid.dx, grid.profile.gamma, cfl))


def _status_error(status, t):
    if status == kernels.INTERPENETRATION:
        return SolverAbort(f"vacuum interpenetration at t={t:.6g}")
    return SolverAbort(f"non-finite state at t={t:.6g}")


def step(state: FlowState1D, grid: Grid1D, dt: float) -> FlowState1D:
    """One exponential velocity-Verlet step of size ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > cfl_dt(state, grid, cfl=1.0) * (1 + 1e-12):
        raise ValueError("dt exceeds the CFL bound")
    new = state.copy()
    F = np.empty_like(new.eta)
    g = grid.profile.gamma
    if kernels.forces1d(new.eta, grid.S, grid.dx, g, F) != kernels.OK:
        raise _status_error(kernels.INTERPENETRATION, state.t)
    bt, blo, bhi = np.empty(1), np.empty(1), np.empty(1)
    t, n, status = kernels.advance1d(new.eta, new.eta_t, F, grid.m, grid.S, grid.c0sq,
                                     grid.dx, g, state.t, state.t + dt, math.inf, dt,
                                     bt, blo, bhi)
    if status != kernels.OK:
        raise _status_error(status, t)
    new.t = t
    new.history = ((state.t, state.eta, state.eta_t),) + state.history[:2]
    return new


def output_times(t_end: float, ladder: str = "geometric", stride: float = 4,
                 t_first: float = 1.0 / 16) -> np.ndarray:
    """Snapshot times in (0, t_end].

    ``geometric``: ``t_first * 2^(j/stride)`` (stride = samples per doubling);
    ``linear``: multiples of ``stride``.  ``t_end`` is always included.
    """
    if t_end <= 0:
        return np.empty(0)
    if ladder == "geometric":
        if stride <= 0:
            raise ValueError("geometric stride must be positive")
        jmax = int(math.floor(stride * math.log2(t_end / t_first))) if t_end > t_first else -1
        ts = t_first * 2.0 ** (np.arange(jmax + 1) / stride)
    elif ladder == "linear":
        if stride <= 0:
            raise ValueError("linear stride must be positive")
        ts = stride * np.arange(1, int(math.floor(t_end / stride)) + 1)
    else:
        raise ValueError(f"unknown snapshot ladder {ladder!r}")
    ts = ts[ts < t_end * (1 - 1e-12)]
    return np.append(ts, t_end)


@dataclass
class RunResult1D:
    grid: Grid1D
    correction: CorrectionTrajectory | None
    pert: PerturbationSpec
    snapshots: List[FlowState1D]
    t: np.ndarray            # boundary series, every accepted step
    x_minus: np.ndarray
    x_plus: np.ndarray
    steps: int = 0
    cfl: float = 0.4

    @property
    def initial(self) -> FlowState1D:
        return self.snapshots[0]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


_CHUNK = 65536


def run(grid: Grid1D, correction: CorrectionTrajectory | None, pert: PerturbationSpec,
        t_end: float, stride: float = 4, *, ladder: str = "geometric", cfl: float = 0.4,
        dt_max: float = math.inf, times=None) -> RunResult1D:
    """Integrate to ``t_end`` and keep snapshots on the requested ladder.

    The boundary positions ``x_-(t), x_+(t)`` are recorded after every step.
    """
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    if not 0 < cfl <= 0.9:
        raise ValueError("cfl must lie in (0, 0.9]")
    state = init_state(grid, correction, pert)
    snaps = [state.copy()]
    g = grid.profile.gamma
    eta, v = state.eta.copy(), state.eta_t.copy()
    F = np.empty_like(eta)
    kernels.forces1d(eta, grid.S, grid.dx, g, F)
    ts, lo, hi = [np.array([0.0])], [eta[:1].copy()], [eta[-1:].copy()]
    bt, blo, bhi = np.empty(_CHUNK), np.empty(_CHUNK), np.empty(_CHUNK)
    t = 0.0
    nsteps = 0
    targets = output_times(t_end, ladder, stride) if times is None else np.asarray(times, float)
    for target in targets:
        while t < target:
            t, n, status = kernels.advance1d(eta, v, F, grid.m, grid.S, grid.c0sq, grid.dx,
                                             g, t, float(target), cfl, dt_max, bt, blo, bhi)
            ts.append(bt[:n].copy())
            lo.append(blo[:n].copy())
            hi.append(bhi[:n].copy())
            nsteps += n
            if status != kernels.OK:
                raise _status_error(status, t)
        snaps.append(FlowState1D(eta.copy(), v.copy(), t))
    return RunResult1D(grid, correction, pert, snaps, np.concatenate(ts),
                       np.concatenate(lo), np.concatenate(hi), nsteps, cfl)
