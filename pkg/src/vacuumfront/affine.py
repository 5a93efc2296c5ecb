"""ODE-level exact solutions.

* the affine family ``c^2 = e - b|x|^2, u = a x`` of damped Euler flow,
* the boundary correction ``h(t)`` that turns the Barenblatt particle map
  ``x (1+t)^(1/k)`` into an exact solution ``x (eta_bar_x + h)``,
* the scalar strain ``lam(t)`` with ``lam'' + lam' = lam^(1-k)/k`` which
  is the solver oracle (``eta = lam * x`` is exact for Barenblatt mass).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .barenblatt import BarenblattProfile, similarity_index
from .numcore import IntegrationError, OdeProblem, Trajectory, integrate_ode


@dataclass(frozen=True)
class AffineState:
    a: float
    b: float
    e: float
    t: float = 0.0


def _affine_exponents(gamma, dim):
    q = dim * (gamma - 1.0)
    return q, q + 2.0


def affine_rhs(s: AffineState, gamma: float, dim: int) -> np.ndarray:
    """Time derivative of (a, b, e) for the affine ansatz."""
    q, k = _affine_exponents(gamma, dim)
    da = -s.a * s.a - s.a + 2.0 * s.b / (gamma - 1.0)
    db = -k * s.a * s.b
    de = -q * s.a * s.e
    return np.array([da, db, de])


@njit
def _affine_ode(t, y, p):
    gamma = p[0]
    q = p[1] * (gamma - 1.0)
    out = np.empty(3)
    out[0] = -y[0] * y[0] - y[0] + 2.0 * y[1] / (gamma - 1.0)
    out[1] = -(q + 2.0) * y[0] * y[1]
    out[2] = -q * y[0] * y[2]
    return out


@njit
def _correction_ode(t, y, p):
    k = p[0]
    s = 1.0 + t
    eb = s ** (1.0 / k)
    ebt = eb / (k * s)
    ebtt = (1.0 / k) * (1.0 / k - 1.0) * eb / (s * s)
    out = np.empty(2)
    out[0] = y[1]
    out[1] = -y[1] + (eb + y[0]) ** (1.0 - k) / k - ebtt - ebt
    return out


@njit
def _strain_ode(t, y, p):
    k = p[0]
    out = np.empty(2)
    out[0] = y[1]
    out[1] = -y[1] + y[0] ** (1.0 - k) / k
    return out


@dataclass
class AffineTrajectory:
    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    e: np.ndarray
    gamma: float
    dim: int

    def conserved(self) -> np.ndarray:
        """e^(n(gamma-1)+2) / b^(n(gamma-1)), constant along exact trajectories."""
        q, k = _affine_exponents(self.gamma, self.dim)
        return np.exp(k * np.log(self.e) - q * np.log(self.b))


def integrate_affine(init: AffineState, gamma: float, dim: int, t_end: float,
                     tol: float = 1e-10) -> AffineTrajectory:
    if not (init.e > 0 and init.b > 0):
        raise ValueError("affine state needs e > 0 and b > 0")
    prob = OdeProblem(_affine_ode, init.t, [init.a, init.b, init.e],
                      np.array([gamma, float(dim)]))
    tr = integrate_ode(prob, t_end, rel_tol=tol, abs_tol=tol * 1e-6)
    a, b, e = tr.y.T
    bad = np.flatnonzero((b <= 0) | (e <= 0))
    if bad.size:
        raise IntegrationError(f"affine positivity lost at t={tr.t[bad[0]]}")
    return AffineTrajectory(tr.t, a, b, e, gamma, dim)


def barenblatt_affine(p: BarenblattProfile, t) -> AffineState:
    s = 1.0 + np.asarray(t, dtype=float)
    k = p.k
    a = 1.0 / (k * s)
    b = p.gamma * p.B / s
    e = p.gamma * p.A * s ** (-p.dim * (p.gamma - 1.0) / k)
    return AffineState(a, b, e, t)


@dataclass
class CorrectionTrajectory:
    """Sampled correction ``h`` with Hermite interpolation through ``h_t``."""
    t: np.ndarray
    h: np.ndarray
    h_t: np.ndarray
    gamma: float
    dim: int
    _traj: Trajectory

    @property
    def k(self) -> float:
        return similarity_index(self.gamma, self.dim)

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def __call__(self, tq):
        """(h, h_t) at ``tq``."""
        y = self._traj(tq)
        return y[..., 0], y[..., 1]

    def strain(self, tq):
        """``(lam, lam', lam'', lam''')`` of ``tilde_eta_x = eta_bar_x + h``.

        The second and third derivatives come from the ODE itself rather
        than from differentiating the interpolant.
        """
        k = self.k
        h, ht = self(tq)
        s = 1.0 + np.asarray(tq, dtype=float)
        lam = s ** (1.0 / k) + h
        lam_t = s ** (1.0 / k) / (k * s) + ht
        lam_tt = lam ** (1.0 - k) / k - lam_t
        lam_ttt = (1.0 - k) / k * lam ** (-k) * lam_t - lam_tt
        return lam, lam_t, lam_tt, lam_ttt


def integrate_correction(gamma: float, dim: int, t_end: float,
                         tol: float = 1e-10) -> CorrectionTrajectory:
    if not gamma > 1.0:
        raise ValueError("gamma must exceed 1")
    k = similarity_index(gamma, dim)
    prob = OdeProblem(_correction_ode, 0.0, [0.0, 0.0], np.array([k]))
    tr = integrate_ode(prob, t_end, rel_tol=tol, abs_tol=tol * 1e-3)
    return CorrectionTrajectory(tr.t, tr.y[:, 0], tr.y[:, 1], float(gamma), int(dim), tr)


def tilde_eta_x(c: CorrectionTrajectory, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > c.t_end * (1 + 1e-14)):
        raise ValueError(f"t outside correction range [0, {c.t_end}]")
    h, _ = c(t)
    return (1.0 + t) ** (1.0 / c.k) + h


def tilde_eta_xt(c: CorrectionTrajectory, t):
    t = np.asarray(t, dtype=float)
    _, ht = c(t)
    s = 1.0 + t
    return s ** (1.0 / c.k) / (c.k * s) + ht


@dataclass
class AffineFlow:
    """Solution ``lam(t)`` of lam'' + lam' = lam^(1-k)/k."""
    gamma: float
    dim: int
    traj: Trajectory

    @property
    def t(self):
        return self.traj.t

    @property
    def lam(self):
        return self.traj.y[:, 0]

    @property
    def lam_t(self):
        return self.traj.y[:, 1]

    def __call__(self, tq):
        y = self.traj(tq)
        return y[..., 0], y[..., 1]


def exact_affine_flow(gamma: float, dim: int, a0: float, t_end: float,
                      tol: float = 1e-11, lam0: float = 1.0) -> AffineFlow:
    """Strain of ``eta = lam(t) x`` from Barenblatt initial density.

    ``a0`` is the initial strain rate ``lam'(0)``; the Barenblatt start
    ``eta_t = x/k`` is ``a0 = 1/k``.  ``lam0`` allows dilated starts.
    """
    k = similarity_index(gamma, dim)
    prob = OdeProblem(_strain_ode, 0.0, [lam0, a0], np.array([k]))
    tr = integrate_ode(prob, t_end, rel_tol=tol, abs_tol=tol * 1e-2)
    if np.any(tr.y[:, 0] <= 0):
        raise IntegrationError("strain collapsed to zero")
    return AffineFlow(float(gamma), int(dim), tr)
