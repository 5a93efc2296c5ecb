"""Time-stepping kernels for the Lagrangian solvers.

Each kernel exists twice: an explicit loop compiled by numba and a
vectorised numpy version.  ``_jit.USE_NUMBA`` picks which one the solvers
call; both are importable for benchmarking and cross-checks.

Scheme (both dimensions): lumped node masses ``m``, face stresses from
node differences, zero stress beyond the vacuum faces, and a symmetric
splitting per step

    v <- e^(-dt/2) v + (1 - e^(-dt/2)) F/m;  eta += dt v;  (same half again)

The half steps solve ``v' = -v + F/m`` exactly with ``F`` frozen.  With no
damping this is velocity Verlet; in the overdamped (Darcy) regime the
drift velocity equals ``F/m`` exactly, so large late-time steps stay
accurate.  Status codes: 0 ok, 1 particle ordering lost, 2 non-finite.
"""
from __future__ import annotations

import math

import numpy as np

from ._jit import USE_NUMBA, njit

OK = 0
INTERPENETRATION = 1
NONFINITE = 2


# -- 1D ----------------------------------------------------------------------

@njit
def forces1d_nb(eta, S, dx, gamma, F):
    """F_i = sigma_{i-1/2} - sigma_{i+1/2}, sigma = S (d eta/dx)^(-gamma)."""
    n = eta.shape[0]
    prev = 0.0
    for i in range(n - 1):
        J = (eta[i + 1] - eta[i]) / dx[i]
        if not J > 0.0:
            return INTERPENETRATION
        sig = S[i] * J ** (-gamma)
        F[i] = prev - sig
        prev = sig
    F[n - 1] = prev
    return OK


def forces1d_np(eta, S, dx, gamma, F):
    J = np.diff(eta) / dx
    if not np.all(J > 0.0):
        return INTERPENETRATION
    sig = S * J ** (-gamma)
    F[:-1] = -sig
    F[-1] = 0.0
    F[1:] += sig
    return OK


@njit
def cfl_dt1d_nb(eta, c0sq, dx, gamma, cfl):
    dt = np.inf
    for i in range(eta.shape[0] - 1):
        J = (eta[i + 1] - eta[i]) / dx[i]
        c2 = gamma * c0sq[i] * J ** (-gamma - 1.0)
        if c2 > 0.0:
            d = dx[i] / math.sqrt(c2)
            if d < dt:
                dt = d
    return cfl * dt


def cfl_dt1d_np(eta, c0sq, dx, gamma, cfl):
    J = np.diff(eta) / dx
    c2 = gamma * c0sq * J ** (-gamma - 1.0)
    ok = c2 > 0.0
    return cfl * float(np.min(dx[ok] / np.sqrt(c2[ok]))) if ok.any() else np.inf


@njit
def advance1d_nb(eta, v, F, m, S, c0sq, dx, gamma, t, t_target, cfl, dt_max,
                 buf_t, buf_lo, buf_hi):
    """Step until ``t_target`` or until the boundary buffers are full."""
    n = eta.shape[0]
    count = 0
    cap = buf_t.shape[0]
    while t < t_target and count < cap:
        dt = cfl_dt1d_nb(eta, c0sq, dx, gamma, cfl)
        if dt > dt_max:
            dt = dt_max
        if t + dt >= t_target or t_target - (t + dt) < 1e-12 * dt:
            dt = t_target - t
        half = math.exp(-0.5 * dt)
        kick = -math.expm1(-0.5 * dt)
        for i in range(n):
            v[i] = half * v[i] + kick * F[i] / m[i]
        for i in range(n):
            eta[i] += dt * v[i]
        st = forces1d_nb(eta, S, dx, gamma, F)
        if st != OK:
            return t, count, st
        for i in range(n):
            v[i] = half * v[i] + kick * F[i] / m[i]
            if not math.isfinite(v[i]) or not math.isfinite(eta[i]):
                return t, count, NONFINITE
        t = t_target if t + dt >= t_target else t + dt
        buf_t[count] = t
        buf_lo[count] = eta[0]
        buf_hi[count] = eta[n - 1]
        count += 1
    return t, count, OK


def advance1d_np(eta, v, F, m, S, c0sq, dx, gamma, t, t_target, cfl, dt_max,
                 buf_t, buf_lo, buf_hi):
    count = 0
    cap = buf_t.shape[0]
    while t < t_target and count < cap:
        dt = min(cfl_dt1d_np(eta, c0sq, dx, gamma, cfl), dt_max)
        if t + dt >= t_target or t_target - (t + dt) < 1e-12 * dt:
            dt = t_target - t
        half = math.exp(-0.5 * dt)
        kick = -math.expm1(-0.5 * dt)
        v *= half
        v += kick * F / m
        eta += dt * v
        st = forces1d_np(eta, S, dx, gamma, F)
        if st != OK:
            return t, count, st
        v *= half
        v += kick * F / m
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(eta))):
            return t, count, NONFINITE
        t = t_target if t + dt >= t_target else t + dt
        buf_t[count] = t
        buf_lo[count] = eta[0]
        buf_hi[count] = eta[-1]
        count += 1
    return t, count, OK


# -- 3D, spherical symmetry --------------------------------------------------
# Node 0 is the centre and never moves.  Face pressure uses the volume ratio
# J = (r_{i+1}^3 - r_i^3) / (eta_{i+1}^3 - eta_i^3), which stays regular at
# the first face where both inner radii are zero.

@njit
def forces3d_nb(eta, Sf, dvol, gamma, F):
    """F_i = -eta_i^2 (P_{i+1/2} - P_{i-1/2}), P = Sf J^gamma, P = 0 beyond the edge."""
    n = eta.shape[0]
    F[0] = 0.0
    prev = 0.0
    for i in range(n - 1):
        w = eta[i + 1] ** 3 - eta[i] ** 3
        if not (w > 0.0 and eta[i + 1] > eta[i]):
            return INTERPENETRATION
        P = Sf[i] * (dvol[i] / w) ** gamma
        if i > 0:
            F[i] = -eta[i] * eta[i] * (P - prev)
        prev = P
    F[n - 1] = eta[n - 1] * eta[n - 1] * prev
    return OK


def forces3d_np(eta, Sf, dvol, gamma, F):
    w = np.diff(eta ** 3)
    if not (np.all(w > 0.0) and np.all(np.diff(eta) > 0.0)):
        return INTERPENETRATION
    P = Sf * (dvol / w) ** gamma
    F[0] = 0.0
    F[1:-1] = -eta[1:-1] ** 2 * (P[1:] - P[:-1])
    F[-1] = eta[-1] ** 2 * P[-1]
    return OK


@njit
def cfl_dt3d_nb(eta, r0gm1, dvol, dr, gamma, cfl):
    dt = np.inf
    for i in range(eta.shape[0] - 1):
        J = dvol[i] / (eta[i + 1] ** 3 - eta[i] ** 3)
        er = (eta[i + 1] - eta[i]) / dr[i]
        c2 = gamma * r0gm1[i] * J ** (gamma - 1.0) / (er * er)
        if c2 > 0.0:
            d = dr[i] / math.sqrt(c2)
            if d < dt:
                dt = d
    return cfl * dt


def cfl_dt3d_np(eta, r0gm1, dvol, dr, gamma, cfl):
    J = dvol / np.diff(eta ** 3)
    er = np.diff(eta) / dr
    c2 = gamma * r0gm1 * J ** (gamma - 1.0) / er ** 2
    ok = c2 > 0.0
    return cfl * float(np.min(dr[ok] / np.sqrt(c2[ok]))) if ok.any() else np.inf


@njit
def advance3d_nb(eta, v, F, m, Sf, r0gm1, dvol, dr, gamma, t, t_target, cfl,
                 dt_max, buf_t, buf_r):
    n = eta.shape[0]
    count = 0
    cap = buf_t.shape[0]
    while t < t_target and count < cap:
        dt = cfl_dt3d_nb(eta, r0gm1, dvol, dr, gamma, cfl)
        if dt > dt_max:
            dt = dt_max
        if t + dt >= t_target or t_target - (t + dt) < 1e-12 * dt:
            dt = t_target - t
        half = math.exp(-0.5 * dt)
        kick = -math.expm1(-0.5 * dt)
        for i in range(1, n):
            v[i] = half * v[i] + kick * F[i] / m[i]
        for i in range(1, n):
            eta[i] += dt * v[i]
        st = forces3d_nb(eta, Sf, dvol, gamma, F)
        if st != OK:
            return t, count, st
        for i in range(1, n):
            v[i] = half * v[i] + kick * F[i] / m[i]
            if not math.isfinite(v[i]) or not math.isfinite(eta[i]):
                return t, count, NONFINITE
        t = t_target if t + dt >= t_target else t + dt
        buf_t[count] = t
        buf_r[count] = eta[n - 1]
        count += 1
    return t, count, OK


def advance3d_np(eta, v, F, m, Sf, r0gm1, dvol, dr, gamma, t, t_target, cfl,
                 dt_max, buf_t, buf_r):
    count = 0
    cap = buf_t.shape[0]
    while t < t_target and count < cap:
        dt = min(cfl_dt3d_np(eta, r0gm1, dvol, dr, gamma, cfl), dt_max)
        if t + dt >= t_target or t_target - (t + dt) < 1e-12 * dt:
            dt = t_target - t
        half = math.exp(-0.5 * dt)
        kick = -math.expm1(-0.5 * dt)
        v[1:] = half * v[1:] + kick * F[1:] / m[1:]
        eta[1:] += dt * v[1:]
        st = forces3d_np(eta, Sf, dvol, gamma, F)
        if st != OK:
            return t, count, st
        v[1:] = half * v[1:] + kick * F[1:] / m[1:]
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(eta))):
            return t, count, NONFINITE
        t = t_target if t + dt >= t_target else t + dt
        buf_t[count] = t
        buf_r[count] = eta[-1]
        count += 1
    return t, count, OK


if USE_NUMBA:
    forces1d, cfl_dt1d, advance1d = forces1d_nb, cfl_dt1d_nb, advance1d_nb
    forces3d, cfl_dt3d, advance3d = forces3d_nb, cfl_dt3d_nb, advance3d_nb
else:
    forces1d, cfl_dt1d, advance1d = forces1d_np, cfl_dt1d_np, advance1d_np
    forces3d, cfl_dt3d, advance3d = forces3d_np, cfl_dt3d_np, advance3d_np
