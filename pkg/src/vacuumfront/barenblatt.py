"""Barenblatt self-similar solution of rho_t = Lap(rho^gamma) with Darcy velocity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .numcore import find_root, quad_weighted


@dataclass(frozen=True)
class BarenblattProfile:
    """Profile constants for density ``(1+t)^(-n/k) (A - B (1+t)^(-2/k) |x|^2)^(1/(gamma-1))``."""
    gamma: float
    mass: float
    dim: int
    A: float
    B: float

    @property
    def k(self) -> float:
        return self.dim * self.gamma - self.dim + 2.0

    @property
    def alpha(self) -> float:
        return 1.0 / (self.gamma - 1.0)

    @property
    def radius0(self) -> float:
        return math.sqrt(self.A / self.B)


def similarity_index(gamma: float, dim: int) -> float:
    return dim * gamma - dim + 2.0


def curvature_constant(gamma: float, dim: int) -> float:
    """B fixed by matching the porous-media equation and u = x/(k(1+t))."""
    return (gamma - 1.0) / (2.0 * gamma * similarity_index(gamma, dim))


def _check_dim(dim):
    if dim not in (1, 3):
        raise ValueError(f"dim must be 1 or 3, got {dim}")


def profile_mass(gamma: float, dim: int, A: float, B: float, tol: float = 1e-13) -> float:
    """Mass of the t=0 profile by adaptive quadrature over the support."""
    _check_dim(dim)
    alpha = 1.0 / (gamma - 1.0)
    R = math.sqrt(A / B)
    if dim == 1:
        val = quad_weighted(lambda x: max(A - B * x * x, 0.0) ** alpha, (0.0, R), tol)
        return 2.0 * val
    val = quad_weighted(lambda r: r * r * max(A - B * r * r, 0.0) ** alpha, (0.0, R), tol)
    return 4.0 * math.pi * val


def solve_profile_constants(gamma: float, mass: float, dim: int) -> BarenblattProfile:
    if not gamma > 1.0:
        raise ValueError("gamma must exceed 1")
    if not mass > 0.0:
        raise ValueError("mass must be positive")
    _check_dim(dim)
    B = curvature_constant(gamma, dim)
    # mass scales like A^(alpha + n/2); compare logs so the bracket is wide and tame
    def g(logA):
        return math.log(profile_mass(gamma, dim, math.exp(logA), B)) - math.log(mass)

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if g(lo) < 0.0:
            break
        lo -= 2.0
    for _ in range(200):
        if g(hi) > 0.0:
            break
        hi += 2.0
    logA = find_root(g, (lo, hi), tol=1e-15)
    return BarenblattProfile(float(gamma), float(mass), int(dim), math.exp(logA), B)


def density(p: BarenblattProfile, x, t):
    """Barenblatt density; ``x`` is the coordinate (1D) or radius (3D). Zero outside the support."""
    x = np.asarray(x, dtype=float)
    s = 1.0 + t
    base = p.A - p.B * s ** (-2.0 / p.k) * x * x
    return s ** (-p.dim / p.k) * np.maximum(base, 0.0) ** p.alpha


def velocity(p: BarenblattProfile, x, t):
    return np.asarray(x, dtype=float) / (p.k * (1.0 + t))


def boundary_radius(p: BarenblattProfile, t):
    return p.radius0 * (1.0 + np.asarray(t, dtype=float)) ** (1.0 / p.k)


def lagrangian_flow(p: BarenblattProfile, x, t):
    """Particle path of the Barenblatt flow started at reference position ``x``."""
    return np.asarray(x, dtype=float) * (1.0 + np.asarray(t, dtype=float)) ** (1.0 / p.k)


def sound_speed_sq(p: BarenblattProfile, x, t):
    return p.gamma * density(p, x, t) ** (p.gamma - 1.0)


def mass_at(p: BarenblattProfile, t: float, tol: float = 1e-13) -> float:
    R = float(boundary_radius(p, t))
    if p.dim == 1:
        return 2.0 * quad_weighted(lambda x: float(density(p, x, t)), (0.0, R), tol)
    return 4.0 * math.pi * quad_weighted(lambda r: r * r * float(density(p, r, t)), (0.0, R), tol)


def pme_residual(p: BarenblattProfile, x: float, t: float, step: float,
                 form: str = "pme") -> float:
    """Centered-difference residual at an interior point.

    ``form="pme"`` evaluates rho_t - Lap(rho^gamma); ``form="conservation"``
    evaluates rho_t + div(rho u) with the Darcy velocity.  Both are O(step^2)
    for the exact profile.
    """
    x = float(x)
    if not t > 0:
        raise ValueError("t must be positive")
    if abs(x) + step >= float(boundary_radius(p, t)) or (p.dim == 3 and x - step <= 0.0):
        raise ValueError("finite-difference stencil leaves the support")
    rho = lambda y, s: float(density(p, y, s))
    dt_rho = (rho(x, t + step) - rho(x, t - step)) / (2.0 * step)
    if form == "pme":
        f = lambda y: rho(y, t) ** p.gamma
    elif form == "conservation":
        f = lambda y: rho(y, t) * float(velocity(p, y, t))
    else:
        raise ValueError(f"unknown form {form!r}")
    fp, f0, fm = f(x + step), f(x), f(x - step)
    if form == "pme":
        lap = (fp - 2.0 * f0 + fm) / step ** 2
        if p.dim == 3:
            lap += (2.0 / x) * (fp - fm) / (2.0 * step)
        return dt_rho - lap
    div = (fp - fm) / (2.0 * step)
    if p.dim == 3:
        div += 2.0 * f0 / x
    return dt_rho + div


def cumulative_mass(p: BarenblattProfile, x):
    """Closed-form t=0 mass of [0, x] (1D, signed) or of the ball of radius x (3D).

    Uses the regularized incomplete beta function, so it is independent of
    the adaptive quadrature used to fix ``A``.
    """
    x = np.asarray(x, dtype=float)
    R = p.radius0
    s2 = np.clip((x / R) ** 2, 0.0, 1.0)
    a1 = p.alpha + 1.0
    if p.dim == 1:
        full = p.A ** p.alpha * R * special.beta(0.5, a1)
        return np.sign(x) * 0.5 * full * special.betainc(0.5, a1, s2)
    full = 4.0 * np.pi * p.A ** p.alpha * R ** 3 * special.beta(1.5, a1)
    return 0.5 * full * special.betainc(1.5, a1, s2)
