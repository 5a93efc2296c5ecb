"""Acceptance checks 1-10.

Each check is a self-contained function returning a :class:`CriterionResult`;
``run_all`` executes them, optionally on a thread pool.  ``fault`` names a
deliberate corruption used to confirm that a check can fail.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from . import barenblatt as bb
from .affine import (barenblatt_affine, exact_affine_flow, integrate_affine,
                     integrate_correction, tilde_eta_xt)
from .diagnostics import (boundary_asymptotics, center_of_mass_law, energy_series,
                          field_errors)
from .numcore import fit_rate, log_resample, quad_weighted
from .perturbation import PerturbationSpec
from .solver1d import make_grid1d, run
from .solver3d import make_grid3d, run3

FAULTS = ("B", "A")


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    values: Dict[str, float] = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.title}: {self.summary} ({self.seconds:.1f}s)"


# -- independent oracles -------------------------------------------------------

def coefficient_matched_B(gamma: float, dim: int) -> float:
    """B from symbolic coefficient matching of rho_t = Lap(rho^gamma)."""
    import sympy as sp

    g = sp.nsimplify(gamma)
    s, r, z, A, B = sp.symbols("s r z A B", positive=True)
    k = dim * g - dim + 2
    al = 1 / (g - 1)
    # z = A - B s^(-2/k) r^2 and its derivatives at fixed r
    zt = 2 * B / k * s ** (-2 / k - 1) * r ** 2
    zr = -2 * B * s ** (-2 / k) * r
    zrr = -2 * B * s ** (-2 / k)
    rho = s ** (-dim / k) * z ** al
    P = s ** (-dim * g / k) * z ** (al * g)
    rho_t = sp.diff(rho, s) + sp.diff(rho, z) * zt
    lap = sp.diff(P, z, 2) * zr ** 2 + sp.diff(P, z) * zrr + (dim - 1) / r * sp.diff(P, z) * zr
    q = sp.expand(sp.powsimp(sp.expand((rho_t - lap) / (s ** (-dim / k - 1) * z ** (al - 1))),
                             force=True))
    q = sp.expand(sp.powsimp(sp.expand(q.subs(z, A - B * s ** (-2 / k) * r ** 2)), force=True))
    sol = sp.solve(sp.Poly(q, r).coeffs(), B, dict=True)
    if len(sol) != 1:
        raise RuntimeError(f"coefficient matching gave {sol}")
    return float(sol[0][B])


def gauss_mass(gamma: float, dim: int, A: float, B: float, panels: int = 200,
               order: int = 8) -> float:
    """Composite Gauss-Legendre mass after ``x = R sin(theta)`` removes the endpoint zero."""
    alpha = 1.0 / (gamma - 1.0)
    R = math.sqrt(A / B)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 0.5 * math.pi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    th = (mid + half * nodes).ravel()
    w = (half * weights).ravel()
    f = A ** alpha * np.cos(th) ** (2.0 * alpha + 1.0) * R
    if dim == 1:
        return float(2.0 * np.sum(w * f))
    return float(4.0 * math.pi * np.sum(w * f * (R * np.sin(th)) ** 2))


def theta0_quadrature(profile, pert: PerturbationSpec) -> float:
    """(1/M) int rho0 (w0 + w1) dx by adaptive quadrature, independent of any grid."""
    R = profile.radius0

    def f(x):
        w0, w1 = pert.fields(np.array([x]), dim=1)
        return float(bb.density(profile, x, 0.0) * (w0[0] + w1[0]))

    return quad_weighted(f, (-R, R), tol=1e-13) / profile.mass


def _profile(gamma, dim, fault=None):
    p = bb.solve_profile_constants(gamma, 1.0, dim)
    if fault == "B":
        p = replace(p, B=1.1 * p.B)
    elif fault == "A":
        p = replace(p, A=1.1 * p.A)
    return p


def _order(errs):
    return [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]


# -- criteria ------------------------------------------------------------------

def criterion_1(fault=None) -> CriterionResult:
    worst_res, worst_mass = 0.0, 0.0
    for gamma in (1.5, 2.0, 3.0):
        for dim in (1, 3):
            p = _profile(gamma, dim, fault)
            for t in (0.5, 5.0):
                Rt = float(bb.boundary_radius(p, t))
                for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
                    res = bb.pme_residual(p, frac * Rt, t, 1e-4)
                    worst_res = max(worst_res, abs(res))
            for t in (0.0, 1.0, 10.0, 1e3):
                worst_mass = max(worst_mass, abs(bb.mass_at(p, t) - p.mass))
    ok = worst_res < 1e-5 and worst_mass < 1e-8
    return CriterionResult(1, "Barenblatt exactness", ok,
                           f"max |PME residual| = {worst_res:.2e} (< 1e-5), "
                           f"max mass error = {worst_mass:.2e} (< 1e-8)",
                           {"residual": worst_res, "mass_error": worst_mass})


def criterion_2(fault=None) -> CriterionResult:
    worst_B, worst_A = 0.0, 0.0
    vals = {}
    for gamma in (1.5, 2.0, 3.0):
        for dim in (1, 3):
            p = _profile(gamma, dim, fault)
            worst_B = max(worst_B, abs(p.B - coefficient_matched_B(gamma, dim)))
            m = gauss_mass(gamma, dim, p.A, p.B, panels=400)
            worst_A = max(worst_A, abs(m - p.mass))
            if gamma == 2.0:
                vals[f"A_{dim}d"] = p.A
    ref_ok = abs(vals["A_1d"] - 0.36056) < 5e-6 and abs(vals["A_3d"] - 0.1348) < 5e-5
    ok = worst_B < 1e-12 and worst_A < 1e-8 and ref_ok
    return CriterionResult(2, "Profile constants", ok,
                           f"|B - matched| = {worst_B:.1e}, |mass(A) - M| = {worst_A:.1e}, "
                           f"A_1d = {vals['A_1d']:.6f}, A_3d = {vals['A_3d']:.6f}",
                           {"B_error": worst_B, "A_mass_error": worst_A, **vals})


def criterion_3(fault=None) -> CriterionResult:
    targets = {1: -2.0 / 3.0, 3: -4.0 / 5.0}
    vals, ok = {}, True
    for dim, target in targets.items():
        c = integrate_correction(2.0, dim, 1.0e4 * (1 + 1e-9))
        t = c.t[c.t > 0]
        h, _ = c(t)
        fit = fit_rate(log_resample(t, h / np.log(2.0 + t), (1e2, 1e4)), (1e2, 1e4))
        etxt = tilde_eta_xt(c, c.t)
        signs = bool(np.all(c.h >= 0.0) and np.all(etxt >= 0.0))
        vals[f"exponent_{dim}d"] = fit.exponent
        ok &= abs(fit.exponent - target) <= 0.07 and signs
    return CriterionResult(3, "Correction ODE rates", ok,
                           f"h/ln(2+t) exponents {vals['exponent_1d']:.3f} (1D, target -0.667) "
                           f"and {vals['exponent_3d']:.3f} (3D, target -0.800), tol 0.07; "
                           "h >= 0 and eta_xt >= 0", vals)


def scaled_affine_deviation(gamma, dim, t_end=1e4):
    p = bb.solve_profile_constants(gamma, 1.0, dim)
    tr = integrate_affine(barenblatt_affine(p, 0.0), gamma, dim, t_end)
    ref = barenblatt_affine(p, tr.t)
    rel = np.max([np.abs(tr.a / ref.a - 1), np.abs(tr.b / ref.b - 1),
                  np.abs(tr.e / ref.e - 1)], axis=0)
    return tr, rel * (1.0 + tr.t) / np.log(2.0 + tr.t)


def criterion_4(fault=None) -> CriterionResult:
    ok, vals, parts = True, {}, []
    for dim in (1, 3):
        tr, dev = scaled_affine_deviation(2.0, dim)
        c = tr.conserved()
        drift = float(np.max(np.abs(c[tr.t <= 1e3] / c[0] - 1.0)))
        decades = [float(dev[(tr.t >= lo) & (tr.t <= 10 * lo)].max()) for lo in (10.0, 1e2, 1e3)]
        mono = all(decades[i + 1] <= decades[i] for i in range(2))
        ok &= drift < 1e-8 and mono
        vals[f"drift_{dim}d"] = drift
        parts.append(f"{dim}D drift {drift:.1e}, decade maxima "
                     + ", ".join(f"{d:.4f}" for d in decades))
    return CriterionResult(4, "Affine family", ok, "; ".join(parts), vals)


def criterion_5(fault=None) -> CriterionResult:
    ok, vals, parts = True, {}, []
    for dim in (1, 3):
        p = _profile(2.0, dim, fault)
        flow = exact_affine_flow(2.0, dim, 1.0 / p.k, 10.0, tol=1e-13)
        lam, _ = flow(10.0)
        errs = []
        for n in (100, 200, 400):
            if dim == 1:
                g = make_grid1d(p, n)
                res = run(g, None, PerturbationSpec.zero(), 10.0)
                errs.append(float(np.max(np.abs(res.snapshots[-1].eta - lam * g.x))))
            else:
                g = make_grid3d(p, n)
                res = run3(g, None, PerturbationSpec.zero(), 10.0)
                errs.append(float(np.max(np.abs(res.snapshots[-1].eta - lam * g.r))))
        orders = _order(errs)
        bound = 5e-5 * p.radius0
        ok &= min(orders) >= 1.8 and errs[-1] < bound
        vals[f"order_{dim}d"] = min(orders)
        vals[f"error_{dim}d"] = errs[-1]
        parts.append(f"{dim}D orders " + ", ".join(f"{o:.2f}" for o in orders)
                     + f", error(400) {errs[-1]:.1e} < {bound:.1e}")
    return CriterionResult(5, "Solver oracle", ok, "; ".join(parts), vals)


def criterion_6(fault=None) -> CriterionResult:
    p = _profile(2.0, 1, fault)
    g = make_grid1d(p, 64)
    t_end, dt_max = 5.0, 5e-4
    flow = exact_affine_flow(2.0, 1, 1.0 / p.k, t_end, tol=1e-13)
    cases = {
        "translation": (PerturbationSpec.translation(0.01), lambda t: 0.01),
        "kick": (PerturbationSpec.kick(0.05), lambda t: 0.05 * (1.0 - math.exp(-t))),
    }
    vals, com = {}, 0.0
    for name, (pert, offset) in cases.items():
        res = run(g, None, pert, t_end, dt_max=dt_max)
        err = 0.0
        for s in res.snapshots:
            lam, _ = flow(s.t)
            err = max(err, float(np.max(np.abs(s.eta - lam * g.x - offset(s.t)))))
        vals[name] = err
        com = max(com, center_of_mass_law(res).max_deviation)
    vals["center_of_mass"] = com
    ok = vals["translation"] < 1e-7 and vals["kick"] < 1e-7 and com < 1e-8
    return CriterionResult(6, "Exact invariances", ok,
                           f"translation {vals['translation']:.1e}, kick {vals['kick']:.1e} "
                           f"(< 1e-7); centre-of-mass law {com:.1e} (< 1e-8)", vals)


BUMP = dict(x_c=0.8, sigma=0.3)


def criterion_7(fault=None) -> CriterionResult:
    p = _profile(2.0, 1, fault)
    c = integrate_correction(2.0, 1, 1.0e4 * (1 + 1e-9))
    pert = PerturbationSpec.bump(0.01, **BUMP)
    theta0 = theta0_quadrature(p, pert)
    res = run(make_grid1d(p, 200), c, pert, 1.0e4)
    rep = boundary_asymptotics(res, theta0=theta0, window=(1e2, 1e4), with_energy=False)
    r1e3 = float(np.interp(1e3, rep.t, rep.residual))
    baseline = p.radius0 * float(c(1e3)[0])
    fit = rep.fits["boundary"]
    ok = abs(r1e3) < 3.0 * baseline and fit is not None and fit.exponent <= -0.5
    return CriterionResult(7, "Boundary shift", ok,
                           f"theta0 = {theta0:.6f}; |residual(1e3)| = {abs(r1e3):.4e} "
                           f"< 3 x {baseline:.4e}; exponent {fit.exponent:.3f} (<= -0.5)",
                           {"theta0": theta0, "residual_1e3": r1e3, "exponent": fit.exponent})


def criterion_8(fault=None) -> CriterionResult:
    p = _profile(2.0, 1, fault)
    c = integrate_correction(2.0, 1, 1.0e3 * (1 + 1e-9))
    res = run(make_grid1d(p, 200), c, PerturbationSpec.bump(0.005, **BUMP), 1.0e3,
              stride=2, dt_max=0.1)
    E = np.array([e.total for e in energy_series(res)])
    ratio = float(E.max() / E[0])
    return CriterionResult(8, "Energy boundedness", ratio <= 10.0,
                           f"max E(t)/E(0) on [0, 1e3] = {ratio:.3f} (<= 10)",
                           {"ratio": ratio, "E0": float(E[0])})


def criterion_9(fault=None) -> CriterionResult:
    gamma = 2.0
    p = _profile(gamma, 3, fault)
    c = integrate_correction(gamma, 3, 1.0e4 * (1 + 1e-9))
    g = make_grid3d(p, 200)
    win = (1e2, 1e4)
    zero = run3(g, c, PerturbationSpec.zero(), 1.0e4)
    growth = fit_rate(log_resample(zero.t, zero.radius, win), win).exponent
    target = 1.0 / (3.0 * gamma - 1.0)
    dil = run3(g, c, PerturbationSpec.dilation(0.01), 1.0e4)
    fit = boundary_asymptotics(dil, window=win, with_energy=False).fits["boundary"]
    ok = abs(growth - target) <= 0.02 * target and fit is not None and fit.exponent <= -0.5
    return CriterionResult(9, "3D radius", ok,
                           f"R growth exponent {growth:.4f} (0.2 +- 2%); dilation residual "
                           f"exponent {fit.exponent:.3f} (<= -0.5)",
                           {"growth": growth, "residual_exponent": fit.exponent})


def criterion_10(fault=None) -> CriterionResult:
    gamma = 2.0
    p = _profile(gamma, 1, fault)
    c = integrate_correction(gamma, 1, 1.0e4 * (1 + 1e-9))
    res = run(make_grid1d(p, 200), c, PerturbationSpec.zero(), 1.0e4)
    win = (1e2, 1e4)
    st = res.times
    errs = np.array([field_errors(s, res.grid) for s in res.snapshots])
    sel = st > 0
    fd = fit_rate((st[sel], errs[sel, 0]), win).exponent
    fv = fit_rate((st[sel], errs[sel, 1]), win).exponent
    target = -gamma / (gamma + 1.0)
    ok = abs(fd - target) <= 0.1 and abs(fv - target) <= 0.1
    return CriterionResult(10, "Field errors", ok,
                           f"density exponent {fd:.3f}, velocity exponent {fv:.3f} "
                           f"(target {target:.3f} +- 0.1)",
                           {"density": fd, "velocity": fv})


CRITERIA: Dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def evaluate(number: int, fault: Optional[str] = None) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        res = CRITERIA[number](fault)
    except Exception as exc:   # a crash is a failure, reported with its cause
        res = CriterionResult(number, f"criterion {number}", False,
                              f"error: {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("VACUUMFRONT_THREADS", "1")))
    except ValueError:
        return 1


def run_all(numbers=None, fault: Optional[str] = None,
            threads: Optional[int] = None) -> List[CriterionResult]:
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    threads = thread_count() if threads is None else threads
    if threads <= 1:
        return [evaluate(n, fault) for n in numbers]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda n: evaluate(n, fault), numbers))
