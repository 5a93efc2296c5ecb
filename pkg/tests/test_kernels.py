import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vacuumfront import kernels
from vacuumfront._jit import HAVE_NUMBA
from vacuumfront.solver1d import make_grid1d
from vacuumfront.solver3d import make_grid3d

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def _perturbed(x, amp, seed):
    rng = np.random.default_rng(seed)
    return x + amp * (x[-1] - x[0]) / x.size * rng.uniform(-1, 1, x.size)


@needs_numba
@settings(max_examples=20)
@given(st.integers(0, 10_000), st.floats(0.0, 0.3))
def test_1d_kernels_agree(p1_grid, seed, amp):
    g = p1_grid
    eta0 = _perturbed(g.x, amp, seed)
    v0 = np.random.default_rng(seed + 1).normal(0.0, 0.1, g.x.size)
    out = []
    for adv in (kernels.advance1d_nb, kernels.advance1d_np):
        eta, v, F = eta0.copy(), v0.copy(), np.empty_like(eta0)
        kernels.forces1d_np(eta, g.S, g.dx, 2.0, F)
        bufs = [np.empty(4096) for _ in range(3)]
        t, n, status = adv(eta, v, F, g.m, g.S, g.c0sq, g.dx, 2.0, 0.0, 0.5, 0.4, math.inf,
                           *bufs)
        out.append((t, n, status, eta, v))
    (ta, na, sa, ea, va), (tb, nb, sb, eb, vb) = out
    assert (ta, na, sa) == (tb, nb, sb) == (0.5, na, kernels.OK)
    np.testing.assert_allclose(ea, eb, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(va, vb, rtol=1e-10, atol=1e-13)


@needs_numba
@settings(max_examples=20)
@given(st.integers(0, 10_000), st.floats(0.0, 0.2))
def test_3d_kernels_agree(p3_grid, seed, amp):
    g = p3_grid
    eta0 = _perturbed(g.r, amp, seed)
    eta0[0] = 0.0
    eta0 = np.maximum.accumulate(eta0)
    v0 = np.zeros_like(eta0)
    out = []
    for adv in (kernels.advance3d_nb, kernels.advance3d_np):
        eta, v, F = eta0.copy(), v0.copy(), np.empty_like(eta0)
        kernels.forces3d_np(eta, g.Sf, g.dvol, 2.0, F)
        bufs = [np.empty(4096) for _ in range(2)]
        t, n, status = adv(eta, v, F, g.m, g.Sf, g.r0gm1, g.dvol, g.dr, 2.0, 0.0, 0.5, 0.4,
                           math.inf, *bufs)
        out.append((t, n, status, eta, v))
    (ta, na, sa, ea, va), (tb, nb, sb, eb, vb) = out
    assert (ta, na, sa) == (tb, nb, sb)
    np.testing.assert_allclose(ea, eb, rtol=1e-12, atol=1e-14)


@pytest.fixture(scope="module")
def p1_grid(p1):
    return make_grid1d(p1, 40)


@pytest.fixture(scope="module")
def p3_grid(p3):
    return make_grid3d(p3, 40)


def test_forces_sum_to_zero(p1_grid):
    F = np.empty_like(p1_grid.x)
    assert kernels.forces1d_np(_perturbed(p1_grid.x, 0.2, 3), p1_grid.S, p1_grid.dx, 2.0,
                               F) == kernels.OK
    assert abs(F.sum()) < 1e-14


def test_crossing_is_reported(p1_grid):
    eta = p1_grid.x.copy()
    eta[5], eta[6] = eta[6], eta[5]
    F = np.empty_like(eta)
    assert kernels.forces1d_np(eta, p1_grid.S, p1_grid.dx, 2.0, F) == kernels.INTERPENETRATION
    if HAVE_NUMBA:
        assert kernels.forces1d_nb(eta, p1_grid.S, p1_grid.dx, 2.0, F) == \
            kernels.INTERPENETRATION


def test_buffer_capacity_stops_stepping(p1_grid):
    g = p1_grid
    eta, v, F = g.x.copy(), g.x / 3.0, np.empty_like(g.x)
    kernels.forces1d(eta, g.S, g.dx, 2.0, F)
    bufs = [np.empty(5) for _ in range(3)]
    t, n, status = kernels.advance1d(eta, v, F, g.m, g.S, g.c0sq, g.dx, 2.0, 0.0, 10.0, 0.4,
                                     1e-3, *bufs)
    assert (n, status) == (5, kernels.OK)
    assert t == pytest.approx(5e-3)


def test_numpy_fallback_selected_by_environment():
    code = ("import vacuumfront, vacuumfront.kernels as k;"
            "print(vacuumfront.backend(), k.advance1d is k.advance1d_np)")
    env = dict(os.environ, VACUUMFRONT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]


def test_numpy_fallback_runs_a_short_simulation():
    code = """
import numpy as np
from vacuumfront import solve_profile_constants, PerturbationSpec
from vacuumfront.solver1d import make_grid1d, run
from vacuumfront.affine import exact_affine_flow
p = solve_profile_constants(2.0, 1.0, 1)
g = make_grid1d(p, 32)
res = run(g, None, PerturbationSpec.zero(), 1.0, dt_max=1e-3)
lam, _ = exact_affine_flow(2.0, 1, 1 / p.k, 1.0)(1.0)
print(np.max(np.abs(res.snapshots[-1].eta - lam * g.x)))
"""
    env = dict(os.environ, VACUUMFRONT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    assert float(out.stdout) < 1e-6
