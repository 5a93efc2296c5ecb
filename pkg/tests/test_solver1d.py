import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vacuumfront import barenblatt as bb
from vacuumfront.affine import exact_affine_flow, tilde_eta_x
from vacuumfront.diagnostics import eulerian_mass
from vacuumfront.perturbation import PerturbationSpec
from vacuumfront.solver1d import (FlowState1D, SolverAbort, accelerations, cfl_dt, init_state,
                                  make_grid1d, output_times, run, step)


@pytest.fixture(scope="module")
def grid(p1):
    return make_grid1d(p1, 100)


@pytest.fixture(scope="module")
def flow10(p1):
    return exact_affine_flow(2.0, 1, 1.0 / p1.k, 10.0, tol=1e-13)


# -- grid --------------------------------------------------------------------------

@pytest.mark.parametrize("graded", (False, True))
@pytest.mark.parametrize("rule", ("balanced", "integral"))
def test_grid_invariants(p1, graded, rule):
    g = make_grid1d(p1, 64, graded=graded, mass_rule=rule)
    assert g.x[0] == -p1.radius0 and g.x[-1] == p1.radius0
    assert np.all(np.diff(g.x) > 0)
    np.testing.assert_array_equal(g.x, -g.x[::-1])
    np.testing.assert_allclose(g.m, g.m[::-1], rtol=1e-13)
    assert np.all(g.m > 0)
    assert g.n == 64 and g.xf.size == 64


def test_integral_masses_sum_to_total(p1):
    assert make_grid1d(p1, 50, mass_rule="integral").total_mass == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("n", (50, 100, 200))
def test_balanced_masses_are_second_order_accurate(p1, n):
    g = make_grid1d(p1, n)
    assert abs(g.total_mass - 1.0) < 2.0 / n ** 2


def test_balanced_first_moment_vanishes(grid):
    assert abs(np.sum(grid.m * grid.x)) < 1e-15


def test_balanced_masses_make_affine_flow_exact(grid):
    # forces of eta = lam x balance m lam^(-gamma) x / k exactly
    lam = 1.7
    a = accelerations(FlowState1D(lam * grid.x, np.zeros_like(grid.x), 0.0), grid)
    np.testing.assert_allclose(a, lam ** (1 - grid.profile.k) * grid.x / grid.profile.k,
                               rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("kw", [dict(n=3), dict(n=10, mass_rule="lumped")])
def test_grid_rejects_bad_arguments(p1, kw):
    with pytest.raises(ValueError):
        make_grid1d(p1, **kw)


def test_grid_rejects_3d_profile(p3):
    with pytest.raises(ValueError):
        make_grid1d(p3, 10)


# -- initial data --------------------------------------------------------------------

def test_init_examples(grid):
    s = init_state(grid, None, PerturbationSpec.zero())
    np.testing.assert_array_equal(s.eta, grid.x)
    np.testing.assert_allclose(s.eta_t, grid.x / 3.0)
    s = init_state(grid, None, PerturbationSpec.translation(0.01))
    np.testing.assert_allclose(s.eta, grid.x + 0.01)
    s = init_state(grid, None, PerturbationSpec.kick(0.05))
    np.testing.assert_allclose(s.eta_t, grid.x / 3.0 + 0.05)


@given(st.floats(-3.0, 3.0), st.floats(0.05, 1.0), st.floats(-1.0, 1.0))
@settings(max_examples=30)
def test_bump_accepted_iff_discretely_monotone(eps, sigma, xc):
    p = bb.solve_profile_constants(2.0, 1.0, 1)
    g = make_grid1d(p, 40)
    pert = PerturbationSpec.bump(eps, xc, sigma)
    monotone = np.all(np.diff(g.x + pert.fields(g.x)[0]) > 0)
    if monotone:
        assert np.all(np.diff(init_state(g, None, pert).eta) > 0)
    else:
        with pytest.raises(ValueError, match="monotone"):
            init_state(g, None, pert)


# -- stepping --------------------------------------------------------------------

def test_step_matches_run(grid):
    s = init_state(grid, None, PerturbationSpec.zero())
    dt = 0.5 * cfl_dt(s, grid)
    for _ in range(5):
        s = step(s, grid, dt)
    res = run(grid, None, PerturbationSpec.zero(), 5 * dt, times=[5 * dt], dt_max=dt)
    np.testing.assert_allclose(s.eta, res.snapshots[-1].eta, rtol=1e-13)
    assert s.t == pytest.approx(5 * dt)
    assert len(s.history) == 3


def test_step_rejects_oversized_dt(grid):
    s = init_state(grid, None, PerturbationSpec.zero())
    with pytest.raises(ValueError, match="CFL"):
        step(s, grid, 2.0 * cfl_dt(s, grid, cfl=1.0))
    with pytest.raises(ValueError):
        step(s, grid, 0.0)


def test_step_aborts_on_interpenetration(grid):
    s = init_state(grid, None, PerturbationSpec.zero())
    s.eta[10], s.eta[11] = s.eta[11], s.eta[10]
    with pytest.raises(SolverAbort, match="interpenetration"):
        step(s, grid, 1e-6)


def test_large_kick_crosses_and_aborts(grid):
    w1 = np.where(grid.x < 0, 5.0, -5.0)
    with pytest.raises(SolverAbort):
        run(grid, None, PerturbationSpec.custom(np.zeros_like(grid.x), w1), 5.0)


def test_cfl_examples(p1, flow10):
    g1, g2 = make_grid1d(p1, 100), make_grid1d(p1, 200)
    s1 = init_state(g1, None, PerturbationSpec.zero())
    s2 = init_state(g2, None, PerturbationSpec.zero())
    assert cfl_dt(s2, g2) == pytest.approx(0.5 * cfl_dt(s1, g1), rel=1e-2)
    dts = []
    for t in (0.0, 1.0, 10.0):
        lam, lam_t = flow10(t)
        dts.append(cfl_dt(FlowState1D(lam * g1.x, lam_t * g1.x, t), g1))
    assert 0 < dts[0] < dts[1] < dts[2]


# -- runs --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def zero_run_200(p1, corr1):
    return run(make_grid1d(p1, 200), corr1, PerturbationSpec.zero(), 10.0)


def test_zero_run_tracks_corrected_boundary(p1, corr1, zero_run_200):
    res = zero_run_200
    ratio = res.x_plus / (tilde_eta_x(corr1, res.t) * p1.radius0)
    assert np.all(np.abs(ratio - 1.0) < 1e-3)
    np.testing.assert_allclose(res.x_minus, -res.x_plus, rtol=1e-12)


def test_mass_conserved_at_every_snapshot(zero_run_200):
    for s in zero_run_200.snapshots:
        assert eulerian_mass(s, zero_run_200.grid) == pytest.approx(1.0, abs=1e-4)


def test_grid_convergence_order(p1, flow10):
    lam, _ = flow10(10.0)
    errs = []
    for n in (100, 200, 400):
        g = make_grid1d(p1, n, mass_rule="integral")
        res = run(g, None, PerturbationSpec.zero(), 10.0)
        errs.append(np.max(np.abs(res.snapshots[-1].eta - lam * g.x)))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 1.8


def test_translation_shifts_boundary_by_epsilon(p1, corr1):
    g = make_grid1d(p1, 100)
    res = run(g, corr1, PerturbationSpec.translation(0.01), 10.0, dt_max=1e-3)
    xbar = p1.radius0 * (1 + res.t) ** (1 / p1.k)
    h, _ = corr1(res.t)
    np.testing.assert_allclose(res.x_plus - xbar - 0.01, p1.radius0 * h, atol=1e-6)


def test_kick_closed_form(p1):
    g = make_grid1d(p1, 64)
    flow = exact_affine_flow(2.0, 1, 1.0 / p1.k, 3.0, tol=1e-13)
    res = run(g, None, PerturbationSpec.kick(0.05), 3.0, dt_max=1e-3)
    for s in res.snapshots:
        lam, _ = flow(s.t)
        assert np.max(np.abs(s.eta - lam * g.x - 0.05 * (1 - math.exp(-s.t)))) < 1e-6


def test_graded_grid_runs(p1):
    res = run(make_grid1d(p1, 80, graded=True), None, PerturbationSpec.bump(0.01, 0.8, 0.3), 2.0)
    assert res.snapshots[-1].t == 2.0
    assert np.all(np.diff(res.snapshots[-1].eta) > 0)


def test_boundary_series_is_monotone_in_time(zero_run_200):
    assert np.all(np.diff(zero_run_200.t) > 0)
    assert zero_run_200.t.size == zero_run_200.steps + 1


def test_t_end_zero_gives_initial_snapshot_only(grid):
    res = run(grid, None, PerturbationSpec.zero(), 0.0)
    assert len(res.snapshots) == 1 and res.steps == 0
    assert res.initial.t == 0.0


@pytest.mark.parametrize("kw", [dict(t_end=-1.0), dict(t_end=1.0, cfl=1.5)])
def test_run_rejects_bad_arguments(grid, kw):
    with pytest.raises(ValueError):
        run(grid, None, PerturbationSpec.zero(), **kw)


# -- snapshot ladder -------------------------------------------------------------

def test_geometric_ladder():
    ts = output_times(1.0, stride=1)
    np.testing.assert_allclose(ts, [1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0])


def test_linear_ladder():
    np.testing.assert_allclose(output_times(1.0, "linear", 0.25), [0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(output_times(0.9, "linear", 0.5), [0.5, 0.9])


@given(st.floats(1e-3, 1e5), st.sampled_from(("geometric", "linear")))
def test_ladder_ends_at_t_end_and_increases(t_end, ladder):
    ts = output_times(t_end, ladder, stride=4 if ladder == "geometric" else t_end / 7)
    assert ts[-1] == t_end
    assert np.all(np.diff(ts) > 0) and ts[0] > 0


def test_ladder_errors():
    assert output_times(0.0).size == 0
    with pytest.raises(ValueError):
        output_times(1.0, "cubic")
    with pytest.raises(ValueError):
        output_times(1.0, "linear", 0.0)
