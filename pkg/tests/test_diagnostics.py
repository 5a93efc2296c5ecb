import math

import numpy as np
import pytest

from vacuumfront.acceptance import theta0_quadrature
from vacuumfront.diagnostics import (boundary_asymptotics, boundary_c2_slope,
                                     center_of_mass_law, default_window, energies,
                                     energy_series, eulerian_mass, field_errors, shift_theta0)
from vacuumfront.perturbation import PerturbationSpec
from vacuumfront.solver1d import FlowState1D, init_state, make_grid1d, run
from vacuumfront.solver3d import FlowState3D, init_state3, make_grid3d, run3

BUMP = PerturbationSpec.bump(0.01, 0.8, 0.3)


# -- shift ----------------------------------------------------------------------

@pytest.mark.parametrize("pert, expected", [
    (PerturbationSpec.zero(), 0.0),
    (PerturbationSpec.translation(0.01), 0.01),
    (PerturbationSpec.kick(0.05), 0.05),
])
def test_theta0_examples(p1, pert, expected):
    g = make_grid1d(p1, 100)
    assert shift_theta0(init_state(g, None, pert), g) == pytest.approx(expected, abs=1e-15)


def test_theta0_of_bump_matches_quadrature_and_refines(p1):
    ref = theta0_quadrature(p1, BUMP)
    vals = []
    for n in (200, 400, 800):
        g = make_grid1d(p1, n)
        vals.append(shift_theta0(init_state(g, None, BUMP), g))
    assert abs(vals[-1] - ref) < 1e-6
    assert abs(vals[2] - ref) < abs(vals[0] - ref)


def test_theta0_vanishes_for_odd_data(p1, p3):
    g = make_grid1d(p1, 100)
    assert abs(shift_theta0(init_state(g, None, PerturbationSpec.dilation(0.01)), g)) < 1e-15
    g3 = make_grid3d(p3, 20)
    assert shift_theta0(init_state3(g3, None, PerturbationSpec.zero()), g3) == 0.0


# -- centre of mass --------------------------------------------------------------

def test_center_of_mass_law_for_kick(p1):
    res = run(make_grid1d(p1, 64), None, PerturbationSpec.kick(0.05), 5.0, dt_max=5e-4)
    rep = center_of_mass_law(res)
    assert rep.max_deviation < 1e-8
    assert rep.theta[-1] == pytest.approx(0.05 * (1 - math.exp(-5.0)), abs=1e-8)


def test_center_of_mass_law_for_bump(p1):
    res = run(make_grid1d(p1, 64), None, BUMP, 5.0, dt_max=5e-4)
    assert center_of_mass_law(res).max_deviation < 1e-8


# -- energies ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def bump_run(p1, corr1):
    return run(make_grid1d(p1, 200), corr1, PerturbationSpec.bump(0.005, 0.8, 0.3), 100.0,
               stride=2, dt_max=0.1)


def test_energy_of_unperturbed_start_vanishes(p1, corr1):
    g = make_grid1d(p1, 100)
    rep = energies(init_state(g, corr1, PerturbationSpec.zero()), corr1, g)
    assert rep.total < 1e-20


def test_energy_positive_for_bump(bump_run):
    reps = energy_series(bump_run)
    assert reps[0].total > 0
    assert all(r.total >= r.gradient_part >= 0 for r in reps)
    assert set(reps[0].E_mixed) == {(0, 1), (0, 2), (1, 1)}


def test_energy_stays_bounded(bump_run):
    E = np.array([r.total for r in energy_series(bump_run)])
    assert E.max() / E[0] <= 10.0


def test_energy_scales_quadratically(p1, corr1):
    g = make_grid1d(p1, 100)
    e = [energies(init_state(g, corr1, PerturbationSpec.bump(eps, 0.8, 0.3)), corr1, g).total
         for eps in (1e-5, 2e-5)]
    assert e[1] / e[0] == pytest.approx(4.0, rel=1e-4)


def test_3d_energy(p3, corr3):
    g = make_grid3d(p3, 60)
    assert energies(init_state3(g, corr3, PerturbationSpec.zero()), corr3, g).total < 1e-20
    assert energies(init_state3(g, corr3, PerturbationSpec.dilation(0.01)), corr3, g).total > 0


def test_energy_series_needs_correction(p1):
    res = run(make_grid1d(p1, 32), None, PerturbationSpec.zero(), 0.1)
    with pytest.raises(ValueError):
        energy_series(res)


# -- field errors ------------------------------------------------------------------

def test_field_errors_closed_form_1d(p1, corr1):
    # on eta = lam x: density error |1/lam - 1/s^(1/k)| s^(2/k)
    g = make_grid1d(p1, 50)
    t = 50.0
    lam = 1.05 * (1 + t) ** (1 / 3)
    d, v = field_errors(FlowState1D(lam * g.x, 0.2 * g.x, t), g)
    sx = (1 + t) ** (1 / 3)
    assert d == pytest.approx(abs(1 / lam - 1 / sx) * sx ** 2, rel=1e-12)
    assert v == pytest.approx(abs(0.2 - sx / (3 * (1 + t))) * p1.radius0 * (1 + t), rel=1e-12)


def test_field_errors_closed_form_3d(p3):
    g = make_grid3d(p3, 50)
    t = 10.0
    sx = (1 + t) ** 0.2
    lam = 1.02 * sx
    d, v = field_errors(FlowState3D(lam * g.r, lam / (5 * (1 + t)) * g.r, t), g)
    assert d == pytest.approx(abs(lam ** -3 - sx ** -3) * sx ** 4, rel=1e-10)
    assert v == pytest.approx(0.02 * sx / 5, rel=1e-10)


def test_field_errors_zero_on_barenblatt(p1):
    g = make_grid1d(p1, 20)
    sx = 4.0 ** (1 / 3)
    d, v = field_errors(FlowState1D(sx * g.x, sx / (3 * 4.0) * g.x, 3.0), g)
    assert d < 1e-14 and v < 1e-14


# -- mass and vacuum -----------------------------------------------------------------

def test_eulerian_mass_examples(p1, p3):
    g1 = make_grid1d(p1, 400)
    s = init_state(g1, None, PerturbationSpec.zero())
    assert eulerian_mass(s, g1) == pytest.approx(1.0, abs=1e-4)
    s.eta *= 3.0
    assert eulerian_mass(s, g1) == pytest.approx(1.0, abs=1e-4)
    g3 = make_grid3d(p3, 400)
    assert eulerian_mass(init_state3(g3, None, PerturbationSpec.zero()), g3) == \
        pytest.approx(1.0, abs=1e-4)


def test_physical_vacuum_persists(p1):
    res = run(make_grid1d(p1, 200), None, BUMP, 100.0)
    ratios = [boundary_c2_slope(s, res.grid) for s in res.snapshots]
    assert 0.5 < min(ratios) and max(ratios) < 1.5


def test_boundary_slope_on_affine_flow(p1):
    # eta = lam x: slope ratio to Barenblatt is ((1+t)^(1/k) / lam)^gamma
    g = make_grid1d(p1, 200)
    base = boundary_c2_slope(FlowState1D(g.x.copy(), g.x / 3, 0.0), g)
    t, lam = 8.0, 1.9
    ratio = boundary_c2_slope(FlowState1D(lam * g.x, g.x / 3, t), g)
    assert ratio == pytest.approx(base * ((1 + t) ** (1 / 3) / lam) ** 2, rel=1e-12)


# -- asymptotics report ---------------------------------------------------------------

def test_zero_run_residual_is_the_correction(p1, corr1):
    res = run(make_grid1d(p1, 200), corr1, PerturbationSpec.zero(), 100.0)
    rep = boundary_asymptotics(res, with_energy=False)
    h, _ = corr1(rep.t)
    np.testing.assert_allclose(rep.residual, p1.radius0 * h, atol=1e-4 * p1.radius0)
    assert rep.theta0 == 0.0
    assert rep.fits == {}     # t_end below the default window


def test_report_fields_and_fits(bump_run):
    rep = boundary_asymptotics(bump_run, window=(10.0, 100.0))
    assert set(rep.fits) == {"boundary", "boundary_minus", "density", "velocity", "energy"}
    assert rep.energy_total.shape == rep.snapshot_t.shape
    assert rep.fits["boundary"].exponent < 0


def test_3d_report(p3, corr3):
    res = run3(make_grid3d(p3, 50), corr3, PerturbationSpec.dilation(0.01), 200.0)
    rep = boundary_asymptotics(res, window=(20.0, 200.0), with_energy=False)
    assert rep.residual_minus is None and rep.theta0 == 0.0
    assert rep.fits["boundary"].exponent < 0


def test_default_window():
    assert default_window(1e4) == (1e2, 1e4)
    assert default_window(1e6) == (1e4, 1e6)


def test_translation_energy_has_no_gradient_part(p1, corr1):
    g = make_grid1d(p1, 100)
    rep = energies(init_state(g, corr1, PerturbationSpec.translation(0.01)), corr1, g)
    assert rep.gradient_part < 1e-20 * rep.total   # rounding of (x + eps) - x only
    assert rep.E[0] == pytest.approx(1e-4 * np.sum(g.rho0[1:] + g.rho0[:-1]) / 2 * g.dx[0],
                                     rel=1e-12)


@pytest.fixture(scope="module")
def translation_long(p1):
    from vacuumfront.affine import integrate_correction
    c = integrate_correction(2.0, 1, 2e4 * (1 + 1e-9))
    return run(make_grid1d(p1, 100), c, PerturbationSpec.translation(0.01), 2e4)


def test_translation_residual_rate(translation_long):
    fit = boundary_asymptotics(translation_long, window=(1e2, 1e4), with_energy=False)
    assert fit.theta0 == pytest.approx(0.01, abs=1e-15)
    assert -0.67 < fit.fits["boundary"].exponent < -0.52


def test_fit_stable_under_window_doubling(translation_long):
    a = boundary_asymptotics(translation_long, window=(1e2, 1e4), with_energy=False)
    b = boundary_asymptotics(translation_long, window=(2e2, 2e4), with_energy=False)
    for key in ("boundary", "density", "velocity"):
        assert abs(a.fits[key].exponent - b.fits[key].exponent) < 0.05
