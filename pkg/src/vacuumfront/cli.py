"""Command-line front end.

    vacuumfront barenblatt|affine|correction|simulate|rates --config run.cfg --out DIR
    vacuumfront verify [--seed-fault B]

Exit codes: 0 success, 1 numerical abort or failed verification, 2 bad configuration.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from . import acceptance
from . import barenblatt as bb
from .affine import (barenblatt_affine, integrate_affine, integrate_correction,
                     tilde_eta_x, tilde_eta_xt)
from .config import ConfigError, RunConfig, load_config
from .diagnostics import boundary_asymptotics, center_of_mass_law, energy_series
from .numcore import IntegrationError, RateFitError, fit_rate, log_resample
from .solver1d import SolverAbort, make_grid1d, run
from .solver3d import make_grid3d, run3


# -- output helpers -------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return "%.17g" % v


def write_csv(path: Path, header: Sequence[str], columns: Sequence) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*cols):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    path.write_text(buf.getvalue())


def write_keyvalue(path: Path, items: Dict[str, object]) -> None:
    path.write_text("".join(f"{k}={_fmt(v)}\n" for k, v in items.items()))


def write_rows(path: Path, header: Sequence[str], rows: List[Sequence]) -> None:
    path.write_text(",".join(header) + "\n"
                    + "".join(",".join(_fmt(v) for v in r) + "\n" for r in rows))


def _outdir(cfg: RunConfig, override) -> Path:
    d = Path(override if override else cfg.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _fit_or_nan(t, v, window):
    try:
        return fit_rate(log_resample(t, v, window), window).exponent
    except (RateFitError, ValueError):
        return math.nan


# -- commands -------------------------------------------------------------------

def cmd_barenblatt(cfg: RunConfig, out: Path) -> int:
    p = bb.solve_profile_constants(cfg.gamma, cfg.mass, cfg.dim)
    mass_check = bb.mass_at(p, 0.0)
    write_keyvalue(out / "constants.txt", {
        "gamma": p.gamma, "mass": p.mass, "dim": p.dim, "A": p.A, "B": p.B, "k": p.k,
        "radius0": p.radius0, "mass_recomputed": mass_check,
    })
    rows_t, rows_x = [], []
    for t in (0.0, 1.0, 10.0, 100.0):
        x = np.linspace(0.0 if cfg.dim == 3 else -1.0, 1.0, 201) * float(bb.boundary_radius(p, t))
        rows_t.append(np.full_like(x, t))
        rows_x.append(x)
    t = np.concatenate(rows_t)
    x = np.concatenate(rows_x)
    rho = np.concatenate([bb.density(p, xi, ti[0]) for xi, ti in zip(rows_x, rows_t)])
    u = np.asarray(bb.velocity(p, x, t))
    header, cols = ["t", "x", "rho", "u"], [t, x, rho, u]
    if cfg.dim == 3:
        header.append("shell_integrand")
        cols.append(4.0 * np.pi * x ** 2 * rho)
    write_csv(out / "profile.csv", header, cols)
    print(f"A={p.A:.10g} B={p.B:.10g} k={p.k:g} radius0={p.radius0:.10g} "
          f"mass_recomputed={mass_check:.12g}")
    return 0


def cmd_affine(cfg: RunConfig, out: Path) -> int:
    p = bb.solve_profile_constants(cfg.gamma, cfg.mass, cfg.dim)
    tr = integrate_affine(barenblatt_affine(p, 0.0), cfg.gamma, cfg.dim, cfg.t_end, cfg.ode_tol)
    ref = barenblatt_affine(p, tr.t)
    write_csv(out / "affine.csv", ["t", "a", "b", "e", "abar", "bbar", "ebar", "conserved"],
              [tr.t, tr.a, tr.b, tr.e, ref.a, ref.b, ref.e, tr.conserved()])
    c = tr.conserved()
    rel = np.max([np.abs(tr.a / ref.a - 1), np.abs(tr.b / ref.b - 1),
                  np.abs(tr.e / ref.e - 1)], axis=0)
    sel = tr.t > 0
    rows = [["conserved_drift", float(np.max(np.abs(c / c[0] - 1)))],
            ["deviation_exponent", _fit_or_nan(tr.t[sel], rel[sel], cfg.rate_window)]]
    write_rows(out / "rates.csv", ["quantity", "value"], rows)
    for name, val in rows:
        print(f"{name}={val:.6g}")
    return 0


def cmd_correction(cfg: RunConfig, out: Path) -> int:
    c = integrate_correction(cfg.gamma, cfg.dim, cfg.t_end, cfg.ode_tol)
    ebx = (1.0 + c.t) ** (1.0 / c.k)
    write_csv(out / "correction.csv", ["t", "h", "ht", "eta_bar_x", "tilde_eta_x"],
              [c.t, c.h, c.h_t, ebx, tilde_eta_x(c, c.t)])
    sel = c.t > 0
    t = c.t[sel]
    rows = [["h_over_log_exponent", _fit_or_nan(t, c.h[sel] / np.log(2.0 + t), cfg.rate_window)],
            ["h_exponent", _fit_or_nan(t, c.h[sel], cfg.rate_window)],
            ["ht_exponent", _fit_or_nan(t, np.abs(c.h_t[sel]), cfg.rate_window)],
            ["min_h", float(c.h.min())],
            ["min_tilde_eta_xt", float(np.min(tilde_eta_xt(c, c.t)))]]
    write_rows(out / "rates.csv", ["quantity", "value"], rows)
    for name, val in rows:
        print(f"{name}={val:.6g}")
    return 0


def cmd_rates(cfg: RunConfig, out: Path) -> int:
    """Closed-form rate table for both dimensions at the configured gamma."""
    rows = []
    for dim in (1, 3):
        c = integrate_correction(cfg.gamma, dim, cfg.rate_window[1] * (1 + 1e-9), cfg.ode_tol)
        t = c.t[c.t > 0]
        h = c(t)[0]
        rows.append([f"h_over_log_exponent_{dim}d",
                     _fit_or_nan(t, h / np.log(2.0 + t), cfg.rate_window)])
        rows.append([f"h_exponent_{dim}d", _fit_or_nan(t, h, cfg.rate_window)])
        tr, dev = acceptance.scaled_affine_deviation(cfg.gamma, dim, cfg.rate_window[1])
        rows.append([f"affine_scaled_deviation_max_{dim}d", float(dev[tr.t >= 10.0].max())])
    write_rows(out / "rates.csv", ["quantity", "value"], rows)
    for name, val in rows:
        print(f"{name}={val:.6g}")
    return 0


def plot_script(res_col: int, ref_col: int) -> str:
    """gnuplot script for the CSVs written by ``simulate``."""
    return f"""set datafile separator ','
set key autotitle columnhead
set logscale xy
set terminal pngcairo size 900,600
set output 'boundary.png'
set title 'boundary residual'
plot 'boundary.csv' using 1:(abs(${res_col})) with lines, '' using 1:(abs(${ref_col})) with lines dt 2
set output 'energy.png'
set title 'perturbation energy'
plot 'energy.csv' using 1:8 with linespoints
set output 'fields.png'
set title 'weighted field errors'
plot 'fields.csv' using 1:2 with linespoints, '' using 1:3 with linespoints
"""


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    p = bb.solve_profile_constants(cfg.gamma, cfg.mass, cfg.dim)
    c = integrate_correction(cfg.gamma, cfg.dim, cfg.t_end * (1 + 1e-9), cfg.ode_tol)
    stride = 4 if cfg.snapshot_ladder == "geometric" else cfg.t_end / 64.0
    dt_max = cfg.cfl / 16.0   # keeps time error out of the t^5-weighted energies
    try:
        if cfg.dim == 1:
            grid = make_grid1d(p, cfg.grid_n, graded=cfg.grid_graded)
            res = run(grid, c, cfg.perturbation, cfg.t_end, stride, ladder=cfg.snapshot_ladder,
                      cfl=cfg.cfl, dt_max=dt_max)
            x = grid.x
        else:
            grid = make_grid3d(p, cfg.grid_n, graded=cfg.grid_graded)
            res = run3(grid, c, cfg.perturbation, cfg.t_end, stride, ladder=cfg.snapshot_ladder,
                       cfl=cfg.cfl, dt_max=dt_max)
            x = grid.r
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rep = boundary_asymptotics(res, window=cfg.rate_window)
    lam_t = tilde_eta_x(c, res.t)
    rh = p.radius0 * c(res.t)[0]
    tol = 10.0 * (p.radius0 / cfg.grid_n) ** 2 * lam_t
    if cfg.dim == 1:
        write_csv(out / "boundary.csv",
                  ["t", "xminus", "xplus", "residual", "residual_minus", "closed_form", "tolerance"],
                  [res.t, res.x_minus, res.x_plus, rep.residual, rep.residual_minus, rh, tol])
        res_col = 4
    else:
        write_csv(out / "boundary.csv", ["t", "R", "residual", "closed_form", "tolerance"],
                  [res.t, res.radius, rep.residual, rh, tol])
        res_col = 3
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    for i, s in enumerate(res.snapshots):
        lam, lt, _, _ = c.strain(s.t)
        dx = np.gradient(s.eta, x, edge_order=2)
        if cfg.dim == 1:
            rho = grid.rho0 / dx
            w, wt = s.eta - lam * x, s.eta_t - lt * x
        else:
            q = np.divide(s.eta, x, out=np.full_like(x, dx[0]), where=x > 0)
            qt = np.divide(s.eta_t, x, out=np.full_like(x, lt), where=x > 0)
            rho = grid.rho0 / (q * q * dx)
            w, wt = q - lam, qt - lt
        write_csv(snap_dir / f"snap_{i:04d}.csv", ["x", "eta", "eta_t", "rho", "u", "w", "w_t"],
                  [x, s.eta, s.eta_t, rho, s.eta_t, w, wt])
    er = energy_series(res)
    write_csv(out / "energy.csv", ["t", "E0", "E1", "E2", "E01", "E02", "E11", "total"],
              [[e.t for e in er]] + [[e.E[j] for e in er] for j in range(3)]
              + [[e.E_mixed[key] for e in er] for key in ((0, 1), (0, 2), (1, 1))]
              + [[e.total for e in er]])
    write_csv(out / "fields.csv", ["t", "density_error", "velocity_error"],
              [rep.snapshot_t, rep.density_error, rep.velocity_error])
    E = np.array([e.total for e in er])
    items = {"theta0": rep.theta0, "steps": res.steps, "t_end": float(res.t[-1]),
             "energy_max_ratio": float(E.max() / E[0]) if E[0] > 0 else math.nan}
    if cfg.dim == 1:
        items["center_of_mass_deviation"] = center_of_mass_law(res).max_deviation
    for key, fit in rep.fits.items():
        items[f"exponent_{key}"] = fit.exponent if fit is not None else math.nan
    write_rows(out / "report.csv", ["quantity", "value"], [[k, v] for k, v in items.items()])
    (out / "plot.gp").write_text(plot_script(res_col, res_col + (2 if cfg.dim == 1 else 1)))
    for k, v in items.items():
        print(f"{k}={_fmt(v)}")
    return 0


def cmd_verify(fault=None) -> int:
    results = acceptance.run_all(fault=fault)
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 1


COMMANDS = {"barenblatt": cmd_barenblatt, "affine": cmd_affine, "correction": cmd_correction,
            "simulate": cmd_simulate, "rates": cmd_rates}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vacuumfront", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(list(COMMANDS) + ["verify"]))
    ap.add_argument("--config", help="flat key=value configuration file")
    ap.add_argument("--out", help="output directory (overrides output_dir)")
    ap.add_argument("--seed-fault", choices=acceptance.FAULTS,
                    help="corrupt a profile constant to check that verify can fail")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.seed_fault)
        cfg = load_config(args.config) if args.config else RunConfig().validate()
        out = _outdir(cfg, args.out)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverAbort, IntegrationError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
