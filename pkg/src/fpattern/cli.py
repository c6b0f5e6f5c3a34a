"""Command-line front end: build, verify, transport, trajectory, evolve.

Exit codes: 0 success, 1 configuration problem (bad flags, bad config
file, inconsistent values), 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import output as out
from .bearing import BearingState, advect_pi1, integrate_center, sup_grad_norm
from .config import _REQUIRED, RunConfig, grid_from, load_config, params_from, \
    pattern_from
from .errors import ConfigurationError, FPatternError
from .evolver import ConservationLedger, admissible_dt, diagnostics, \
    init_full_state, pattern_correlation, step_full
from .fields import ScalarField2D, make_grid, sample_bilinear
from .pressure import density_from_pi, reconstruct_pi0
from .verify import check_stability_class, exclusion_mask, refinement_orders, \
    residual_report


class _Parser(argparse.ArgumentParser):
    # bad flags are a configuration problem, not a crash
    def error(self, message):
        raise ConfigurationError(message)


def _build_parser():
    parser = _Parser(prog="fpattern",
                     description="localized rotating-gas pattern toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (("build", "reconstruct a steady pattern and its fields"),
                        ("verify", "residual report over a refinement ladder"),
                        ("transport", "advect a bearing field along a pattern"),
                        ("trajectory", "integrate the center drift ODE"),
                        ("evolve", "time-step the full system from a pattern")):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--threads", type=int, default=None,
                       help="thread cap exported to BLAS/OpenMP")
    return parser


def _prepare(cfg: RunConfig, args):
    outdir = args.out or cfg.get_str("output", "directory", "fpattern_out")
    os.makedirs(outdir, exist_ok=True)
    threads = args.threads
    if threads is None:
        threads = cfg.get_int("output", "threads", 0)
    if threads:
        if threads < 0:
            raise ConfigurationError(f"threads = {threads} must be positive")
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)
    return outdir


def _formats(cfg: RunConfig):
    raw = cfg.get_str("output", "formats", "vtk,csv")
    fmts = tuple(tok for tok in raw.replace(" ", "").split(",") if tok)
    for tok in fmts:
        if tok not in ("vtk", "csv"):
            raise ConfigurationError(
                f"[output] formats entry {tok!r} not in ['csv', 'vtk']")
    if not fmts:
        raise ConfigurationError("[output] formats selects nothing")
    return fmts


def _emit_scalar(outdir, name, field, fmts, files):
    if "vtk" in fmts:
        out.write_vtk_scalar(os.path.join(outdir, f"{name}.vtk"), field, name)
        files.append(f"{name}.vtk")
    if "csv" in fmts:
        out.write_field_csv(os.path.join(outdir, f"{name}.csv"), field, name)
        files.append(f"{name}.csv")


def _emit_vector(outdir, name, vec, fmts, files):
    if "vtk" in fmts:
        out.write_vtk_vector(os.path.join(outdir, f"{name}.vtk"), vec, name)
        files.append(f"{name}.vtk")
    if "csv" in fmts:
        out.write_vector_csv(os.path.join(outdir, f"{name}.csv"), vec, name)
        files.append(f"{name}.csv")


def _circulation(u, radius, samples=720):
    """Midpoint line integral of u . t around the circle of given radius."""
    th = (np.arange(samples) + 0.5) * (2.0 * np.pi / samples)
    xs, ys = radius * np.cos(th), radius * np.sin(th)
    u1 = sample_bilinear(u.x1, xs, ys)
    u2 = sample_bilinear(u.x2, xs, ys)
    ds = 2.0 * np.pi * radius / samples
    return float(((-np.sin(th)) * u1 + np.cos(th) * u2).sum() * ds)


def cmd_build(cfg: RunConfig, outdir):
    grid = grid_from(cfg)
    params = params_from(cfg)
    pattern = pattern_from(cfg, grid)
    field = reconstruct_pi0(pattern, params,
                            cfg.get_float("physics", "pi_ambient", _REQUIRED))
    rho = density_from_pi(field.pi0, params)
    fmts = _formats(cfg)
    files = []
    _emit_scalar(outdir, "phi", pattern.phi, fmts, files)
    _emit_scalar(outdir, "xi", pattern.xi, fmts, files)
    _emit_scalar(outdir, "pi0", field.pi0, fmts, files)
    _emit_scalar(outdir, "rho", rho, fmts, files)
    _emit_vector(outdir, "u", field.u, fmts, files)
    out.write_quiver_csv(os.path.join(outdir, "quiver.csv"), field.u,
                         cfg.get_int("output", "quiver_stride", 8))
    files.append("quiver.csv")

    speed = np.hypot(field.u.x1.values, field.u.x2.values)
    rows = [("kind", pattern.kind),
            ("r0", pattern.profile.r0),
            ("max_speed", float(speed.max())),
            ("min_pi0", float(field.pi0.values.min())),
            ("max_pi0", float(field.pi0.values.max())),
            ("circulation_mid", _circulation(field.u, 0.5 * pattern.profile.r0))]
    out.write_table_csv(os.path.join(outdir, "summary.csv"),
                        ["name", "value"], rows)
    files.append("summary.csv")

    if cfg.get_bool("output", "png", False):
        out.save_png(os.path.join(outdir, "pi0.png"), field.pi0, field.u,
                     cfg.get_int("output", "quiver_stride", 8), title="pi0")
        files.append("pi0.png")
    out.write_manifest(outdir, "build", cfg.text, files)
    print(f"build: wrote {len(files)} files to {outdir}")


def cmd_verify(cfg: RunConfig, outdir):
    params = params_from(cfg)
    pi_amb = cfg.get_float("physics", "pi_ambient", _REQUIRED)
    base = grid_from(cfg)
    ladder = cfg.get_int_list("verify", "ladder", None) or [base.nx]
    inner = cfg.get_str("verify", "inner", "fd", choices=("fd", "analytic"))
    band = cfg.get_int("verify", "band_cells", 3)
    rimf = cfg.get_float("verify", "rim_fraction", 0.15)
    bounds = (base.xmin, base.xmax, base.ymin, base.ymax)

    reports = []
    rows = []
    for n in ladder:
        g = make_grid(n, n, bounds)
        pat = pattern_from(cfg, g)
        fld = reconstruct_pi0(pat, params, pi_amb)
        rep = residual_report(fld, params, inner=inner, band_cells=band,
                              excluded=exclusion_mask(pat, band, rimf))
        reports.append(rep)
        rows.extend((n,) + r for r in rep.rows())
    files = []
    out.write_table_csv(os.path.join(outdir, "report.csv"),
                        ["n", "residual", "linf", "l2", "h", "excluded"], rows)
    files.append("report.csv")

    if len(reports) >= 2:
        orows = []
        for k in range(len(reports) - 1):
            orders = refinement_orders(reports[k], reports[k + 1])
            orows.extend((ladder[k], ladder[k + 1], name, o[0], o[1])
                         for name, o in orders.items())
        out.write_table_csv(os.path.join(outdir, "orders.csv"),
                            ["n_coarse", "n_fine", "residual",
                             "order_linf", "order_l2"], orows)
        files.append("orders.csv")

    pat = pattern_from(cfg, base)
    res = check_stability_class(pat.phi, pat.second_derivative_bound())
    srows = [("passed", int(res.passed)), ("worst", res.worst),
             ("c_bound", res.c_bound)]
    if res.witness is not None:
        (i, j), offset = res.witness
        srows += [("witness_i", i), ("witness_j", j), ("witness_offset", offset)]
    out.write_table_csv(os.path.join(outdir, "stability.csv"),
                        ["name", "value"], srows)
    files.append("stability.csv")
    out.write_manifest(outdir, "verify", cfg.text, files)
    print(f"verify: wrote {len(files)} files to {outdir}")


_PI1_KINDS = ("constant", "linear", "gaussian", "aligned")


def _pi1_xy(cfg: RunConfig, kind, X, Y):
    """Bearing field formula at arbitrary coordinates (aligned handled apart)."""
    a = cfg.get_float("bearing", "a", 1.0)
    if kind == "constant":
        return a * np.ones_like(X)
    if kind == "linear":
        return (a + cfg.get_float("bearing", "gx", 0.0) * X
                + cfg.get_float("bearing", "gy", 0.0) * Y)
    width = cfg.get_float("bearing", "width", 0.3)
    if not width > 0.0:
        raise ConfigurationError(f"[bearing] width = {width} must be positive")
    amp = cfg.get_float("bearing", "amp", 0.5)
    dx = X - cfg.get_float("bearing", "x0x", 0.0)
    dy = Y - cfg.get_float("bearing", "x0y", 0.0)
    return a + amp * np.exp(-(dx * dx + dy * dy) / width ** 2)


def _steps(cfg: RunConfig, section):
    dt = cfg.get_float(section, "dt", _REQUIRED)
    T = cfg.get_float(section, "T", _REQUIRED)
    if dt <= 0.0 or T <= 0.0:
        raise ConfigurationError(f"[{section}] dt and T must be positive")
    n = int(round(T / dt))
    if n < 1:
        raise ConfigurationError(f"[{section}] T = {T} is below one step dt = {dt}")
    return dt, n


def cmd_transport(cfg: RunConfig, outdir):
    grid = grid_from(cfg)
    velocity = cfg.get_str("bearing", "velocity", "pattern",
                           choices=("pattern", "solid_body"))
    pattern = None
    if velocity == "pattern":
        pattern = pattern_from(cfg, grid)
        phi = pattern.phi
    else:
        X, Y = grid.meshes()
        phi = ScalarField2D(grid, 0.5 * (X * X + Y * Y))

    kind = cfg.get_str("bearing", "pi1_kind", "constant", choices=_PI1_KINDS)
    X, Y = grid.meshes()
    if kind == "aligned":
        vals = (cfg.get_float("bearing", "a", 1.0)
                + cfg.get_float("bearing", "b", 0.3) * phi.values)
    else:
        vals = _pi1_xy(cfg, kind, X, Y)
    pi1 = ScalarField2D(grid, vals)

    dt, steps = _steps(cfg, "bearing")
    state = BearingState(pi1, (0.0, 0.0), (0.0, 0.0))
    final = advect_pi1(state, phi, dt, steps)
    t_final = steps * dt

    sup0 = sup_grad_norm(pi1)
    supT = sup_grad_norm(final.pi1)
    if sup0 > 0.0:
        ratio = supT / sup0
    else:
        ratio = 1.0 if supT == 0.0 else math.inf

    fmts = _formats(cfg)
    files = []
    _emit_scalar(outdir, "pi1_initial", pi1, fmts, files)
    _emit_scalar(outdir, "pi1_final", final.pi1, fmts, files)
    rows = [("steps", steps), ("dt", dt), ("t_final", t_final),
            ("sup_grad_initial", sup0), ("sup_grad_final", supT),
            ("sup_grad_ratio", ratio)]

    if velocity == "solid_body":
        # exact answer: values ride clockwise circles, so backtrack by R(+t)
        c, s = math.cos(t_final), math.sin(t_final)
        if kind == "aligned":
            exact = vals  # phi depends on radius only
        else:
            exact = _pi1_xy(cfg, kind, c * X - s * Y, s * X + c * Y)
        err = float(np.abs(final.pi1.values - exact).max())
        _emit_scalar(outdir, "pi1_exact", ScalarField2D(grid, exact), fmts, files)
        rows.append(("exact_linf_error", err))
    else:
        h = max(grid.hx, grid.hy)
        outside = np.abs(pattern.xi.values) >= pattern.profile.r0 + 2.0 * h
        if outside.any():
            change = float(np.abs(final.pi1.values - pi1.values)[outside].max())
            rows.append(("exterior_change", change))

    out.write_table_csv(os.path.join(outdir, "transport.csv"),
                        ["name", "value"], rows)
    files.append("transport.csv")
    out.write_manifest(outdir, "transport", cfg.text, files)
    print(f"transport: wrote {len(files)} files to {outdir}")


def _analytic_center(t, X0, V0, g, params):
    """Closed-form center path for a constant bearing gradient g."""
    X0 = np.asarray(X0, float)
    V0 = np.asarray(V0, float)
    g = np.asarray(g, float)
    if params.l == 0.0:
        Ve = V0 - params.c0 * g * t
        Xe = X0 + V0 * t - 0.5 * params.c0 * g * t * t
        return Xe, Ve
    L = params.L
    Vst = (params.c0 / params.l) * (L @ g)
    dv = V0 - Vst
    c, s = math.cos(params.l * t), math.sin(params.l * t)
    rot = np.array([[c, s], [-s, c]])     # e^(-l L t)
    Ve = Vst + rot @ dv
    Xe = X0 + Vst * t + (L @ ((rot - np.eye(2)) @ dv)) / params.l
    return Xe, Ve


def cmd_trajectory(cfg: RunConfig, outdir):
    params = params_from(cfg)
    g = np.array([cfg.get_float("bearing", "gx", 0.0),
                  cfg.get_float("bearing", "gy", 0.0)])
    X0 = (cfg.get_float("bearing", "X0x", 0.0), cfg.get_float("bearing", "X0y", 0.0))
    V0 = (cfg.get_float("bearing", "V0x", 0.0), cfg.get_float("bearing", "V0y", 0.0))
    dt = cfg.get_float("bearing", "dt", _REQUIRED)
    T = cfg.get_float("bearing", "T", _REQUIRED)
    tr = integrate_center(X0, V0, lambda t: g, params, dt, T)

    rows = []
    err_final = 0.0
    for k in range(tr.t.size):
        Xe, Ve = _analytic_center(tr.t[k], X0, V0, g, params)
        verr = float(np.hypot(*(tr.V[k] - Ve)))
        xerr = float(np.hypot(*(tr.X[k] - Xe)))
        err_final = verr
        rows.append((tr.t[k], tr.X[k, 0], tr.X[k, 1], tr.V[k, 0], tr.V[k, 1],
                     Xe[0], Xe[1], Ve[0], Ve[1], xerr, verr))
    files = []
    out.write_table_csv(os.path.join(outdir, "trajectory.csv"),
                        ["t", "X1", "X2", "V1", "V2", "X1_exact", "X2_exact",
                         "V1_exact", "V2_exact", "X_error", "V_error"], rows)
    files.append("trajectory.csv")

    srows = [("dt", tr.dt), ("t_final", tr.t[-1]), ("scheme", tr.scheme),
             ("final_V_error", err_final)]
    if params.l != 0.0:
        Vst = (params.c0 / params.l) * (params.L @ g)
        srows += [("Vstar1", Vst[0]), ("Vstar2", Vst[1])]
    out.write_table_csv(os.path.join(outdir, "summary.csv"),
                        ["name", "value"], srows)
    files.append("summary.csv")
    out.write_manifest(outdir, "trajectory", cfg.text, files)
    print(f"trajectory: wrote {len(files)} files to {outdir}")


def cmd_evolve(cfg: RunConfig, outdir):
    grid = grid_from(cfg)
    params = params_from(cfg)
    pattern = pattern_from(cfg, grid)
    pi_amb = cfg.get_float("physics", "pi_ambient", _REQUIRED)
    field = reconstruct_pi0(pattern, params, pi_amb)

    bc = cfg.get_str("evolve", "bc", "periodic",
                     choices=("periodic", "extrapolation"))
    a = cfg.get_float("bearing", "a", 0.0)
    g = np.array([cfg.get_float("bearing", "gx", 0.0),
                  cfg.get_float("bearing", "gy", 0.0)])
    pi1_g = None if not g.any() else g
    V0 = np.array([cfg.get_float("bearing", "V0x", 0.0),
                   cfg.get_float("bearing", "V0y", 0.0)])
    state = init_full_state(field, a, pi1_g, V0, grid, bc)

    T = cfg.get_float("evolve", "T", _REQUIRED)
    if T <= 0.0:
        raise ConfigurationError(f"[evolve] T = {T} must be positive")
    kappa = cfg.get_float("evolve", "kappa", 0.05)
    margin = cfg.get_float("evolve", "cfl_margin", 0.7)
    dt = cfg.get_float("evolve", "dt", 0.0)
    if dt <= 0.0:
        dt = margin * admissible_dt(state)
    steps = max(1, int(math.ceil(T / dt - 1e-12)))
    dt = T / steps
    stride = cfg.get_int("evolve", "stride", 0)

    reference = ScalarField2D(grid, field.pi0.values - pi_amb)
    ledger = ConservationLedger()
    ledger.append(diagnostics(state))
    fmts = _formats(cfg)
    files = []
    _emit_scalar(outdir, "pi_initial", state.pi, fmts, files)

    corr_rows = []

    def sample(st):
        Xe, _ = _analytic_center(st.t, (0.0, 0.0), V0, g, params)
        score, best = pattern_correlation(st, reference, Xe)
        corr_rows.append((st.t, score, Xe[0], Xe[1], best[0], best[1]))

    sample(state)
    for k in range(steps):
        state = step_full(state, dt, kappa)
        at_sample = (stride > 0 and (k + 1) % stride == 0) or k == steps - 1
        if at_sample:
            ledger.append(diagnostics(state))
            sample(state)
            if stride > 0 and "vtk" in fmts and k < steps - 1:
                name = f"pi_{k + 1:06d}"
                out.write_vtk_scalar(os.path.join(outdir, f"{name}.vtk"),
                                     state.pi, "pi")
                files.append(f"{name}.vtk")

    _emit_scalar(outdir, "pi_final", state.pi, fmts, files)
    _emit_vector(outdir, "U_final", state.Uvel, fmts, files)
    out.write_table_csv(os.path.join(outdir, "ledger.csv"),
                        ["t", "mass", "mom1", "mom2", "energy"], ledger.rows())
    files.append("ledger.csv")
    out.write_table_csv(os.path.join(outdir, "correlation.csv"),
                        ["t", "score", "pred_shift1", "pred_shift2",
                         "best_shift1", "best_shift2"], corr_rows)
    files.append("correlation.csv")

    mass = ledger.series("mass")
    energy = ledger.series("energy")
    srows = [("steps", steps), ("dt", dt), ("kappa", kappa),
             ("t_final", state.t), ("corr_final", corr_rows[-1][1]),
             ("rel_mass_drift", float(abs(mass[-1] - mass[0]) / abs(mass[0]))),
             ("energy_initial", energy[0]), ("energy_final", energy[-1])]
    out.write_table_csv(os.path.join(outdir, "summary.csv"),
                        ["name", "value"], srows)
    files.append("summary.csv")
    out.write_manifest(outdir, "evolve", cfg.text, files)
    print(f"evolve: wrote {len(files)} files to {outdir}")


_COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "transport": cmd_transport,
    "trajectory": cmd_trajectory,
    "evolve": cmd_evolve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        outdir = _prepare(cfg, args)
        _COMMANDS[args.command](cfg, outdir)
    except FPatternError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
