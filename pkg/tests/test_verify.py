import numpy as np
import pytest

from fpattern import (ConfigurationError, PhysicalParams, ScalarField2D,
                      build_axisymmetric, build_sector_vortex, check_stability_class,
                      dubreil_jacotin_residual, exclusion_mask, make_grid,
                      quintic_bump, reconstruct_pi0, refinement_orders,
                      residual_report)

BOX = (-1.2, 1.2, -1.2, 1.2)
PAR = PhysicalParams(gamma=1.4, C=1.0, l=1.0)
NAMES = ("eikonal", "poisson", "jacobian_master", "jacobian_vorticity",
         "momentum", "orthogonality", "dubreil_jacotin")


def _report(n, kind="axisymmetric", inner="fd"):
    grid = make_grid(n, n, BOX)
    build = build_sector_vortex if kind == "sector" else build_axisymmetric
    pat = build(quintic_bump(1.0, 1.0), grid)
    return residual_report(reconstruct_pi0(pat, PAR, 2.0), PAR, inner=inner)


def test_report_covers_all_identities_and_is_deterministic():
    rep = _report(65)
    assert tuple(rep.entries) == NAMES
    for linf, l2 in rep.entries.values():
        assert linf >= l2 * 0.0 and np.isfinite(linf) and np.isfinite(l2)
    rep2 = _report(65)
    for name in NAMES:
        assert rep.entries[name] == rep2.entries[name]
    rows = rep.rows()
    assert len(rows) == 7 and rows[0][0] == "eikonal"


def test_residuals_converge_at_second_order():
    coarse, fine = _report(65), _report(129)
    orders = refinement_orders(coarse, fine)
    for name, (o_linf, o_l2) in orders.items():
        assert o_linf > 1.8, name
        assert o_l2 > 1.8, name


def test_sector_report_converges_too():
    orders = refinement_orders(_report(65, "sector"), _report(129, "sector"))
    for name, (o_linf, _) in orders.items():
        assert o_linf > 1.5, name


def test_analytic_inner_flag_and_validation():
    rep = _report(65, inner="analytic")
    assert "analytic_inner" in rep.flags
    grid = make_grid(65, 65, BOX)
    pat = build_axisymmetric(quintic_bump(1.0, 1.0), grid)
    with pytest.raises(ConfigurationError):
        residual_report(reconstruct_pi0(pat, PAR, 2.0), PAR, inner="spectral")


def test_exclusion_geometry():
    grid = make_grid(65, 65, BOX)
    pat = build_axisymmetric(quintic_bump(1.0, 1.0), grid)
    mask = exclusion_mask(pat)
    assert mask[0, :].all() and mask[:, -1].all()
    xi = np.abs(pat.xi.values)
    # rim band has the fixed-fraction floor
    assert mask[(xi > 0.86) & (xi < 1.14)].all()
    assert not mask[xi < 0.8].any()
    sec = build_sector_vortex(quintic_bump(1.0, 1.0), grid)
    smask = exclusion_mask(sec)
    X, Y = grid.meshes()
    on_ray = np.abs(np.hypot(X, Y) - 0.5) < 1e-9
    j, i = 32, 32  # origin
    assert smask[j, i]
    # a node sitting on the upper ray inside the disc is excluded
    t = 0.3
    d = np.hypot(X - t * 0.5, Y - t * np.sqrt(3.0) / 2.0)
    assert smask[np.unravel_index(np.argmin(d), d.shape)]


def test_dubreil_jacotin_residual_shrinks_under_refinement():
    errs = []
    for n in (65, 129):
        grid = make_grid(n, n, BOX)
        pat = build_axisymmetric(quintic_bump(1.0, 1.0), grid)
        fld = reconstruct_pi0(pat, PAR, 2.0)
        res = dubreil_jacotin_residual(fld, PAR).values
        keep = ~exclusion_mask(pat)
        errs.append(np.abs(res[keep]).max())
    assert errs[1] < errs[0] / 3.0


def test_refinement_orders_handles_exact_zeros():
    a = _report(65)
    b = _report(129)
    b.entries["eikonal"] = (0.0, 0.0)
    orders = refinement_orders(a, b)
    assert orders["eikonal"] == (np.inf, np.inf)


def test_stability_smooth_pattern_passes_analytic_bound():
    grid = make_grid(65, 65, BOX)
    pat = build_axisymmetric(quintic_bump(1.0, 1.0), grid)
    res = check_stability_class(pat.phi, pat.second_derivative_bound())
    assert res.passed and res.witness is None
    assert res.worst >= -res.c_bound


def test_stability_cone_fails_with_witness_at_the_apex():
    grid = make_grid(33, 33, (-1.0, 1.0, -1.0, 1.0))
    phi = ScalarField2D.from_function(grid, lambda x, y: -np.hypot(x, y))
    res = check_stability_class(phi, 5.0)
    assert not res.passed
    (i, j), offset = res.witness
    x, y = grid.node(i, j)
    assert np.hypot(x, y) < 2.5 * grid.hx  # apex neighborhood
    assert offset in ("x", "y", "diag", "anti")
    # the upward cone has nonnegative one-sided curvature everywhere
    up = ScalarField2D.from_function(grid, lambda x, y: np.hypot(x, y))
    assert check_stability_class(up, 0.0).passed


def test_stability_rejects_negative_bound():
    grid = make_grid(33, 33, (-1.0, 1.0, -1.0, 1.0))
    phi = ScalarField2D.from_function(grid, lambda x, y: x * y)
    with pytest.raises(ConfigurationError):
        check_stability_class(phi, -1.0)
