"""Steady stream-function patterns built from a radial-type profile.

A pattern is a stream function Phi = lam(xi^2) where xi is a level-set
coordinate with piecewise-constant |grad xi| and lam is a compactly
supported C^2 profile on [0, r0^2].  The induced velocity
u = (Phi_x2, -Phi_x1) is divergence free, and both |grad Phi|^2 and
lap Phi are functions of Phi alone on each branch of xi, which is what
makes the pressure reconstruction in `pressure` exact.

Everything analytic is expressed through s = xi^2 and the profile
derivatives lam'(s), lam''(s); the chain rule gives, per branch with
|grad xi|^2 = m (m = 1 radial/shear, m = 4 on the sector wedge where
xi = 2*x1):

    |grad Phi|^2 = m * 4 s lam'(s)^2
    lap Phi      = m * (2 lam' + 4 s lam'') + (lam' * 2) * (xi * lap xi)

with xi * lap xi = 1 on the radial branch and 0 on straight branches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigurationError
from .fields import Grid2D, ScalarField2D

_ENDPOINT_TOL = 1e-12
_INVERT_ITERS = 64


@dataclass(frozen=True)
class ProfileSpec:
    """Profile lam(s) on s in [0, r0^2] with its first two derivatives.

    lam, dlam, d2lam must accept numpy arrays.  Outside [0, r0^2] all three
    evaluate to zero; amplitude is the center value lam(0).
    """

    r0: float
    amplitude: float
    lam: Callable
    dlam: Callable
    d2lam: Callable


def check_profile(spec: ProfileSpec):
    """Validate endpoint conditions and monotonicity of a profile."""
    if spec.r0 <= 0:
        raise ConfigurationError(f"profile r0 = {spec.r0} must be positive")
    if spec.amplitude == 0:
        raise ConfigurationError("profile amplitude must be nonzero")
    s_end = spec.r0 ** 2
    scale = abs(spec.amplitude)
    checks = {
        "lam(0) - amplitude": float(spec.lam(0.0)) - spec.amplitude,
        "lam(r0^2)": float(spec.lam(s_end)),
        "lam'(0)": float(spec.dlam(0.0)),
        "lam'(r0^2)": float(spec.dlam(s_end)),
        "lam''(0)": float(spec.d2lam(0.0)),
        "lam''(r0^2)": float(spec.d2lam(s_end)),
    }
    for name, val in checks.items():
        if abs(val) > _ENDPOINT_TOL * max(1.0, scale):
            raise ConfigurationError(f"profile endpoint condition {name} = {val:.3e} "
                                     f"violates tolerance {_ENDPOINT_TOL}")
    samples = spec.lam(np.linspace(0.0, s_end, 513))
    steps = np.diff(samples)
    sgn = -np.sign(spec.amplitude)  # lam runs from amplitude down/up to 0
    if np.any(sgn * steps < -_ENDPOINT_TOL * max(1.0, scale)):
        raise ConfigurationError("profile lam is not monotone on [0, r0^2]")
    return spec


def quintic_bump(r0, amplitude) -> ProfileSpec:
    """Compactly supported quintic-smoothstep profile.

    lam(s) = amplitude * p(1 - s/r0^2) with p(t) = 6 t^5 - 15 t^4 + 10 t^3,
    so lam and its first two derivatives vanish at s = r0^2 and lam(0) equals
    amplitude with a flat top.  This is the canonical C^2 vortex profile.
    """
    r0 = float(r0)
    amplitude = float(amplitude)
    if r0 <= 0:
        raise ConfigurationError(f"quintic_bump: r0 = {r0} must be positive")
    if amplitude == 0:
        raise ConfigurationError("quintic_bump: amplitude must be nonzero")
    s_end = r0 * r0

    def _t(s):
        return np.clip(1.0 - np.asarray(s, dtype=float) / s_end, 0.0, 1.0)

    def lam(s):
        t = _t(s)
        return amplitude * t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)

    def dlam(s):
        t = _t(s)
        return (-amplitude / s_end) * 30.0 * t * t * (t - 1.0) ** 2

    def d2lam(s):
        t = _t(s)
        return (amplitude / s_end ** 2) * 60.0 * t * (2.0 * t - 1.0) * (t - 1.0)

    return check_profile(ProfileSpec(r0, amplitude, lam, dlam, d2lam))


def _zero_profile() -> ProfileSpec:
    zero = lambda s: np.zeros_like(np.asarray(s, dtype=float))
    return ProfileSpec(1.0, 0.0, zero, zero, zero)


class _CumulativeGauss:
    """Antiderivative s -> integral_a^s f, by per-cell Gauss-Legendre.

    Cell count 2048 and order 8 make this exact for polynomial integrands of
    the quintic profile and comfortably below 1e-12 for smooth ones.
    """

    def __init__(self, fn, a, b, cells=2048, order=8):
        self.fn = fn
        self.edges = np.linspace(a, b, cells + 1)
        self.gl_x, self.gl_w = leggauss(order)
        lo, hi = self.edges[:-1], self.edges[1:]
        half = 0.5 * (hi - lo)
        pts = 0.5 * (hi + lo)[:, None] + half[:, None] * self.gl_x[None, :]
        self.prefix = np.concatenate(([0.0], np.cumsum(half * (fn(pts) @ self.gl_w))))

    def __call__(self, s):
        s = np.clip(np.asarray(s, dtype=float), self.edges[0], self.edges[-1])
        shape = s.shape
        s = s.ravel()
        idx = np.clip(np.searchsorted(self.edges, s, side="right") - 1,
                      0, len(self.edges) - 2)
        lo = self.edges[idx]
        half = 0.5 * (s - lo)
        pts = 0.5 * (s + lo)[:, None] + half[:, None] * self.gl_x[None, :]
        out = self.prefix[idx] + half * (self.fn(pts) @ self.gl_w)
        return out.reshape(shape)


@dataclass
class Pattern:
    """A constructed stream-function pattern on a grid.

    kind is one of "axisymmetric", "shear", "sector", "zero".  sector_mask is
    True on the wedge branch (xi = 2*x1) of sector patterns, None otherwise.
    shear_axis is 0 or 1 for shear patterns (coordinate the profile varies in).
    """

    kind: str
    grid: Grid2D
    phi: ScalarField2D
    xi: ScalarField2D
    profile: ProfileSpec
    sector_mask: Optional[np.ndarray] = None
    shear_axis: Optional[int] = None

    def s_nodes(self):
        return self.xi.values ** 2

    def _branch_m(self):
        """|grad xi|^2 per node (4 on the sector wedge, else 1)."""
        if self.sector_mask is None:
            return 1.0
        return np.where(self.sector_mask, 4.0, 1.0)

    def _curved(self):
        """xi * lap(xi) per node: 1 on radial branches, 0 on straight ones."""
        if self.kind in ("shear", "zero"):
            return 0.0
        if self.sector_mask is None:
            return 1.0
        return np.where(self.sector_mask, 0.0, 1.0)

    def grad_sq_nodes(self):
        """Analytic |grad Phi|^2 at the nodes."""
        s = self.s_nodes()
        return self._branch_m() * 4.0 * s * self.profile.dlam(s) ** 2

    def lap_nodes(self):
        """Analytic lap(Phi) at the nodes."""
        s = self.s_nodes()
        dl, d2l = self.profile.dlam(s), self.profile.d2lam(s)
        return self._branch_m() * (2.0 * dl + 4.0 * s * d2l) + self._curved() * 2.0 * dl

    def r1_nodes(self):
        """Branch-aware antiderivative of lap(Phi) in Phi, vanishing at Phi=0.

        On straight branches (shear, sector wedge) the antiderivative reduces
        to |grad Phi|^2 / 2 exactly; on radial branches it is the cumulative
        integral of lap(Phi) dPhi pulled back to s.
        """
        s = self.s_nodes()
        straight = 2.0 * self._branch_m() * s * self.profile.dlam(s) ** 2
        if self.kind in ("shear", "zero"):
            return straight
        radial = self._radial_r1()(s) - self._radial_r1()(self.profile.r0 ** 2)
        if self.sector_mask is None:
            return radial
        return np.where(self.sector_mask, straight, radial)

    def _radial_r1(self):
        if not hasattr(self, "_radial_r1_cache"):
            dl, d2l = self.profile.dlam, self.profile.d2lam
            fn = lambda s: (4.0 * dl(s) + 4.0 * s * d2l(s)) * dl(s)
            self._radial_r1_cache = _CumulativeGauss(fn, 0.0, self.profile.r0 ** 2)
        return self._radial_r1_cache

    # -- scalar maps of the profile branch (phi -> value) ------------------

    def s_of_phi(self, phi):
        """Invert lam on [0, r0^2]; phi values outside [0, amplitude] clamp."""
        return _invert_lam(self.profile, phi)

    def g_of_phi(self, phi):
        """|grad Phi|^2 as a function of Phi on the profile branch."""
        s = self.s_of_phi(phi)
        return 4.0 * s * self.profile.dlam(s) ** 2

    def dg_of_phi(self, phi):
        s = self.s_of_phi(phi)
        return 4.0 * self.profile.dlam(s) + 8.0 * s * self.profile.d2lam(s)

    def r_of_phi(self, phi):
        """lap(Phi) as a function of Phi on the default (non-wedge) branch."""
        s = self.s_of_phi(phi)
        dl, d2l = self.profile.dlam(s), self.profile.d2lam(s)
        if self.kind == "shear":
            return 2.0 * dl + 4.0 * s * d2l
        return 4.0 * dl + 4.0 * s * d2l

    def dg_nodes(self):
        """d(|grad Phi|^2)/dPhi along the local branch, at the nodes."""
        s = self.s_nodes()
        base = 4.0 * self.profile.dlam(s) + 8.0 * s * self.profile.d2lam(s)
        return self._branch_m() * base

    # -- geometry helpers ---------------------------------------------------

    def support_mask(self):
        """True where Phi is nonzero (open support of the profile)."""
        if self.profile.amplitude == 0.0:
            return np.zeros((self.grid.ny, self.grid.nx), dtype=bool)
        return self.s_nodes() < self.profile.r0 ** 2

    def second_derivative_bound(self):
        """Max |directional second derivative| of Phi over all branches."""
        if self.kind == "zero":
            return 0.0
        s = np.linspace(0.0, self.profile.r0 ** 2, 4097)
        dl, d2l = self.profile.dlam(s), self.profile.d2lam(s)
        bound = np.max(np.abs(2.0 * dl + 4.0 * s * d2l))
        if self.kind in ("axisymmetric", "sector"):
            bound = max(bound, np.max(np.abs(2.0 * dl)))
        if self.kind == "sector":
            bound = max(bound, np.max(np.abs(8.0 * dl + 16.0 * s * d2l)))
        return float(bound)


def _invert_lam(profile: ProfileSpec, phi):
    """Monotone bisection solve of lam(s) = phi on [0, r0^2]."""
    phi = np.asarray(phi, dtype=float)
    if profile.amplitude == 0:
        return np.full_like(phi, profile.r0 ** 2)
    lo_v, hi_v = min(0.0, profile.amplitude), max(0.0, profile.amplitude)
    target = np.clip(phi, lo_v, hi_v)
    sgn = np.sign(profile.amplitude)
    lo = np.zeros_like(target)
    hi = np.full_like(target, profile.r0 ** 2)
    for _ in range(_INVERT_ITERS):
        mid = 0.5 * (lo + hi)
        go_right = sgn * profile.lam(mid) > sgn * target
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


# -- builders ---------------------------------------------------------------


def _require_box(grid: Grid2D, xlo, xhi, ylo, yhi, what):
    if not (grid.xmin < xlo and grid.xmax > xhi and grid.ymin < ylo and grid.ymax > yhi):
        raise ConfigurationError(
            f"{what} must lie strictly inside the grid box "
            f"[{grid.xmin}, {grid.xmax}] x [{grid.ymin}, {grid.ymax}]")


def build_axisymmetric(profile: ProfileSpec, grid: Grid2D) -> Pattern:
    """Vortex pattern Phi = lam(r^2) supported on the disc r < r0."""
    check_profile(profile)
    r0 = profile.r0
    _require_box(grid, -r0, r0, -r0, r0, f"support disc of radius {r0}")
    X, Y = grid.meshes()
    xi = np.hypot(X, Y)
    phi = profile.lam(xi * xi)
    return Pattern("axisymmetric", grid,
                   ScalarField2D(grid, phi), ScalarField2D(grid, xi), profile)


def build_shear(profile: ProfileSpec, axis: int, grid: Grid2D) -> Pattern:
    """Unidirectional shear pattern Phi = lam(x_axis^2).

    The induced velocity is perpendicular to the chosen axis and depends on
    that coordinate only; it vanishes (with its derivative) at |x_axis| = r0.
    """
    check_profile(profile)
    if axis not in (0, 1):
        raise ConfigurationError(f"shear axis must be 0 or 1, got {axis}")
    r0 = profile.r0
    lo, hi = (grid.xmin, grid.xmax) if axis == 0 else (grid.ymin, grid.ymax)
    if not (lo < -r0 and hi > r0):
        raise ConfigurationError(
            f"shear support interval [-{r0}, {r0}] must lie strictly inside "
            f"[{lo}, {hi}] along axis {axis}")
    X, Y = grid.meshes()
    xi = X if axis == 0 else Y
    phi = profile.lam(xi * xi)
    return Pattern("shear", grid, ScalarField2D(grid, phi), ScalarField2D(grid, xi),
                   profile, shear_axis=axis)


def build_sector_vortex(profile: ProfileSpec, grid: Grid2D) -> Pattern:
    """Cyclone on the unit disc cut by the vertical line x1 = 1/2.

    The level-set coordinate has two branches meeting continuously on the
    rays x2 = +-sqrt(3) x1 (x1 >= 0): xi = 2 x1 on the wedge between the
    rays and xi = r outside it.  Velocity and pressure are discontinuous
    across the rays, which models front-like lines inside the vortex.
    Nodes falling exactly on a ray are assigned to the wedge branch.
    """
    check_profile(profile)
    if abs(profile.r0 - 1.0) > 1e-12:
        raise ConfigurationError(
            f"sector vortex requires a unit-radius profile, got r0 = {profile.r0}")
    _require_box(grid, -1.0, 0.5, -1.0, 1.0, "cut unit disc")
    sector_width = np.sqrt(3.0) / 2.0  # opening of the wedge at x1 = 1/4
    across = int(np.floor(sector_width / grid.hy)) + 1
    if across < 8:
        raise ConfigurationError(
            f"grid too coarse for the sector: {across} nodes across the wedge "
            "at x1 = 1/4, need at least 8")
    X, Y = grid.meshes()
    mask = np.abs(Y) <= np.sqrt(3.0) * X
    xi = np.where(mask, 2.0 * X, np.hypot(X, Y))
    phi = profile.lam(xi * xi)
    return Pattern("sector", grid, ScalarField2D(grid, phi), ScalarField2D(grid, xi),
                   profile, sector_mask=mask)


def build_zero(grid: Grid2D) -> Pattern:
    """Pattern with Phi identically zero (quiescent background)."""
    z = np.zeros((grid.ny, grid.nx))
    return Pattern("zero", grid, ScalarField2D(grid, z.copy()),
                   ScalarField2D(grid, z.copy()), _zero_profile())


def eikonal_lift(xi: ScalarField2D, f, df):
    """Lift a unit-slope level-set field through a monotone profile.

    Given xi with |grad xi| = 1 and a monotone f with derivative df, returns
    the field Phi = f(xi) together with the slope-squared map
    G(phi) = df(f^-1(phi))^2, so that |grad Phi|^2 = G(Phi).

    Monotonicity is checked by the sign of df on the sampled range of xi;
    a sign change raises a configuration error.
    """
    lo = float(np.min(xi.values))
    hi = float(np.max(xi.values))
    samples = np.linspace(lo, hi, 1025)
    slopes = np.asarray(df(samples), dtype=float)
    if (slopes > 0).any() and (slopes < 0).any():
        raise ConfigurationError("eikonal_lift: f is not monotone on "
                                 f"[{lo:.6g}, {hi:.6g}] (derivative changes sign)")
    phi = ScalarField2D(xi.grid, np.asarray(f(xi.values), dtype=float))
    increasing = float(f(hi)) >= float(f(lo))

    def g_of_phi(p):
        p = np.asarray(p, dtype=float)
        flo, fhi = sorted((float(f(lo)), float(f(hi))))
        target = np.clip(p, flo, fhi)
        a = np.full_like(target, lo)
        b = np.full_like(target, hi)
        for _ in range(_INVERT_ITERS):
            mid = 0.5 * (a + b)
            fm = np.asarray(f(mid), dtype=float)
            go_right = fm < target if increasing else fm > target
            a = np.where(go_right, mid, a)
            b = np.where(go_right, b, mid)
        return np.asarray(df(0.5 * (a + b)), dtype=float) ** 2

    return phi, g_of_phi
