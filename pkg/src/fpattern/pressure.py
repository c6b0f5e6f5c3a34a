"""Pressure-variable reconstruction around a steady pattern.

Works in the variable pi = P^((gamma-1)/gamma) of the barotropic law
P = C rho^gamma.  For a pattern with |grad Phi|^2 = G(Phi) and
lap Phi = R(Phi) per branch, the steady momentum balance integrates in
closed form to

    pi0 = pi_ambient + (2 R1(Phi) - |grad Phi|^2 - 2 l Phi) / (2 c0)

with R1 the antiderivative of R vanishing at Phi = 0 and
c0 = gamma/(gamma-1) * C^(1/gamma).  A line-integral variant that never
uses G or R is kept as an independent cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, NumericalError
from .fields import ScalarField2D, VectorField2D, gradient, perp_gradient
from .patterns import Pattern

_C0_TOL = 1e-14


@dataclass(frozen=True)
class PhysicalParams:
    """Barotropic exponent gamma in (1, 2), pressure constant C, rotation rate l."""

    gamma: float
    C: float
    l: float
    c0: float = dc_field(default=None)

    def __post_init__(self):
        if not 1.0 < self.gamma < 2.0:
            raise ConfigurationError(f"gamma = {self.gamma} must lie in (1, 2)")
        if self.C <= 0:
            raise ConfigurationError(f"C = {self.C} must be positive")
        if self.l <= 0:
            raise ConfigurationError(f"l = {self.l} must be positive")
        derived = self.gamma / (self.gamma - 1.0) * self.C ** (1.0 / self.gamma)
        if self.c0 is None:
            object.__setattr__(self, "c0", derived)
        elif abs(self.c0 - derived) > _C0_TOL * max(1.0, abs(derived)):
            raise ConfigurationError(
                f"stored c0 = {self.c0} disagrees with gamma, C "
                f"(recomputed {derived})")

    @property
    def L(self):
        """Quarter-turn rotation matrix; L @ L = -I."""
        return np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass
class LocalField:
    """Steady local state: pattern, reconstructed pi0 > 0, velocity u.

    Carries the physical parameters it was built with so downstream
    consumers (residual checks, the full solver) stay consistent.
    """

    pattern: Pattern
    pi0: ScalarField2D
    u: VectorField2D
    pi_ambient: float
    params: "PhysicalParams" = None


def antiderivative_r1(pattern: Pattern, phi) -> float:
    """Integral of the pattern's R map from 0 to phi by adaptive quadrature."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(pattern.r_of_phi, 0.0, float(phi),
                                    epsabs=1e-13, epsrel=1e-10, limit=200)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(
                f"R1 quadrature failed on [0, {phi}]: {exc}") from exc
    return val


def reconstruct_pi0(pattern: Pattern, params: PhysicalParams, pi_ambient,
                    grad_sq="analytic") -> LocalField:
    """Closed-form pi0 around a pattern, pinned to pi_ambient outside support.

    grad_sq selects the |grad Phi|^2 ingredient: "analytic" uses the
    branch-exact values (default), "fd" uses centered differences and is kept
    for cross-validation only.
    """
    pi_ambient = float(pi_ambient)
    if grad_sq == "analytic":
        gsq = pattern.grad_sq_nodes()
    elif grad_sq == "fd":
        u = perp_gradient(pattern.phi)
        gsq = u.x1.values ** 2 + u.x2.values ** 2
    else:
        raise ConfigurationError(f"grad_sq must be 'analytic' or 'fd', got {grad_sq!r}")
    values = pi_ambient + (2.0 * pattern.r1_nodes() - gsq
                           - 2.0 * params.l * pattern.phi.values) / (2.0 * params.c0)
    vmin = float(values.min())
    if vmin <= 0.0:
        j, i = np.unravel_index(np.argmin(values), values.shape)
        raise NumericalError(
            f"pi0 = {vmin:.6g} <= 0 at node (i, j) = ({i}, {j}); "
            f"raise pi_ambient above {pi_ambient - vmin:.6g}")
    return LocalField(pattern, ScalarField2D(pattern.grid, values),
                      perp_gradient(pattern.phi), pi_ambient, params)


def pi0_path_integral(phi: ScalarField2D, params: PhysicalParams, pi_ambient,
                      order="xy", excluded_mask=None):
    """Line-integral reconstruction of pi0 from the momentum balance.

    Integrates -(1/c0) [(u . grad) u + l L u] along axis-aligned staircase
    paths from the grid corner node (0, 0), where pi0 is pinned to
    pi_ambient.  Composite trapezoid along each leg; `order` picks the leg
    sequence ("xy" or "yx"), which is a discretization-level check of path
    independence.

    Returns (field, approximate) where `approximate` is True when an
    excluded-band mask is supplied and intersects the grid: the staircase
    paths sweep every row and column, so any band is crossed by some path
    and the result is only qualitative there.
    """
    grid = phi.grid
    u = perp_gradient(phi)
    u1, u2 = u.x1.values, u.x2.values
    g1 = gradient(u.x1)
    g2 = gradient(u.x2)
    adv1 = u1 * g1.x1.values + u2 * g1.x2.values
    adv2 = u1 * g2.x1.values + u2 * g2.x2.values
    w1 = -(adv1 - params.l * u2) / params.c0
    w2 = -(adv2 + params.l * u1) / params.c0

    def cumtrap(v, h, axis):
        v = np.moveaxis(v, axis, 0)
        mids = 0.5 * (v[1:] + v[:-1]) * h
        out = np.concatenate([np.zeros((1,) + v.shape[1:]), np.cumsum(mids, axis=0)])
        return np.moveaxis(out, 0, axis)

    if order == "xy":
        leg1 = cumtrap(w1[0:1, :], grid.hx, 1)          # along the bottom row
        leg2 = cumtrap(w2, grid.hy, 0)                  # up each column
        vals = float(pi_ambient) + leg1 + leg2
    elif order == "yx":
        leg1 = cumtrap(w2[:, 0:1], grid.hy, 0)          # up the left column
        leg2 = cumtrap(w1, grid.hx, 1)                  # along each row
        vals = float(pi_ambient) + leg1 + leg2
    else:
        raise ConfigurationError(f"path order must be 'xy' or 'yx', got {order!r}")
    approximate = bool(excluded_mask is not None and np.asarray(excluded_mask).any())
    return ScalarField2D(grid, vals), approximate


def rho_of_pi_values(values, params: PhysicalParams):
    """Density from pi on raw arrays: rho = C^(-1/gamma) pi^(1/(gamma-1))."""
    values = np.asarray(values, dtype=float)
    if (values < 0).any():
        j, i = np.unravel_index(int(np.argmin(values)), values.shape)
        raise NumericalError(f"negative pi = {values[j, i]:.6g} at node "
                             f"(i, j) = ({i}, {j}) has no density")
    return params.C ** (-1.0 / params.gamma) * values ** (1.0 / (params.gamma - 1.0))


def pi_of_rho_values(values, params: PhysicalParams):
    """Inverse of rho_of_pi_values."""
    values = np.asarray(values, dtype=float)
    if (values < 0).any():
        j, i = np.unravel_index(int(np.argmin(values)), values.shape)
        raise NumericalError(f"negative density = {values[j, i]:.6g} at node "
                             f"(i, j) = ({i}, {j}) has no pi")
    return (params.C ** (1.0 / params.gamma) * values) ** (params.gamma - 1.0)


def density_from_pi(pi: ScalarField2D, params: PhysicalParams) -> ScalarField2D:
    """Pointwise density field from a pi field."""
    return ScalarField2D(pi.grid, rho_of_pi_values(pi.values, params))
