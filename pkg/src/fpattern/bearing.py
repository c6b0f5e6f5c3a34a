"""Bearing-field transport, the discrepancy vector, and the center ODE.

The bearing field pi1 rides passively on the pattern velocity u = perp-grad
Phi, which is divergence free, so its gradient sup norm cannot grow in the
continuum.  Transport is semi-Lagrangian with clamped bilinear sampling:
every new value is a convex combination of old ones, which makes the
discrete maximum principle checkable instead of scheme-violated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError
from .fields import (ScalarField2D, VectorField2D, gradient, perp_gradient,
                     sample_bilinear)
from .pressure import PhysicalParams


def _vec2(v, name):
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (2,):
        raise ConfigurationError(f"{name} must be a 2-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} must be finite, got {arr}")
    return arr.copy()


@dataclass
class BearingState:
    """Bearing field plus the moving-frame center position and velocity."""

    pi1: ScalarField2D
    X: np.ndarray
    V: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.X = _vec2(self.X, "X")
        self.V = _vec2(self.V, "V")
        vmin = self.pi1.values.min()
        if not vmin > 0.0:
            j, i = np.unravel_index(int(self.pi1.values.argmin()),
                                    self.pi1.values.shape)
            raise NumericalError(
                f"pi1 must stay positive; min {vmin:.6g} at node "
                f"(i={i}, j={j}) = {self.pi1.grid.node(i, j)}")


@dataclass
class Trajectory:
    """Uniformly sampled center path X(t), V(t) with scheme metadata."""

    t: np.ndarray
    X: np.ndarray
    V: np.ndarray
    dt: float
    scheme: str = "rk4"

    def __post_init__(self):
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.V))):
            raise NumericalError("trajectory contains non-finite samples")


def advect_pi1(state: BearingState, phi: ScalarField2D, dt, steps) -> BearingState:
    """Advance pi1 by `steps` semi-Lagrangian steps of size dt along u = perp-grad phi.

    Feet are backtracked with a two-stage midpoint integrator through the
    bilinearly interpolated velocity; values are pulled from the previous
    field by clamped bilinear sampling, so feet that leave the box pick up
    the boundary-frame value (u vanishes there for localized patterns).
    """
    if state.pi1.grid != phi.grid:
        raise ConfigurationError("pi1 and phi live on different grids")
    dt = float(dt)
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    steps = int(steps)
    if steps < 0:
        raise ConfigurationError(f"steps must be non-negative, got {steps}")
    u = perp_gradient(phi)
    grid = phi.grid
    X, Y = grid.meshes()
    vals = state.pi1.values
    for k in range(steps):
        xm = X - 0.5 * dt * u.x1.values
        ym = Y - 0.5 * dt * u.x2.values
        um1 = sample_bilinear(u.x1, xm, ym)
        um2 = sample_bilinear(u.x2, xm, ym)
        fx = X - dt * um1
        fy = Y - dt * um2
        fld = ScalarField2D(grid, vals)
        vals = sample_bilinear(fld, fx, fy)
        if not np.all(np.isfinite(vals)):
            raise NumericalError(f"non-finite pi1 after transport step {k}")
    return BearingState(ScalarField2D(grid, vals), state.X, state.V,
                        state.t + steps * dt)


def sup_grad_norm(pi1: ScalarField2D):
    """Max Euclidean norm of the FD gradient over interior nodes."""
    g = gradient(pi1)
    mag = np.hypot(g.x1.values, g.x2.values)
    return float(mag[pi1.grid.interior_mask(rings=1)].max())


def discrepancy_Q(pi1: ScalarField2D, params: PhysicalParams) -> VectorField2D:
    """Q = -c0 (grad pi1(x) - grad pi1(0)): the forcing felt by the center.

    Vanishes identically when grad pi1 is spatially constant, which is what
    makes constant and linear bearing fields exactly separable.
    """
    grid = pi1.grid
    if not (grid.xmin <= 0.0 <= grid.xmax and grid.ymin <= 0.0 <= grid.ymax):
        raise ConfigurationError(
            "discrepancy needs the origin inside the grid box, got "
            f"[{grid.xmin}, {grid.xmax}] x [{grid.ymin}, {grid.ymax}]")
    g = gradient(pi1)
    g01 = sample_bilinear(g.x1, 0.0, 0.0)
    g02 = sample_bilinear(g.x2, 0.0, 0.0)
    q1 = -params.c0 * (g.x1.values - g01)
    q2 = -params.c0 * (g.x2.values - g02)
    return VectorField2D(ScalarField2D(grid, q1), ScalarField2D(grid, q2))


def integrate_center(X0, V0, grad_pi1_origin, params: PhysicalParams,
                     dt, T) -> Trajectory:
    """Integrate Xdot = V, Vdot = -l L V - c0 g(t) with classical RK4.

    grad_pi1_origin maps a time to the 2-vector g(t) = grad pi1(t, 0).
    Samples are stored at every step; the final time is round(T/dt) steps.
    """
    dt = float(dt)
    T = float(T)
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if T < dt:
        raise ConfigurationError(f"T = {T} must be at least one step dt = {dt}")
    X0 = _vec2(X0, "X0")
    V0 = _vec2(V0, "V0")
    n = int(round(T / dt))
    l, c0 = params.l, params.c0

    def acc(t, v):
        g = np.asarray(grad_pi1_origin(t), dtype=float).reshape(2)
        # -l L v with L = [[0,-1],[1,0]]
        return np.array([l * v[1], -l * v[0]]) - c0 * g

    ts = np.empty(n + 1)
    Xs = np.empty((n + 1, 2))
    Vs = np.empty((n + 1, 2))
    ts[0], Xs[0], Vs[0] = 0.0, X0, V0
    x, v = X0.copy(), V0.copy()
    for k in range(n):
        t = k * dt
        k1x, k1v = v, acc(t, v)
        k2x, k2v = v + 0.5 * dt * k1v, acc(t + 0.5 * dt, v + 0.5 * dt * k1v)
        k3x, k3v = v + 0.5 * dt * k2v, acc(t + 0.5 * dt, v + 0.5 * dt * k2v)
        k4x, k4v = v + dt * k3v, acc(t + dt, v + dt * k3v)
        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise NumericalError(f"non-finite center state at t = {(k + 1) * dt:.6g}")
        ts[k + 1] = (k + 1) * dt
        Xs[k + 1] = x
        Vs[k + 1] = v
    return Trajectory(ts, Xs, Vs, dt)
