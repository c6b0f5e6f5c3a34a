"""Uniform Cartesian grids and second-order finite-difference kernels.

Fields are stored as (ny, nx) float arrays in C order, so the flat view is
row-major with the x index running fastest.  Node (i, j) sits at
(xmin + i*hx, ymin + j*hy), evaluated exactly in that form so coordinates
are bit-reproducible across runs.

Derivatives use centered stencils at interior nodes and one-sided
second-order stencils on the boundary rows/columns.  The boundary values
exist so downstream code never sees NaNs, but residual norms are expected
to mask them out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError


@dataclass(frozen=True)
class Grid2D:
    """Uniform tensor grid on [xmin, xmax] x [ymin, ymax]."""

    nx: int
    ny: int
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if self.nx < 4:
            raise ConfigurationError(f"nx = {self.nx} but at least 4 nodes are "
                                     "needed for the boundary stencils")
        if self.ny < 4:
            raise ConfigurationError(f"ny = {self.ny} but at least 4 nodes are "
                                     "needed for the boundary stencils")
        if not self.xmax > self.xmin:
            raise ConfigurationError(f"xmax = {self.xmax} must exceed xmin = {self.xmin}")
        if not self.ymax > self.ymin:
            raise ConfigurationError(f"ymax = {self.ymax} must exceed ymin = {self.ymin}")

    @property
    def hx(self):
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def hy(self):
        return (self.ymax - self.ymin) / (self.ny - 1)

    @property
    def x(self):
        return self.xmin + np.arange(self.nx) * self.hx

    @property
    def y(self):
        return self.ymin + np.arange(self.ny) * self.hy

    def meshes(self):
        """Coordinate arrays X, Y of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def node(self, i, j):
        return (self.xmin + i * self.hx, self.ymin + j * self.hy)

    def interior_mask(self, rings=1):
        """Boolean (ny, nx) mask, False on the outermost `rings` node layers."""
        m = np.zeros((self.ny, self.nx), dtype=bool)
        m[rings:-rings, rings:-rings] = True
        return m


def make_grid(nx, ny, bounds):
    """Build a Grid2D from node counts and (xmin, xmax, ymin, ymax)."""
    xmin, xmax, ymin, ymax = bounds
    return Grid2D(int(nx), int(ny), float(xmin), float(xmax), float(ymin), float(ymax))


@dataclass
class ScalarField2D:
    """Nodal scalar samples on a Grid2D."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise ConfigurationError(
                f"field shape {self.values.shape} does not match grid "
                f"(ny, nx) = ({self.grid.ny}, {self.grid.nx})")
        if not np.all(np.isfinite(self.values)):
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise NumericalError(f"non-finite field value at node "
                                 f"(i, j) = ({bad[1]}, {bad[0]})")

    @classmethod
    def from_function(cls, grid, fn):
        X, Y = grid.meshes()
        return cls(grid, fn(X, Y))

    def copy(self):
        return ScalarField2D(self.grid, self.values.copy())


@dataclass
class VectorField2D:
    """Pair of scalar components (along x1 and x2) on a shared grid."""

    x1: ScalarField2D
    x2: ScalarField2D

    def __post_init__(self):
        if self.x1.grid != self.x2.grid:
            raise ConfigurationError("vector components live on different grids")

    @property
    def grid(self):
        return self.x1.grid

    def magnitude(self):
        return ScalarField2D(self.grid, np.hypot(self.x1.values, self.x2.values))


def _ddx(v, h):
    """d/dx along axis 1: centered inside, one-sided second order on the edges."""
    out = np.empty_like(v)
    out[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2.0 * h)
    out[:, 0] = (-3.0 * v[:, 0] + 4.0 * v[:, 1] - v[:, 2]) / (2.0 * h)
    out[:, -1] = (3.0 * v[:, -1] - 4.0 * v[:, -2] + v[:, -3]) / (2.0 * h)
    return out


def _ddy(v, h):
    out = np.empty_like(v)
    out[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2.0 * h)
    out[0, :] = (-3.0 * v[0, :] + 4.0 * v[1, :] - v[2, :]) / (2.0 * h)
    out[-1, :] = (3.0 * v[-1, :] - 4.0 * v[-2, :] + v[-3, :]) / (2.0 * h)
    return out


def _d2(v, h, axis):
    """Second derivative along one axis; 4-point one-sided rows at the edges."""
    v = np.moveaxis(v, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h)
    out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (h * h)
    return np.moveaxis(out, 0, axis)


def gradient(f: ScalarField2D) -> VectorField2D:
    """(d/dx1, d/dx2) of a scalar field."""
    g = f.grid
    return VectorField2D(
        ScalarField2D(g, _ddx(f.values, g.hx)),
        ScalarField2D(g, _ddy(f.values, g.hy)),
    )


def perp_gradient(f: ScalarField2D) -> VectorField2D:
    """Divergence-free rotation of the gradient: (d f/dx2, -d f/dx1)."""
    g = f.grid
    return VectorField2D(
        ScalarField2D(g, _ddy(f.values, g.hy)),
        ScalarField2D(g, -_ddx(f.values, g.hx)),
    )


def laplacian(f: ScalarField2D) -> ScalarField2D:
    """Five-point Laplacian; boundary rows use one-sided second derivatives."""
    g = f.grid
    return ScalarField2D(g, _d2(f.values, g.hx, 1) + _d2(f.values, g.hy, 0))


def divergence(v: VectorField2D) -> ScalarField2D:
    g = v.grid
    return ScalarField2D(g, _ddx(v.x1.values, g.hx) + _ddy(v.x2.values, g.hy))


def jacobian(a: ScalarField2D, b: ScalarField2D) -> ScalarField2D:
    """Poisson bracket J(a, b) = a_x1 b_x2 - a_x2 b_x1."""
    if a.grid != b.grid:
        raise ConfigurationError("jacobian arguments live on different grids")
    g = a.grid
    ax, ay = _ddx(a.values, g.hx), _ddy(a.values, g.hy)
    bx, by = _ddx(b.values, g.hx), _ddy(b.values, g.hy)
    return ScalarField2D(g, ax * by - ay * bx)


def sample_bilinear(f: ScalarField2D, xq, yq):
    """Bilinear interpolation of nodal values at query points.

    Query coordinates are clamped to the grid box, so the result is always a
    convex combination of the four surrounding nodal values (range preserving).
    """
    g = f.grid
    xq = np.asarray(xq, dtype=float)
    yq = np.asarray(yq, dtype=float)
    sx = np.clip((xq - g.xmin) / g.hx, 0.0, g.nx - 1.0)
    sy = np.clip((yq - g.ymin) / g.hy, 0.0, g.ny - 1.0)
    i0 = np.clip(sx.astype(int), 0, g.nx - 2)
    j0 = np.clip(sy.astype(int), 0, g.ny - 2)
    fx = sx - i0
    fy = sy - j0
    v = f.values
    return ((1.0 - fx) * (1.0 - fy) * v[j0, i0]
            + fx * (1.0 - fy) * v[j0, i0 + 1]
            + (1.0 - fx) * fy * v[j0 + 1, i0]
            + fx * fy * v[j0 + 1, i0 + 1])
