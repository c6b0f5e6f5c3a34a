"""Full nonlinear integration of the rotating pi-U system.

The point of this module is empirical: a constructed pattern embedded in
the fixed-frame compressible equations should just sit there (constant
bearing field) or drift along the predicted center path (linear bearing
field).  The velocity and pi are stepped in primitive form with a
two-stage predictor-corrector; only the mass update is kept in flux form,
so total mass telescopes to round-off under periodic boundaries.

Periodic grids use the duplicated-endpoint convention: the last row and
column repeat the first, updates run on the (ny-1) x (nx-1) core, and the
trapezoid rule then coincides with the torus sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigurationError, NumericalError
from .fields import Grid2D, ScalarField2D, VectorField2D, sample_bilinear
from .pressure import LocalField, PhysicalParams, rho_of_pi_values, pi_of_rho_values

_BCS = ("periodic", "extrapolation")


@dataclass
class FullState:
    """Fixed-frame state pi > 0, absolute velocity U, at time t."""

    pi: ScalarField2D
    Uvel: VectorField2D
    t: float
    bc: str
    params: PhysicalParams

    def __post_init__(self):
        if self.bc not in _BCS:
            raise ConfigurationError(f"bc must be one of {_BCS}, got {self.bc!r}")
        if self.pi.grid != self.Uvel.grid:
            raise ConfigurationError("pi and U live on different grids")
        vmin = float(self.pi.values.min())
        if not vmin > 0.0:
            j, i = np.unravel_index(int(self.pi.values.argmin()), self.pi.values.shape)
            raise NumericalError(f"pi must stay positive; min {vmin:.6g} at "
                                 f"node (i={i}, j={j}) = {self.pi.grid.node(i, j)}")


@dataclass
class LedgerEntry:
    t: float
    mass: float
    mom1: float
    mom2: float
    energy: float


@dataclass
class ConservationLedger:
    """Time series of the integral invariants."""

    entries: list = dc_field(default_factory=list)

    def append(self, entry: LedgerEntry):
        self.entries.append(entry)

    def series(self, name):
        return np.array([getattr(e, name) for e in self.entries])

    def rows(self):
        return [(e.t, e.mass, e.mom1, e.mom2, e.energy) for e in self.entries]


def init_full_state(field: LocalField, pi1_a, pi1_g, V0, grid: Grid2D,
                    bc="periodic") -> FullState:
    """Compose pi = pi0 + pi1 and U = u + V0 into an evolvable state.

    pi1 is constant when pi1_g is None, otherwise the linear field
    a + g . x, which is incompatible with periodic wrapping.
    """
    if grid is not None and grid != field.pattern.grid:
        raise ConfigurationError("full state grid must match the local field grid")
    grid = field.pattern.grid
    if bc not in _BCS:
        raise ConfigurationError(f"bc must be one of {_BCS}, got {bc!r}")
    V0 = np.asarray(V0, dtype=float).reshape(2)
    pi1 = float(pi1_a) * np.ones((grid.ny, grid.nx))
    if pi1_g is not None:
        g = np.asarray(pi1_g, dtype=float).reshape(2)
        if np.any(g != 0.0):
            if bc == "periodic":
                raise ConfigurationError(
                    "linear pi1 is incompatible with periodic boundaries; "
                    "use bc = extrapolation")
            X, Y = grid.meshes()
            pi1 += g[0] * X + g[1] * Y
    pi = field.pi0.values + pi1
    if not float(pi.min()) > 0.0:
        j, i = np.unravel_index(int(pi.argmin()), pi.shape)
        raise NumericalError(f"pi0 + pi1 = {pi.min():.6g} <= 0 at node "
                             f"(i={i}, j={j}) = {grid.node(i, j)}")
    u1 = field.u.x1.values + V0[0]
    u2 = field.u.x2.values + V0[1]
    return FullState(ScalarField2D(grid, pi),
                     VectorField2D(ScalarField2D(grid, u1), ScalarField2D(grid, u2)),
                     0.0, bc, field.params)


def _pad2(w, bc):
    """Two ghost layers: wrap for periodic cores, linear extrapolation otherwise."""
    if bc == "periodic":
        return np.pad(w, 2, mode="wrap")
    m, n = w.shape
    p = np.empty((m + 4, n + 4))
    p[2:-2, 2:-2] = w
    p[2:-2, 1] = 2.0 * w[:, 0] - w[:, 1]
    p[2:-2, 0] = 3.0 * w[:, 0] - 2.0 * w[:, 1]
    p[2:-2, -2] = 2.0 * w[:, -1] - w[:, -2]
    p[2:-2, -1] = 3.0 * w[:, -1] - 2.0 * w[:, -2]
    p[1, :] = 2.0 * p[2, :] - p[3, :]
    p[0, :] = 3.0 * p[2, :] - 2.0 * p[3, :]
    p[-2, :] = 2.0 * p[-3, :] - p[-4, :]
    p[-1, :] = 3.0 * p[-3, :] - 2.0 * p[-4, :]
    return p


def _dx(p, hx):
    return (p[2:-2, 3:-1] - p[2:-2, 1:-3]) / (2.0 * hx)


def _dy(p, hy):
    return (p[3:-1, 2:-2] - p[1:-3, 2:-2]) / (2.0 * hy)


def _dissipation(pf, sf, kappa, hx, hy):
    """Fourth-difference damping -kappa * div(s * h^3 grad^3 f), face-flux form.

    pf, sf: padded field and padded spectral radius |U| + sound speed.  The
    face flux is kappa * s_face * (undivided third difference), so the
    contribution telescopes exactly over the periodic core even when s
    varies, and vanishes bitwise on uniform fields.
    """
    s_fx = 0.5 * (sf[2:-2, 1:-2] + sf[2:-2, 2:-1])
    t3x = (pf[2:-2, 3:] - 3.0 * pf[2:-2, 2:-1]
           + 3.0 * pf[2:-2, 1:-2] - pf[2:-2, :-3])
    dx_flux = kappa * s_fx * t3x
    s_fy = 0.5 * (sf[1:-2, 2:-2] + sf[2:-1, 2:-2])
    t3y = (pf[3:, 2:-2] - 3.0 * pf[2:-1, 2:-2]
           + 3.0 * pf[1:-2, 2:-2] - pf[:-3, 2:-2])
    dy_flux = kappa * s_fy * t3y
    return (-(dx_flux[:, 1:] - dx_flux[:, :-1]) / hx
            - (dy_flux[1:, :] - dy_flux[:-1, :]) / hy)


def _rhs(pi_w, u1_w, u2_w, params, bc, hx, hy, kappa):
    """Tendencies (du1, du2, drho) on the working block."""
    rho = rho_of_pi_values(pi_w, params)
    spec = (np.hypot(u1_w, u2_w)
            + np.sqrt(params.c0 * (params.gamma - 1.0) * pi_w))
    sf = _pad2(spec, bc)
    pp = _pad2(pi_w, bc)
    p1 = _pad2(u1_w, bc)
    p2 = _pad2(u2_w, bc)
    du1 = (-(u1_w * _dx(p1, hx) + u2_w * _dy(p1, hy))
           + params.l * u2_w - params.c0 * _dx(pp, hx)
           + _dissipation(p1, sf, kappa, hx, hy))
    du2 = (-(u1_w * _dx(p2, hx) + u2_w * _dy(p2, hy))
           - params.l * u1_w - params.c0 * _dy(pp, hy)
           + _dissipation(p2, sf, kappa, hx, hy))
    f1 = _pad2(rho * u1_w, bc)
    f2 = _pad2(rho * u2_w, bc)
    drho = (-(_dx(f1, hx) + _dy(f2, hy))
            + _dissipation(_pad2(rho, bc), sf, kappa, hx, hy))
    return du1, du2, drho


def admissible_dt(state: FullState):
    """Acoustic CFL bound 0.4 min(h) / max(|U| + sound speed)."""
    params = state.params
    speed = (np.hypot(state.Uvel.x1.values, state.Uvel.x2.values)
             + np.sqrt(params.c0 * (params.gamma - 1.0) * state.pi.values))
    grid = state.pi.grid
    return 0.4 * min(grid.hx, grid.hy) / float(speed.max())


def step_full(state: FullState, dt, kappa=0.05) -> FullState:
    """One predictor-corrector step of the pi-U system.

    U and pi advance in primitive variables except mass: rho = rho(pi) is
    updated by the central-difference flux divergence and converted back,
    which is what conserves total mass exactly on the periodic core.
    """
    dt = float(dt)
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    dt_adm = admissible_dt(state)
    if dt > dt_adm:
        raise ConfigurationError(
            f"dt = {dt:.6g} violates the acoustic CFL bound; "
            f"admissible dt = {dt_adm:.6g}")
    grid = state.pi.grid
    hx, hy = grid.hx, grid.hy
    params, bc = state.params, state.bc

    if bc == "periodic":
        sl = (slice(None, -1), slice(None, -1))
    else:
        sl = (slice(None), slice(None))
    pi0_w = state.pi.values[sl]
    u1_w = state.Uvel.x1.values[sl]
    u2_w = state.Uvel.x2.values[sl]
    rho0 = rho_of_pi_values(pi0_w, params)

    du1a, du2a, drha = _rhs(pi0_w, u1_w, u2_w, params, bc, hx, hy, kappa)
    u1s = u1_w + dt * du1a
    u2s = u2_w + dt * du2a
    pis = pi_of_rho_values(rho0 + dt * drha, params)
    du1b, du2b, drhb = _rhs(pis, u1s, u2s, params, bc, hx, hy, kappa)

    u1n = u1_w + 0.5 * dt * (du1a + du1b)
    u2n = u2_w + 0.5 * dt * (du2a + du2b)
    pin = pi_of_rho_values(rho0 + 0.5 * dt * (drha + drhb), params)
    if not (np.all(np.isfinite(u1n)) and np.all(np.isfinite(u2n))
            and np.all(np.isfinite(pin))):
        raise NumericalError(f"non-finite state after step from t = {state.t:.6g}")

    def _full(w):
        if bc != "periodic":
            return w
        out = np.empty((grid.ny, grid.nx))
        out[:-1, :-1] = w
        out[-1, :-1] = w[0, :]
        out[:-1, -1] = w[:, 0]
        out[-1, -1] = w[0, 0]
        return out

    return FullState(ScalarField2D(grid, _full(pin)),
                     VectorField2D(ScalarField2D(grid, _full(u1n)),
                                   ScalarField2D(grid, _full(u2n))),
                     state.t + dt, bc, params)


def _trapz2(vals, grid):
    w = np.ones_like(vals)
    w[0, :] *= 0.5
    w[-1, :] *= 0.5
    w[:, 0] *= 0.5
    w[:, -1] *= 0.5
    return float((w * vals).sum()) * grid.hx * grid.hy


def diagnostics(state: FullState) -> LedgerEntry:
    """Trapezoid integrals of mass, momentum, and total energy."""
    params = state.params
    grid = state.pi.grid
    rho = rho_of_pi_values(state.pi.values, params)
    u1 = state.Uvel.x1.values
    u2 = state.Uvel.x2.values
    P = state.pi.values ** (params.gamma / (params.gamma - 1.0))
    kinetic = 0.5 * rho * (u1 * u1 + u2 * u2)
    return LedgerEntry(state.t,
                       _trapz2(rho, grid),
                       _trapz2(rho * u1, grid),
                       _trapz2(rho * u2, grid),
                       _trapz2(kinetic + P / (params.gamma - 1.0), grid))


def pattern_correlation(state: FullState, reference: ScalarField2D,
                        predicted_shift, window_cells=6):
    """Cosine similarity between the evolved pi deviation and the reference.

    The reference is the ambient-subtracted steady field pi0 - pi_ambient;
    it is translated by predicted_shift (bilinear) before scoring over its
    support.  Returns (score, best_shift) where best_shift is the integer
    node shift maximizing the score inside a +-window_cells search box.
    """
    grid = state.pi.grid
    if reference.grid != grid:
        raise ConfigurationError("reference lives on a different grid")
    ref = reference.values
    if float(np.abs(ref).max()) == 0.0:
        raise NumericalError("reference field has zero variance")
    sx, sy = (float(predicted_shift[0]), float(predicted_shift[1]))
    if abs(sx) > grid.xmax - grid.xmin or abs(sy) > grid.ymax - grid.ymin:
        raise ConfigurationError(f"predicted shift ({sx}, {sy}) exceeds the box")

    boundary = ~grid.interior_mask(rings=1)
    far = float(np.median(state.pi.values[boundary]))
    dev = state.pi.values - far
    X, Y = grid.meshes()

    def score_at(ax, ay):
        shifted = sample_bilinear(reference, X - ax, Y - ay)
        mask = np.abs(shifted) > 1e-14
        if not mask.any():
            return 0.0
        a = dev[mask]
        b = shifted[mask]
        denom = np.sqrt((a * a).sum() * (b * b).sum())
        if denom == 0.0:
            return 0.0
        return float((a * b).sum() / denom)

    score = score_at(sx, sy)
    best, best_shift = -np.inf, (0.0, 0.0)
    for dj in range(-window_cells, window_cells + 1):
        for di in range(-window_cells, window_cells + 1):
            s = score_at(di * grid.hx, dj * grid.hy)
            if s > best:
                best, best_shift = s, (di * grid.hx, dj * grid.hy)
    return score, best_shift
