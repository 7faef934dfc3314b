"""
Bohmian particle paths.

Particles move with the guidance velocity ``grad S / m`` of the field they
sit in.  Paths are integrated with classical RK4; the three velocity fields
an RK4 step needs (start, midpoint, end) come from snapshots, see
:mod:`pilotwave.sources`.

A particle whose interpolation stencil touches a node, or that leaves the
grid, is halted: its later positions are NaN and its status records why.

Random initial positions follow the Born density ``R^2``.  Trajectory ``i``
draws from its own generator ``numpy.random.default_rng([seed, i])``, so
positions do not depend on how many other trajectories are drawn or in
which order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import kstest

from . import gaussian
from .propagate import SeparableState
from .sources import GaussianSnapshot, GaussianSource, GridSnapshot, SeparableSnapshot

OK = "ok"
NODE = "node-adjacent"
LEFT = "left-grid"


class NodeError(RuntimeError):
    """Velocity requested where the field has a node."""


@dataclass(frozen=True)
class TrajectoryState:
    t: float
    x: np.ndarray
    v: np.ndarray


def interpolate_velocity(field, x) -> np.ndarray:
    """Guidance velocity of ``field`` (a snapshot) at a single position ``x``."""
    x = np.asarray(x, dtype=float)
    v = field.velocity(x[None, :])[0]
    if not np.all(np.isfinite(v)):
        raise NodeError(f"interpolation stencil at {x} touches a node or leaves the grid")
    return v


def rk4_positions(x: np.ndarray, dt: float, f0, fmid, f1) -> np.ndarray:
    """One RK4 step for positions ``x`` of shape ``(N, dim)``."""
    k1 = f0.velocity(x)
    k2 = fmid.velocity(x + 0.5 * dt * k1)
    k3 = fmid.velocity(x + 0.5 * dt * k2)
    k4 = f1.velocity(x + dt * k3)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step(state: TrajectoryState, fields, dt: float) -> TrajectoryState:
    """Advance one particle by ``dt``; ``fields`` are the snapshots at t, t+dt/2, t+dt."""
    f0, fmid, f1 = fields
    x = rk4_positions(np.asarray(state.x, dtype=float)[None, :], dt, f0, fmid, f1)[0]
    v = f1.velocity(x[None, :])[0]
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise NodeError(f"trajectory from {state.x} entered a node region or left the grid")
    return TrajectoryState(state.t + dt, x, v)


# ---------------------------------------------------------------------------
# Born sampling
# ---------------------------------------------------------------------------

def _uniforms(count: int, dim: int, seed: int) -> np.ndarray:
    return np.array([np.random.default_rng([seed, i]).random(dim) for i in range(count)])


def _inverse_cdf_1d(coords: np.ndarray, density: np.ndarray, u: np.ndarray,
                    lo: float, hi: float, wall: bool) -> np.ndarray:
    """Invert the CDF of the piecewise-linear density through ``(coords, density)``.

    With ``wall`` the density is pinned to 0 at ``lo`` and ``hi``.
    """
    if wall:
        coords = np.concatenate([[lo], coords, [hi]])
        density = np.concatenate([[0.0], density, [0.0]])
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(coords))])
    target = u * cum[-1]
    j = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, len(coords) - 2)
    # mass inside cell j up to offset s: d0 s + slope s^2 / 2
    h = coords[j + 1] - coords[j]
    d0, d1 = density[j], density[j + 1]
    slope = (d1 - d0) / h
    need = target - cum[j]
    disc = np.sqrt(np.maximum(d0**2 + 2 * slope * need, 0.0))
    # stable root of slope s^2/2 + d0 s - need = 0
    denom = d0 + disc
    off = np.where(denom > 0, 2 * need / np.where(denom > 0, denom, 1.0), 0.0)
    return coords[j] + np.clip(off, 0.0, h)


def sample_born(field, count: int, seed: int) -> np.ndarray:
    """``count`` positions distributed as ``R^2`` of ``field``.

    ``field`` may be :class:`~pilotwave.gaussian.GaussianParams` (packet at
    t = 0), a Gaussian snapshot, a separable snapshot/state, or a grid
    snapshot.  Separable densities use per-axis inverse-transform sampling;
    general grid densities use rejection sampling against the multilinear
    interpolant of the sampled density.
    """
    if count < 1:
        raise ValueError("need at least one sample")
    if isinstance(field, gaussian.GaussianParams):
        field = GaussianSnapshot(field, 0.0)
    if isinstance(field, SeparableState):
        field = SeparableSnapshot.from_fields(field.factors, t=field.t)
    if isinstance(field, GaussianSnapshot):
        prm = field.params
        u = _uniforms(count, prm.dim, seed)
        s = float(gaussian.sigma_at(field.t, prm))
        return prm.u_vec * field.t + s * ndtri(u)
    if isinstance(field, SeparableSnapshot):
        u = _uniforms(count, field.dim, seed)
        cols = []
        for i, f in enumerate(field.factors):
            g = f.grid
            cols.append(_inverse_cdf_1d(g.axis(0), f.density(), u[:, i], g.lower[0], g.upper[0],
                                        g.boundary == "dirichlet"))
        return np.stack(cols, axis=1)
    if isinstance(field, GridSnapshot):
        if field.dim == 1:
            g = field.grid
            u = _uniforms(count, 1, seed)
            return _inverse_cdf_1d(g.axis(0), field.density(), u[:, 0], g.lower[0], g.upper[0],
                                   g.boundary == "dirichlet")[:, None]
        return _rejection(field, count, seed)
    raise TypeError(f"cannot sample from {type(field).__name__}")


def _rejection(snap: GridSnapshot, count: int, seed: int) -> np.ndarray:
    from scipy.interpolate import RegularGridInterpolator
    g = snap.grid
    coords = g.axes
    dens = snap.density()
    if g.boundary == "dirichlet":
        coords = [np.concatenate([[a], c, [b]]) for a, c, b in zip(g.lower, coords, g.upper)]
        dens = np.pad(dens, 1)
    interp = RegularGridInterpolator(coords, dens, method="linear", bounds_error=False,
                                     fill_value=0.0)
    lo = np.array([c[0] for c in coords])
    hi = np.array([c[-1] for c in coords])
    ceiling = dens.max()
    out = np.empty((count, g.dim))
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        while True:
            x = lo + (hi - lo) * rng.random(g.dim)
            if rng.random() * ceiling < interp(x[None, :])[0]:
                out[i] = x
                break
    return out


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

@dataclass
class Ensemble:
    """Paths sharing one time base.

    ``positions`` and ``velocities`` have shape ``(steps + 1, N, dim)``;
    entries after a particle halted are NaN.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    status: list[str]
    seed: int | None = None
    halted_at: np.ndarray = field(default=None)

    @property
    def count(self) -> int:
        return self.positions.shape[1]

    def trajectory(self, i: int) -> list[TrajectoryState]:
        return [TrajectoryState(t, x, v) for t, x, v in
                zip(self.times, self.positions[:, i], self.velocities[:, i])]


class TrajectoryIntegrator:
    """Vectorized RK4 for many particles, fed snapshot by snapshot.

    Used directly when snapshots are produced on the fly by a propagator;
    :func:`integrate` wraps it for sources with an ``at(t)`` method.
    """

    def __init__(self, x0: np.ndarray, first, seed: int | None = None):
        x0 = np.atleast_2d(np.asarray(x0, dtype=float))
        self.x = x0.copy()
        self.t = first.t
        self.status = [OK] * x0.shape[0]
        self.halted_at = np.full(x0.shape[0], np.nan)
        self.seed = seed
        v0 = first.velocity(self.x)
        self._halt(~np.all(np.isfinite(v0), axis=1), NODE)
        v0[~self.alive] = np.nan
        self.times = [self.t]
        self.positions = [self.x.copy()]
        self.velocities = [v0]

    @property
    def alive(self) -> np.ndarray:
        return np.array([s == OK for s in self.status])

    def _halt(self, which: np.ndarray, reason: str):
        for i in np.flatnonzero(which):
            if self.status[i] == OK:
                self.status[i] = reason
                self.halted_at[i] = self.t
        self.x[which] = np.nan

    def advance(self, f0, fmid, f1) -> np.ndarray:
        dt = f1.t - f0.t
        live = self.alive
        xn = np.full_like(self.x, np.nan)
        if live.any():
            xn[live] = rk4_positions(self.x[live], dt, f0, fmid, f1)
        self.t = f1.t
        grid = getattr(f1, "grid", None)
        left = live & ~np.all(np.isfinite(xn), axis=1)
        if grid is not None:
            inside = np.zeros_like(live)
            inside[live] = grid.contains(np.nan_to_num(xn[live], nan=np.inf))
            left_grid = live & ~inside
        else:
            left_grid = np.zeros_like(live)
        self.x = xn
        self._halt(left_grid, LEFT)
        self._halt(left & ~left_grid, NODE)
        v = np.full_like(self.x, np.nan)
        live = self.alive
        if live.any():
            v[live] = f1.velocity(self.x[live])
        bad = live & ~np.all(np.isfinite(v), axis=1)
        self._halt(bad, NODE)
        v[bad] = np.nan
        self.times.append(self.t)
        self.positions.append(self.x.copy())
        self.velocities.append(v)
        return self.x

    def result(self) -> Ensemble:
        return Ensemble(np.array(self.times), np.array(self.positions), np.array(self.velocities),
                        list(self.status), self.seed, self.halted_at.copy())


def integrate(source, x0, t0: float, t_end: float, dt: float, seed: int | None = None) -> Ensemble:
    """Integrate paths from positions ``x0`` through ``source.at(t)`` snapshots."""
    steps = int(round((t_end - t0) / dt))
    if steps < 1 or abs(steps * dt - (t_end - t0)) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError("t_end - t0 must be a positive multiple of dt")
    f0 = source.at(t0)
    integ = TrajectoryIntegrator(x0, f0, seed)
    for n in range(steps):
        t = t0 + n * dt
        fmid = source.at(t + 0.5 * dt)
        f1 = source.at(t0 + (n + 1) * dt)
        integ.advance(f0, fmid, f1)
        f0 = f1
    return integ.result()


@dataclass
class EquivarianceReport:
    ks_per_axis: list[float]
    count: int
    t: float

    @property
    def max_ks(self) -> float:
        return max(self.ks_per_axis)


def _marginal_cdf(snapshot, axis):
    if hasattr(snapshot, "marginal_cdf"):
        return snapshot.marginal_cdf(axis)
    coords, dens = snapshot.marginal(axis)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(coords))])
    cdf /= cdf[-1]
    return lambda q: np.interp(q, coords, cdf)


def equivariance(positions: np.ndarray, snapshot) -> EquivarianceReport:
    """Per-axis Kolmogorov-Smirnov distance between positions and the ``R^2`` marginals."""
    pos = positions[np.all(np.isfinite(positions), axis=1)]
    ks = [float(kstest(pos[:, i], _marginal_cdf(snapshot, i)).statistic)
          for i in range(pos.shape[1])]
    return EquivarianceReport(ks, pos.shape[0], snapshot.t)


def run_ensemble(source, count: int, t_end: float, dt: float, seed: int, t0: float = 0.0,
                 x0: np.ndarray | None = None):
    """Born-sample ``count`` particles at ``t0``, integrate to ``t_end``.

    Returns ``(ensemble, equivariance_report)``.
    """
    start = source.at(t0)
    if x0 is None:
        x0 = sample_born(start, count, seed)
    ens = integrate(source, x0, t0, t_end, dt, seed)
    report = equivariance(ens.positions[-1], source.at(ens.times[-1]))
    return ens, report


__all__ = ["TrajectoryState", "Ensemble", "TrajectoryIntegrator", "EquivarianceReport",
           "NodeError", "interpolate_velocity", "step", "rk4_positions", "sample_born",
           "integrate", "run_ensemble", "equivariance", "GaussianSource"]
