"""
Field-level quantities of the causal (pilot-wave) picture.

The wavefunction is written ``psi = R exp(iS/hbar)``.  From it we get the
guidance velocity ``grad S / m``, the quantum potential
``Q = -(hbar^2/2m) lap(R)/R``, the quantum force ``-grad(V + Q)`` and the
energy density ``R^2 |grad S|^2/2m + (hbar^2/2m)|grad R|^2`` whose integral is
the conserved total energy ``H`` of a classically free system.

Points where the density falls below ``node_threshold * max(density)`` are
nodes: velocity, phase and ``Q`` are left undefined (NaN) there.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import (ComplexField, Grid, PhysicalParams, ScalarField, VectorField,
                   derivative, gradient, integrate, laplacian, local_derivative, norm,
                   stencil_reach)

NODE_THRESHOLD = 1e-12
NORM_TOLERANCE = 1e-6
BOUNDARY_DENSITY_WARN = 1e-8


@dataclass(frozen=True, eq=False)
class PolarField:
    """Amplitude/velocity form of a sampled wavefunction.

    Attributes
    ----------
    R : ndarray
        ``|psi|`` per point, kept in extended precision (``np.longdouble``).
        ``lap(R)/R`` is badly conditioned (the stencil weights scale like
        ``1/h^2``), so rounding ``R`` to float64 alone would break the exact
        insensitivity of ``Q`` to a constant rescaling of ``R`` at the 1e-10
        level.
    velocity : ndarray
        ``(dim, *shape)`` guidance velocity, NaN on nodes.
    node_mask : ndarray of bool
        True where the density is below the node threshold.
    S : ndarray or None
        Unwrapped phase action (``hbar * arg psi``), NaN on nodes; only
        computed on request.
    """

    grid: Grid
    R: np.ndarray
    velocity: np.ndarray
    node_mask: np.ndarray
    S: np.ndarray | None = None

    def __post_init__(self):
        for name in ("R", "velocity", "node_mask", "S"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=np.longdouble if name == "R" else None, copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.R.shape != self.grid.shape or self.node_mask.shape != self.grid.shape:
            raise ValueError("polar field arrays do not match the grid")
        if np.any(self.R < 0):
            raise ValueError("amplitude must be non-negative")


def polar_decompose(psi: ComplexField, p: PhysicalParams | None = None,
                    node_threshold: float = NODE_THRESHOLD, with_phase: bool = False,
                    norm_tolerance: float = NORM_TOLERANCE) -> PolarField:
    """Split ``psi`` into amplitude and guidance velocity.

    The velocity is obtained from the probability current,
    ``(hbar/m) Im(conj(psi) grad psi) / |psi|^2``, which equals ``grad S / m``
    without any phase unwrapping.  Pass ``with_phase=True`` to also get an
    unwrapped ``S`` for diagnostics.
    """
    p = p or PhysicalParams()
    values = psi.values
    dens = np.abs(values) ** 2
    peak = dens.max()
    if peak == 0:
        raise ValueError("wavefunction is identically zero")
    total = norm(psi)
    if abs(total - 1.0) > norm_tolerance:
        raise ValueError(f"wavefunction is not normalized (norm = {total:.9g})")
    mask = dens < node_threshold * peak
    safe = np.where(mask, 1.0, dens)
    vel = np.empty((psi.grid.dim,) + psi.grid.shape)
    for i in range(psi.grid.dim):
        dpsi = derivative(values, psi.grid, i, 1)
        vi = (p.hbar / p.mass) * np.imag(np.conj(values) * dpsi) / safe
        vi[mask] = np.nan
        vel[i] = vi
    S = unwrap_phase(psi, mask) * p.hbar if with_phase else None
    return PolarField(psi.grid, np.abs(values), vel, mask, S)


def unwrap_phase(psi: ComplexField, node_mask: np.ndarray | None = None) -> np.ndarray:
    """Phase of ``psi`` integrated along grid lines, axis 0 first.

    Unwrapping along axis 0, then 1, then 2 amounts to integrating the phase
    gradient from the first grid point along a path that runs down axis 0 and
    then across the remaining axes.  Only meaningful for node-free regions.
    """
    phase = np.angle(psi.values)
    for axis in range(psi.grid.dim):
        phase = np.unwrap(phase, axis=axis)
    if node_mask is not None:
        phase = np.where(node_mask, np.nan, phase)
    return phase


def scale_amplitude(polar: PolarField, c: float) -> PolarField:
    """Same field with ``R`` multiplied by ``c > 0``."""
    if not c > 0:
        raise ValueError("scale factor must be positive")
    return PolarField(polar.grid, polar.R * np.longdouble(c), polar.velocity,
                      polar.node_mask, polar.S)


def quantum_potential(polar: PolarField, p: PhysicalParams | None = None) -> ScalarField:
    """``Q = -(hbar^2/2m) lap(R)/R``; NaN on nodes."""
    p = p or PhysicalParams()
    R = polar.R
    if not np.any(R):
        raise ValueError("amplitude is identically zero")
    if not np.all(np.isfinite(R)):
        raise ValueError("amplitude has non-finite values")
    # a power-of-two rescale is exact and keeps the ratio free of under/overflow
    _, e = np.frexp(R.max())
    Rs = np.ldexp(R, -int(e))
    lap = laplacian(ScalarField(polar.grid, Rs)).values
    safe = np.where(polar.node_mask, 1.0, Rs)
    q = (-(p.hbar**2 / (2 * p.mass)) * lap / safe).astype(float)
    q[polar.node_mask] = np.nan
    return ScalarField(polar.grid, q)


def quantum_force(q: ScalarField, v_ext: ScalarField | np.ndarray | None = None) -> VectorField:
    """``-grad(V + Q)``; ``-grad Q`` when no external potential is given.

    Node points (NaN in ``q``) are excluded: with nodes present the gradient
    is taken with a local fourth-order stencil and every point whose stencil
    reaches a node is left NaN.
    """
    total = np.array(q.values, dtype=float)
    if v_ext is not None:
        vv = v_ext.values if isinstance(v_ext, ScalarField) else np.asarray(v_ext)
        if isinstance(v_ext, ScalarField) and v_ext.grid != q.grid:
            raise ValueError("quantum potential and external potential live on different grids")
        if vv.shape != q.grid.shape:
            raise ValueError("external potential does not match the grid")
        total = total + vv
    bad = ~np.isfinite(total)
    if not bad.any():
        return VectorField(q.grid, -gradient(ScalarField(q.grid, total)).values)
    filled = np.where(bad, 0.0, total)
    reach = stencil_reach(bad, q.grid, 2)
    comps = []
    for i in range(q.grid.dim):
        g = -local_derivative(filled, q.grid, i, 1)
        g[reach] = np.nan
        comps.append(g)
    return VectorField(q.grid, np.stack(comps))


def hamiltonian_density(polar: PolarField, p: PhysicalParams | None = None,
                        include_potential: bool = False) -> ScalarField:
    """``R^2 |grad S|^2 / 2m + (hbar^2/2m) |grad R|^2`` per point.

    ``grad S`` is rebuilt as ``m * velocity``; nodes contribute no kinetic
    term.  ``include_potential`` adds ``R^2 V`` for a non-free system.
    """
    p = p or PhysicalParams()
    v = np.where(np.isfinite(polar.velocity), polar.velocity, 0.0)
    R = polar.R.astype(float)
    R2 = R**2
    kinetic = R2 * p.mass * np.sum(v**2, axis=0) / 2
    gR = gradient(ScalarField(polar.grid, R)).values
    field_term = p.hbar**2 / (2 * p.mass) * np.sum(gR**2, axis=0)
    h = kinetic + field_term
    if include_potential:
        if p.potential is None:
            raise ValueError("include_potential requested but no potential is set")
        h = h + R2 * p.potential
    return ScalarField(polar.grid, h)


def total_energy(h: ScalarField) -> float:
    """Integral of the energy density.

    On periodic (free-space) grids a warning is raised when the density on
    the outer faces exceeds ``1e-8`` of its maximum, since the packet is then
    not contained in the box.
    """
    grid = h.grid
    vals = h.values
    if grid.boundary == "periodic":
        peak = np.abs(vals).max()
        edge = max(np.abs(np.take(vals, idx, axis=a)).max()
                   for a in range(grid.dim) for idx in (0, -1))
        if peak > 0 and edge > BOUNDARY_DENSITY_WARN * peak:
            warnings.warn(f"energy density at the domain boundary is {edge / peak:.2e} of "
                          "its maximum; the field has not decayed", RuntimeWarning, stacklevel=2)
    return integrate(vals, grid)


def gradient_energy(psi: ComplexField, p: PhysicalParams | None = None) -> float:
    """``(hbar^2/2m) integral |grad psi|^2`` evaluated by Parseval's theorem.

    Since ``|grad psi|^2 = R^2 |grad S|^2 / hbar^2 + |grad R|^2`` this is the
    same total as :func:`total_energy` of :func:`hamiltonian_density`, but it
    never differentiates ``R`` and so stays accurate where ``R`` has kinks
    (nodes, a freshly removed wall).  Periodic grids use the Fourier
    transform, dirichlet grids the type-I sine transform; the discrete sine
    modes are eigenvectors of the implicit propagator, which therefore
    conserves this value to rounding.
    """
    p = p or PhysicalParams()
    grid = psi.grid
    axes = tuple(range(grid.dim))
    if grid.boundary == "periodic":
        coeff = sfft.fftn(psi.values, axes=axes, norm="ortho")
        ks = [grid.wavenumbers(i) for i in axes]
    else:
        coeff = sfft.dstn(psi.values, type=1, axes=axes, norm="ortho")
        ks = [np.pi * np.arange(1, n + 1) / L for n, L in zip(grid.shape, grid.lengths)]
    k2 = np.zeros(grid.shape)
    for i, k in enumerate(ks):
        shape = [1] * grid.dim
        shape[i] = -1
        k2 = k2 + k.reshape(shape) ** 2
    return float(p.hbar**2 / (2 * p.mass) * np.sum(np.abs(coeff) ** 2 * k2) * grid.cell_volume)


def energy(psi: ComplexField, p: PhysicalParams | None = None, **kwargs) -> float:
    """Shortcut: total energy of a wavefunction."""
    polar = polar_decompose(psi, p, **kwargs)
    return total_energy(hamiltonian_density(polar, p))
