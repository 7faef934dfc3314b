"""
Closed-form free Gaussian packet.

The packet has initial width ``sigma0`` in every coordinate, group velocity
``u`` and carrier wave vector ``k = m u / hbar``::

    psi(x, t) = (2 pi s_t^2)^(-d/4) exp{ i k.(x - u t/2) - (x - u t)^2 / (4 sigma0 s_t) }
    s_t       = sigma0 (1 + i hbar t / (2 m sigma0^2))

with ``d`` the number of components of ``u`` (3 for the physical packet).
Every derived quantity below is written out symbolically, so this module
never touches a grid derivative and can serve as an independent reference
for the numerical code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ComplexField, Grid


@dataclass(frozen=True)
class GaussianParams:
    """Parameters of the free Gaussian packet.

    ``k`` may be omitted; when given it must equal ``mass * u / hbar``.
    """

    sigma0: float = 1.0
    u: tuple[float, ...] = (0.0, 0.0, 0.0)
    mass: float = 1.0
    hbar: float = 1.0
    k: tuple[float, ...] | None = None

    def __post_init__(self):
        u = tuple(float(c) for c in np.atleast_1d(self.u))
        object.__setattr__(self, "u", u)
        if not 1 <= len(u) <= 3:
            raise ValueError("u must have 1 to 3 components")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not (self.mass > 0 and self.hbar > 0):
            raise ValueError("mass and hbar must be positive")
        k_self = tuple(self.mass * c / self.hbar for c in u)
        if self.k is not None:
            k = tuple(float(c) for c in np.atleast_1d(self.k))
            if len(k) != len(u) or not np.allclose(k, k_self, rtol=1e-12, atol=1e-12):
                raise ValueError("wave vector must equal m u / hbar")
        object.__setattr__(self, "k", k_self)

    @property
    def dim(self) -> int:
        return len(self.u)

    @property
    def u_vec(self) -> np.ndarray:
        return np.asarray(self.u)

    @property
    def k_vec(self) -> np.ndarray:
        return np.asarray(self.k)


def sigma_at(t, params: GaussianParams):
    """RMS width ``sigma0 * sqrt(1 + (hbar t / 2 m sigma0^2)^2)``."""
    tau = params.hbar * np.asarray(t, dtype=float) / (2 * params.mass * params.sigma0**2)
    return params.sigma0 * np.sqrt(1 + tau**2)


def _s_t(t, params):
    return params.sigma0 * (1 + 1j * params.hbar * t / (2 * params.mass * params.sigma0**2))


def _offset(x, t, params):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.dim:
        raise ValueError(f"positions must have {params.dim} components in the last axis")
    return x - params.u_vec * t


def wavefunction_at(x, t: float, params: GaussianParams):
    """Complex amplitude at positions ``x`` of shape ``(..., dim)``."""
    x = np.asarray(x, dtype=float)
    xi = _offset(x, t, params)
    s = _s_t(t, params)
    phase = (x - 0.5 * params.u_vec * t) @ params.k_vec
    expo = 1j * phase - np.sum(xi**2, axis=-1) / (4 * params.sigma0 * s)
    return (2 * np.pi * s**2) ** (-params.dim / 4) * np.exp(expo)


def factor_1d(x: np.ndarray, t: float, params: GaussianParams, axis: int) -> np.ndarray:
    """One Cartesian factor of the packet; the product over axes is ``psi``."""
    x = np.asarray(x, dtype=float)
    u = params.u[axis]
    k = params.k[axis]
    s = _s_t(t, params)
    expo = 1j * k * (x - 0.5 * u * t) - (x - u * t) ** 2 / (4 * params.sigma0 * s)
    return (2 * np.pi * s**2) ** (-0.25) * np.exp(expo)


def sample(grid: Grid, t: float, params: GaussianParams) -> ComplexField:
    """Packet at time ``t`` sampled on ``grid`` (dimensions must agree)."""
    if grid.dim != params.dim:
        raise ValueError("grid and packet dimensions differ")
    values = np.ones(grid.shape, dtype=complex)
    for i, xi in enumerate(grid.mesh()):
        values = values * factor_1d(xi, t, params, i)
    return ComplexField(grid, values)


def sample_factor(grid: Grid, t: float, params: GaussianParams, axis: int) -> ComplexField:
    """1D factor along ``axis`` sampled on a 1D grid."""
    if grid.dim != 1:
        raise ValueError("factor grids are one-dimensional")
    return ComplexField(grid, factor_1d(grid.axis(0), t, params, axis))


@dataclass(frozen=True)
class GaussianPointEval:
    """Closed-form quantities at a set of positions (leading axes of ``x``)."""

    R: np.ndarray
    gradR: np.ndarray
    lapR: np.ndarray
    gradS: np.ndarray
    lapS: np.ndarray
    dSdt: np.ndarray
    lap_dSdt: np.ndarray
    T: np.ndarray
    Q: np.ndarray
    field_energy: np.ndarray


def _spread_rate(t, params):
    """``hbar^2 t / (4 m sigma0^2 sigma^2)``: coefficient of ``x - ut`` in ``grad S``."""
    sig2 = sigma_at(t, params) ** 2
    return params.hbar**2 * t / (4 * params.mass * params.sigma0**2 * sig2)


def eval_point(x, t: float, params: GaussianParams) -> GaussianPointEval:
    """Amplitude, phase derivatives and energies of the packet at ``x``.

    ``dSdt`` is the rate of change of ``S`` following the particle,
    ``dS/dt = T - Q``; ``Q = (hbar^2/4 m sigma^2)(d - |x - ut|^2 / 2 sigma^2)``.
    """
    m, hbar, d = params.mass, params.hbar, params.dim
    xi = _offset(x, t, params)
    xi2 = np.sum(xi**2, axis=-1)
    sig2 = sigma_at(t, params) ** 2
    s02 = params.sigma0**2
    u = params.u_vec
    a = _spread_rate(t, params)

    R = (2 * np.pi * sig2) ** (-d / 4) * np.exp(-xi2 / (4 * sig2))
    gradR = -R[..., None] * xi / (2 * sig2)
    lapR = R * (xi2 / (4 * sig2**2) - d / (2 * sig2))
    gradS = m * u + a * xi
    lapS = np.full_like(xi2, d * a)
    u_xi = xi @ u
    dSdt = (0.5 * m * u @ u - d * hbar**2 / (4 * m * sig2) + a * u_xi
            + hbar**2 * xi2 / (8 * m * s02 * sig2))
    lap_dSdt = np.full_like(xi2, d * hbar**2 / (4 * m * s02 * sig2))
    T = 0.5 * m * u @ u + a * u_xi + a**2 * xi2 / (2 * m)
    Q = hbar**2 / (4 * m * sig2) * (d - xi2 / (2 * sig2))
    fe = field_energy_from_derivatives(R, gradR, lapR, gradS, lapS, lap_dSdt, m, d)
    return GaussianPointEval(R, gradR, lapR, gradS, lapS, dSdt, lap_dSdt, T, Q, fe)


def quantum_potential_at(x, t: float, params: GaussianParams):
    xi2 = np.sum(_offset(x, t, params) ** 2, axis=-1)
    sig2 = sigma_at(t, params) ** 2
    return params.hbar**2 / (4 * params.mass * sig2) * (params.dim - xi2 / (2 * sig2))


def quantum_force_at(x, t: float, params: GaussianParams):
    """``-grad Q = (hbar^2 / 4 m sigma^4)(x - ut)``."""
    xi = _offset(x, t, params)
    sig2 = sigma_at(t, params) ** 2
    return params.hbar**2 / (4 * params.mass * sig2**2) * xi


def velocity_at(x, t: float, params: GaussianParams):
    return params.u_vec + _spread_rate(t, params) * _offset(x, t, params) / params.mass


def _dsig2_dt(t, params):
    return params.hbar**2 * t / (2 * params.mass**2 * params.sigma0**2)


def dQdt_partial_at(x, t: float, params: GaussianParams):
    """``dQ/dt`` at a fixed point."""
    xi = _offset(x, t, params)
    xi2 = np.sum(xi**2, axis=-1)
    sig2 = sigma_at(t, params) ** 2
    ds2 = _dsig2_dt(t, params)
    return params.hbar**2 / (4 * params.mass) * (
        -params.dim * ds2 / sig2**2 + (xi @ params.u_vec) / sig2**2 + xi2 * ds2 / sig2**3)


def dRdt_partial_at(x, t: float, params: GaussianParams):
    """``dR/dt`` at a fixed point."""
    xi = _offset(x, t, params)
    xi2 = np.sum(xi**2, axis=-1)
    sig2 = sigma_at(t, params) ** 2
    ds2 = _dsig2_dt(t, params)
    R = (2 * np.pi * sig2) ** (-params.dim / 4) * np.exp(-xi2 / (4 * sig2))
    return R * (-params.dim * ds2 / (4 * sig2) + (xi @ params.u_vec) / (2 * sig2)
                + xi2 * ds2 / (4 * sig2**2))


def total_H(params: GaussianParams) -> float:
    """``m |u|^2 / 2 + d hbar^2 / (8 m sigma0^2)``, constant in time."""
    u = params.u_vec
    return float(0.5 * params.mass * u @ u
                 + params.dim * params.hbar**2 / (8 * params.mass * params.sigma0**2))


def field_energy_from_derivatives(R, gradR, lapR, gradS, lapS, lap_dSdt, mass: float,
                                  dim: int = 3):
    """Field energy ``H - T`` written through ``R``, ``S`` and their derivatives.

    ``w = R^2 / ((grad R)^2 - R lap R)``::

        (dim/4) w lap(dS/dt) + w lapS (grad S/m).(grad R/R)
            + (1/2m) (w lapS)^2 (grad R/R)^2

    The leading factor is 3/4 for a 3D packet.  The expression relies on
    ``div(grad R / R)`` being uniform, which holds for a Gaussian amplitude;
    elsewhere it is only a diagnostic.
    """
    R = np.asarray(R)
    gradR = np.asarray(gradR)
    denom = np.sum(gradR**2, axis=-1) - R * lapR
    R2 = R**2
    if np.any(~(np.abs(denom) > 1e-300)) or np.any(R2 == 0):
        raise ValueError("(grad R)^2 - R lap R vanishes; field energy expression is singular")
    w = R2 / denom
    log_grad = gradR / R[..., None]
    first = dim / 4 * w * lap_dSdt
    second = w * lapS * np.sum(np.asarray(gradS) / mass * log_grad, axis=-1)
    third = (w * lapS) ** 2 * np.sum(log_grad**2, axis=-1) / (2 * mass)
    return first + second + third


def field_energy_at(x, t: float, params: GaussianParams, amplitude_scale: float = 1.0):
    """Field energy of the packet at ``(x, t)`` from its amplitude and phase.

    ``amplitude_scale`` multiplies ``R`` (and its derivatives) before
    evaluation; the result does not depend on it.
    """
    ev = eval_point(x, t, params)
    c = amplitude_scale
    return field_energy_from_derivatives(c * ev.R, c * ev.gradR, c * ev.lapR, ev.gradS, ev.lapS,
                                         ev.lap_dSdt, params.mass, params.dim)
