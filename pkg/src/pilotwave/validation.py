"""
Numerical checks run by ``pilotwave validate``.

Each check compares a computed quantity against a closed-form value or a
convergence requirement and returns a :class:`Check`.  Checks record only
deterministic quantities (no timings), so their JSON output can be compared
byte for byte across runs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gaussian
from .core import gradient_energy, polar_decompose, quantum_potential, scale_amplitude
from .grid import (ComplexField, Grid, PhysicalParams, ScalarField, gradient, laplacian,
                   local_derivative, stencil_reach)
from .ledger import build_ledger, check_eq16, check_eq17
from .propagate import SeparableState, SpectralPropagator, box_eigenstate, box_energy
from .scenarios import BoxReleaseConfig, rms_width, run_box_release
from .sources import GaussianSource, SeparableSnapshot
from .trajectory import integrate, run_ensemble


@dataclass
class Check:
    key: str
    description: str
    value: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.key}: {self.description} (value {self.value:.6g}, " \
               f"threshold {self.threshold:.6g})"


def check_gaussian_energy(n: int = 128, halfwidth: float = 12.0) -> Check:
    """Quadrature of the energy density of the sigma0 = 1, u = 0 packet at t = 0, 0.5, 1."""
    prm = gaussian.GaussianParams()
    p = PhysicalParams()
    target = gaussian.total_H(prm)
    values = {}
    for t in (0.0, 0.5, 1.0):
        g = Grid((-halfwidth,), (halfwidth,), (n,), "periodic")
        fields = [gaussian.sample_factor(g, t, prm, i) for i in range(prm.dim)]
        values[t] = SeparableSnapshot.from_fields(fields, p, t).H
    err = max(abs(v - target) / target for v in values.values())
    return Check("1", "energy quadrature equals 3/8 at t = 0, 0.5, 1", err, 1e-6, err <= 1e-6,
                 {"H": {str(k): v for k, v in values.items()}, "target": target})


def check_spreading(n1: int = 512, n3: int = 256, halfwidth: float = 14.0) -> Check:
    """RMS width after spectral propagation to t = 1 against sigma(t)."""
    prm1 = gaussian.GaussianParams(u=(0.0,))
    p = PhysicalParams()
    target = float(gaussian.sigma_at(1.0, prm1))
    g = Grid((-halfwidth,), (halfwidth,), (n1,), "periodic")
    prop = SpectralPropagator(gaussian.sample(g, 0.0, prm1), p, 1e-2)
    w1 = rms_width(prop.advance(100))
    prm3 = gaussian.GaussianParams()
    g3 = Grid((-halfwidth,), (halfwidth,), (n3,), "periodic")
    state = SeparableState([gaussian.sample_factor(g3, 0.0, prm3, i) for i in range(3)])
    state.start(p, 1e-2).advance(100)
    w3 = [rms_width(f) for f in state.factors]
    err = max(abs(w - target) / target for w in [w1] + w3)
    return Check("2", "propagated RMS width matches sigma(1) (1D and separable 3D)", err, 1e-3,
                 err <= 1e-3, {"width_1d": w1, "width_3d": w3, "target": target})


def check_box_Q(n: int = 64) -> Check:
    """Grid quantum potential of the (1,1,1) ground state, 3+ cells from the walls."""
    g = Grid.cube(0.0, 1.0, n, 3, "dirichlet")
    p = PhysicalParams()
    q = quantum_potential(polar_decompose(box_eigenstate(g, p), p), p).values
    inner = q[3:-3, 3:-3, 3:-3]
    target = 3 * np.pi**2 / 2
    err = float(np.max(np.abs(inner - target)) / target)
    return Check("3", "box ground-state Q equals 3 pi^2 / 2 away from the walls", err, 1e-3,
                 err <= 1e-3, {"target": target})


def gaussian_path_ledger(dt: float, t_end: float = 1.0, x0=(1.0, 0.0, 0.0)):
    prm = gaussian.GaussianParams()
    src = GaussianSource(prm)
    ens = integrate(src, np.array([x0]), 0.0, t_end, dt)
    snaps = [src.at(t) for t in ens.times]
    return build_ledger(ens.times, ens.positions[:, 0], snaps, PhysicalParams(),
                        {"scenario": "free-gaussian", "dt": dt, "x0": list(x0)})


def check_exchange(dts=(1e-3, 5e-4, 2.5e-4)) -> tuple[Check, object]:
    """Kinetic-energy and field-energy exchange along the path from (1, 0, 0)."""
    rel16, rel17 = [], []
    first = None
    for dt in dts:
        led = gaussian_path_ledger(dt)
        first = first or led
        rel16.append(check_eq16(led).relative)
        rel17.append(check_eq17(led).relative)
    shrink16 = rel16[0] / rel16[-1]
    shrink17 = rel17[0] / rel17[-1]
    ok = rel16[0] < 1e-3 and rel17[0] < 1e-3 and shrink16 >= 3 and shrink17 >= 3
    return Check("4", "exchange residuals < 1e-3 of signal and shrink >= 3x over two halvings",
                 max(rel16[0], rel17[0]), 1e-3, bool(ok),
                 {"dt": list(dts), "eq16_relative": rel16, "eq17_relative": rel17,
                  "eq16_shrink": shrink16, "eq17_shrink": shrink17}), first


def check_equivariance(count: int = 10_000, seed: int = 0, dt: float = 1e-2) -> Check:
    src = GaussianSource(gaussian.GaussianParams())
    _, rep = run_ensemble(src, count, 1.0, dt, seed)
    return Check("5", "Born ensemble stays Born distributed (per-axis KS at t = 1)",
                 rep.max_ks, 0.02, rep.max_ks < 0.02, {"ks_per_axis": rep.ks_per_axis})


def amplitude_invariance(psi, p, scales=(0.1, 5.0, 1000.0)) -> float:
    """Largest ``|Q(cR) - Q(R)| / max(1, |Q(R)|)`` over non-node points and scales."""
    polar = polar_decompose(psi, p)
    q = quantum_potential(polar, p).values
    ok = np.isfinite(q)
    worst = 0.0
    for c in scales:
        qc = quantum_potential(scale_amplitude(polar, c), p).values
        worst = max(worst, float(np.max(np.abs(qc[ok] - q[ok]) / np.maximum(1.0, np.abs(q[ok])))))
    return worst


def check_amplitude_invariance() -> Check:
    p = PhysicalParams()
    g = Grid.cube(-8.0, 8.0, 48, 3)
    gauss = amplitude_invariance(gaussian.sample(g, 0.5, gaussian.GaussianParams(u=(0.5, 0, 0))), p)
    box = amplitude_invariance(box_eigenstate(Grid.cube(0.0, 1.0, 32, 3, "dirichlet"), p), p)
    worst = max(gauss, box)
    return Check("6", "Q(cR) = Q(R) for c in {0.1, 5, 1000}", worst, 1e-12, worst <= 1e-12,
                 {"gaussian": gauss, "box": box})


def check_field_energy_identity(samples: int = 100, seed: int = 0) -> Check:
    prm = gaussian.GaussianParams()
    rng = np.random.default_rng(seed)
    x = rng.uniform(-3, 3, size=(samples, 3))
    t = rng.uniform(0, 3, size=samples)
    worst = 0.0
    for xi, ti in zip(x, t):
        ev = gaussian.eval_point(xi, ti, prm)
        fe = gaussian.field_energy_at(xi, ti, prm)
        worst = max(worst, abs(float(fe) - (gaussian.total_H(prm) - float(ev.T))))
    return Check("7", "field energy from R and S equals H - T at random (x, t)", worst, 1e-9,
                 worst <= 1e-9, {"samples": samples})


def _masked_derivative(values, grid, axis, order):
    """Local-stencil derivative; NaN wherever the stencil meets a NaN input."""
    bad = ~np.isfinite(values)
    out = local_derivative(np.where(bad, 0.0, values), grid, axis, order)
    out[stencil_reach(bad, grid, 2)] = np.nan
    return out


def field_energy_on_grid(psi, p: PhysicalParams | None = None):
    """Field-energy expression evaluated from a sampled free wavefunction.

    Uses ``dS/dt = T - Q`` along the path (the quantum Hamilton-Jacobi
    equation with V = 0), so ``lap(dS/dt) = lap(T - Q)``.  Returns
    ``(field_energy, H - T, mask)`` with ``mask`` marking points where
    ``R`` exceeds 1e-3 of its peak.
    """
    p = p or PhysicalParams()
    polar = polar_decompose(psi, p)
    g = psi.grid
    R = np.asarray(polar.R, dtype=float)
    gradR = np.moveaxis(gradient(ScalarField(g, R)).values, 0, -1)
    lapR = laplacian(ScalarField(g, R)).values
    gradS = np.moveaxis(p.mass * polar.velocity, 0, -1)
    lapS = sum(_masked_derivative(p.mass * polar.velocity[i], g, i, 1) for i in range(g.dim))
    T = 0.5 * p.mass * np.sum(polar.velocity**2, axis=0)
    Q = quantum_potential(polar, p).values
    lap_dSdt = sum(_masked_derivative(T - Q, g, i, 2) for i in range(g.dim))
    fe = gaussian.field_energy_from_derivatives(R, gradR, lapR, gradS, lapS, lap_dSdt, p.mass,
                                                g.dim)
    return fe, gradient_energy(psi, p) - T, (R > 1e-3 * R.max()) & np.isfinite(fe)


def field_energy_beyond_gaussians(n: int = 256, halfwidth: float = 16.0) -> dict:
    """Informational: largest deviation of the field-energy expression from ``H - T``.

    For a Gaussian the deviation is discretization error only; for a
    superposition of two Gaussians of different widths it is not small,
    because the expression relies on ``div(grad R / R)`` being uniform.
    """
    g = Grid((-halfwidth,), (halfwidth,), (n,), "periodic")
    single = gaussian.sample(g, 0.3, gaussian.GaussianParams(u=(0.5,)))
    wide = gaussian.sample(g, 0.3, gaussian.GaussianParams(sigma0=1.6, u=(-0.3,)))
    mixed = ComplexField(g, single.values + 0.6 * wide.values).normalized()
    out = {}
    for name, psi in (("gaussian", single), ("two_gaussians", mixed)):
        fe, target, mask = field_energy_on_grid(psi)
        dev = np.abs(fe - target)[mask]
        out[name] = {"max_abs_deviation": float(dev.max()),
                     "median_abs_deviation": float(np.median(dev)),
                     "H": gradient_energy(psi)}
    return out


def release_checks(seed: int = 0, smoke_n: int = 64):
    """Box release: 1D smoke run, separable 3D run and a refined run for the rise time."""
    smoke = run_box_release(BoxReleaseConfig(dim=1, n=smoke_n, seed=seed))
    full = run_box_release(BoxReleaseConfig(dim=3, n=smoke_n, seed=seed))
    fine = run_box_release(BoxReleaseConfig(dim=3, n=2 * smoke_n, seed=seed))
    s, f = smoke.summary, full.summary
    q1 = box_energy((1.0,), (1,))
    checks = [
        Check("8.smoke", "1D stationary Q equals pi^2 / 2",
              abs(s["Q_stationary"] - q1) / q1, 1e-3, abs(s["Q_stationary"] - q1) / q1 <= 1e-3),
        Check("8a", "H constant after release", f["H_relative_drift"], 1e-3,
              f["H_relative_drift"] <= 1e-3),
        Check("8b", "smoothed ensemble-mean T never decreases during the transient",
              -f["T_smoothed_min_step"], 0.0, f["T_monotonic"],
              {"largest_dip_standard_errors": f["T_largest_dip_standard_errors"],
               "field_average_monotonic": f["T_field_average_monotonic"]}),
        Check("8c", "ensemble-mean KE gain within 20% of 14.55",
              abs(f["delta_KE"] - f["delta_Q_reference"]) / f["delta_Q_reference"], 0.2,
              abs(f["delta_KE"] - f["delta_Q_reference"]) / f["delta_Q_reference"] <= 0.2,
              {"delta_KE": f["delta_KE"], "released_energy": f["released_energy"]}),
    ]
    r1, r2 = f["rise_time_90"], fine.summary["rise_time_90"]
    ratio = max(r1, r2) / min(r1, r2) if min(r1, r2) > 0 else float("inf")
    checks.append(Check("8d", "90% rise time positive and within 2x under refinement", ratio, 2.0,
                        bool(r1 > 0 and r2 > 0 and ratio <= 2.0),
                        {"rise_time_n": r1, "rise_time_2n": r2}))
    return checks, smoke, full


def run_all(seed: int = 0, progress=None):
    """Every check in order; returns ``(checks, artifacts)``."""
    say = progress or (lambda msg: None)
    checks = []
    for fn in (check_gaussian_energy, check_spreading, check_box_Q):
        checks.append(fn())
        say(checks[-1].line())
    c4, ledger = check_exchange()
    checks.append(c4)
    say(c4.line())
    for fn in (lambda: check_equivariance(seed=seed), check_amplitude_invariance,
               lambda: check_field_energy_identity(seed=seed)):
        checks.append(fn())
        say(checks[-1].line())
    rel, smoke, full = release_checks(seed)
    for c in rel:
        checks.append(c)
        say(c.line())
    info = {"field_energy_beyond_gaussians": field_energy_beyond_gaussians()}
    return checks, {"gaussian_ledger": ledger, "release_smoke": smoke, "release_3d": full,
                    "informational": info}
