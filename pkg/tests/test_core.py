import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pilotwave import gaussian
from pilotwave.core import (energy, gradient_energy, hamiltonian_density, polar_decompose,
                            quantum_force, quantum_potential, scale_amplitude, total_energy)
from pilotwave.gaussian import GaussianParams
from pilotwave.grid import ComplexField, Grid, PhysicalParams, ScalarField, derivative
from pilotwave.propagate import box_eigenstate, box_energy
from pilotwave.validation import amplitude_invariance


def _plane_packet(k=2.0, n=128):
    g = Grid.cube(-12.0, 12.0, n, 1)
    prm = GaussianParams(u=(k,))
    return g, gaussian.sample(g, 0.0, prm)


def test_velocity_of_moving_packet_at_t0_is_group_velocity():
    g, psi = _plane_packet()
    v = polar_decompose(psi).velocity[0]
    central = np.abs(g.axis(0)) < 4
    np.testing.assert_allclose(v[central], 2.0, atol=1e-10)


def test_velocity_does_not_need_phase_unwrapping():
    # large k makes the raw phase wrap many times across the packet
    g, psi = _plane_packet(k=15.0, n=512)
    v = polar_decompose(psi).velocity[0]
    assert np.max(np.abs(v[np.abs(g.axis(0)) < 4] - 15.0)) < 1e-8


def test_Q_of_sampled_packet_matches_closed_form():
    prm = GaussianParams(sigma0=1.0, u=(0.5, 0.0))
    g = Grid.cube(-10.0, 10.0, 96, 2)
    psi = gaussian.sample(g, 0.7, prm)
    q = quantum_potential(polar_decompose(psi)).values
    X, Y = g.mesh(sparse=False)
    ref = gaussian.quantum_potential_at(np.stack([X, Y], axis=-1), 0.7, prm)
    inner = (X**2 + Y**2) < 9
    np.testing.assert_allclose(q[inner], ref[inner], atol=1e-9)


def test_box_ground_state_Q_is_uniform():
    g = Grid.cube(0.0, 1.0, 48, 2, "dirichlet")
    q = quantum_potential(polar_decompose(box_eigenstate(g, quantum_numbers=(1, 1)))).values
    np.testing.assert_allclose(q[3:-3, 3:-3], np.pi**2, rtol=1e-4)


def test_nodes_are_masked():
    g = Grid.cube(0.0, 1.0, 31, 1, "dirichlet")
    psi = box_eigenstate(g, quantum_numbers=(2,))
    polar = polar_decompose(psi)
    assert polar.node_mask[15]
    q = quantum_potential(polar).values
    assert np.isnan(q[15]) and np.isfinite(q[5])
    f = quantum_force(quantum_potential(polar)).values[0]
    assert np.all(np.isnan(f[13:18])) and np.isfinite(f[5])


def test_unnormalized_input_is_rejected():
    g = Grid.cube(0.0, 1.0, 16, 1, "dirichlet")
    with pytest.raises(ValueError, match="normalized"):
        polar_decompose(ComplexField(g, 2 * box_eigenstate(g, quantum_numbers=(1,)).values))
    with pytest.raises(ValueError):
        polar_decompose(ComplexField(g, np.zeros(16, complex)))


@settings(max_examples=25, deadline=None)
@given(c=st.floats(1e-3, 1e4))
def test_Q_ignores_constant_amplitude_scale(c):
    g = Grid.cube(-8.0, 8.0, 64, 1)
    psi = gaussian.sample(g, 0.3, GaussianParams(u=(0.7,)))
    assert amplitude_invariance(psi, PhysicalParams(), (c,)) <= 1e-12


def test_scale_amplitude_requires_positive_factor():
    g = Grid.cube(-8.0, 8.0, 32, 1)
    polar = polar_decompose(gaussian.sample(g, 0.0, GaussianParams(u=(0.0,))))
    with pytest.raises(ValueError):
        scale_amplitude(polar, 0.0)


def test_energy_density_equals_gradient_form():
    prm = GaussianParams(u=(0.8, -0.3))
    g = Grid.cube(-12.0, 12.0, 96, 2)
    psi = gaussian.sample(g, 0.4, prm)
    dens = hamiltonian_density(polar_decompose(psi)).values
    grads = [derivative(psi.values, g, i, 1) for i in range(2)]
    ref = 0.5 * sum(np.abs(d) ** 2 for d in grads)
    np.testing.assert_allclose(dens, ref, atol=1e-12)
    assert total_energy(ScalarField(g, dens)) == pytest.approx(gaussian.total_H(prm), rel=1e-9)


def test_parseval_energy_matches_density_quadrature_on_periodic_grid():
    prm = GaussianParams(u=(0.5,))
    g = Grid.cube(-14.0, 14.0, 256, 1)
    psi = gaussian.sample(g, 0.0, prm)
    assert gradient_energy(psi) == pytest.approx(energy(psi), rel=1e-10)


def test_parseval_energy_is_exact_for_box_modes():
    g = Grid.cube(0.0, 1.0, 24, 3, "dirichlet")
    psi = box_eigenstate(g, quantum_numbers=(1, 2, 1))
    expected = box_energy((1, 1, 1), (1, 2, 1))
    # sine modes sampled on the grid: the discrete transform has a single nonzero coefficient
    assert gradient_energy(psi) == pytest.approx(expected, rel=1e-12)


def test_energy_warns_when_density_reaches_the_boundary():
    g = Grid.cube(-3.0, 3.0, 64, 1)
    psi = gaussian.sample(g, 0.0, GaussianParams(sigma0=1.5, u=(0.0,))).normalized()
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        energy(psi)
    assert any("boundary" in str(w.message) for w in rec)


def test_external_potential_adds_to_force():
    g = Grid.cube(-8.0, 8.0, 64, 1)
    q = quantum_potential(polar_decompose(gaussian.sample(g, 0.0, GaussianParams(u=(0.0,)))))
    x = g.axis(0)
    k = 2 * np.pi / 16
    v = ScalarField(g, np.cos(k * x))
    f0 = quantum_force(q).values[0]
    f1 = quantum_force(q, v).values[0]
    ok = np.isfinite(f0)
    assert ok.sum() > 40
    np.testing.assert_allclose((f1 - f0)[ok], k * np.sin(k * x[ok]), atol=1e-4)


def test_potential_term_only_with_explicit_flag():
    g = Grid.cube(-8.0, 8.0, 64, 1)
    psi = gaussian.sample(g, 0.0, GaussianParams(u=(0.0,)))
    V = np.full(g.shape, 2.0)
    p = PhysicalParams(potential=V)
    polar = polar_decompose(psi, p)
    plain = hamiltonian_density(polar, p).values
    with_v = hamiltonian_density(polar, p, include_potential=True).values
    np.testing.assert_allclose(with_v - plain, 2.0 * np.abs(psi.values) ** 2, atol=1e-15)
    with pytest.raises(ValueError):
        hamiltonian_density(polar, PhysicalParams(), include_potential=True)
