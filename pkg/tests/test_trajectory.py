import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from pilotwave import gaussian
from pilotwave.gaussian import GaussianParams
from pilotwave.grid import Grid
from pilotwave.propagate import box_eigenstate
from pilotwave.sources import GaussianSnapshot, GaussianSource, GridSnapshot, SnapshotSeries
from pilotwave.trajectory import (LEFT, NODE, OK, NodeError, TrajectoryIntegrator, equivariance,
                                  integrate, interpolate_velocity, run_ensemble, sample_born)


def analytic_path(x0, t, prm):
    """Bohmian path of the free packet: the offset from the centre scales with sigma(t)."""
    return prm.u_vec * t + np.asarray(x0) * gaussian.sigma_at(t, prm) / prm.sigma0


@settings(max_examples=15, deadline=None)
@given(x0=st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)),
       u=st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)),
       sigma0=st.floats(0.5, 2))
def test_rk4_paths_follow_the_scaling_solution(x0, u, sigma0):
    prm = GaussianParams(sigma0=sigma0, u=u)
    ens = integrate(GaussianSource(prm), np.array([x0]), 0.0, 2.0, 0.02)
    np.testing.assert_allclose(ens.positions[-1, 0], analytic_path(x0, 2.0, prm), atol=1e-7)


def test_rk4_is_fourth_order():
    prm = GaussianParams(sigma0=0.5, u=(0.0, 0.0, 0.0))
    x0 = np.array([[1.0, 0.0, 0.0]])
    exact = analytic_path(x0[0], 1.0, prm)
    errs = [np.abs(integrate(GaussianSource(prm), x0, 0.0, 1.0, dt).positions[-1, 0] - exact).max()
            for dt in (0.1, 0.05)]
    assert errs[0] / errs[1] > 12


def test_grid_snapshots_reproduce_the_analytic_path():
    prm = GaussianParams(u=(0.3,))
    g = Grid.cube(-20.0, 20.0, 512, 1)
    knots = np.arange(0.0, 1.0 + 1e-12, 0.05)
    series = SnapshotSeries([GridSnapshot(gaussian.sample(g, t, prm), t=t) for t in knots])
    x0 = np.array([[0.8], [-1.5]])
    ens = integrate(series, x0, 0.0, 1.0, 0.1)
    ref = np.array([analytic_path(x, 1.0, prm) for x in x0])
    np.testing.assert_allclose(ens.positions[-1], ref, atol=1e-8)


def test_born_samples_are_reproducible_and_count_independent():
    prm = GaussianParams()
    a = sample_born(prm, 50, seed=7)
    b = sample_born(prm, 80, seed=7)
    np.testing.assert_array_equal(a, b[:50])
    assert not np.allclose(a, sample_born(prm, 50, seed=8))


def test_born_samples_follow_the_density():
    prm = GaussianParams(sigma0=1.3, u=(0.0,))
    x = sample_born(prm, 4000, seed=1)[:, 0]
    assert stats.kstest(x, stats.norm(scale=1.3).cdf).statistic < 0.03


def test_grid_sampling_of_box_density():
    g = Grid.cube(0.0, 1.0, 64, 1, "dirichlet")
    snap = GridSnapshot(box_eigenstate(g, quantum_numbers=(1,)))
    x = sample_born(snap, 4000, seed=0)[:, 0]
    cdf = lambda q: q - np.sin(2 * np.pi * q) / (2 * np.pi)
    assert stats.kstest(x, cdf).statistic < 0.03
    snap2 = GridSnapshot(box_eigenstate(Grid.cube(0.0, 1.0, 24, 2, "dirichlet"),
                                        quantum_numbers=(1, 1)))
    y = sample_born(snap2, 1500, seed=0)
    assert stats.kstest(y[:, 1], cdf).statistic < 0.05


def test_small_ensemble_stays_born_distributed():
    src = GaussianSource(GaussianParams(u=(0.5, 0.0, 0.0)))
    ens, rep = run_ensemble(src, 2000, 1.0, 0.05, seed=3)
    assert rep.max_ks < 0.04
    assert ens.positions.shape == (21, 2000, 3)
    assert set(ens.status) == {OK}


class _Static:
    def __init__(self, snap):
        self.snap = snap

    def at(self, t):
        return self.snap


def test_particle_at_a_node_is_halted():
    g = Grid.cube(0.0, 1.0, 63, 1, "dirichlet")
    snap = GridSnapshot(box_eigenstate(g, quantum_numbers=(2,)))
    with pytest.raises(NodeError):
        interpolate_velocity(snap, np.array([0.5]))
    ens = integrate(_Static(snap), np.array([[0.5], [0.25]]), 0.0, 0.1, 0.05)
    assert ens.status == [NODE, OK]
    assert np.all(np.isnan(ens.positions[1:, 0]))
    assert ens.positions[-1, 1, 0] == pytest.approx(0.25)


def test_particle_leaving_the_grid_is_halted():
    prm = GaussianParams(u=(3.0,))
    g = Grid.cube(-6.0, 6.0, 256, 1)
    snaps = [GridSnapshot(gaussian.sample(g, t, prm).normalized(), t=t)
             for t in np.arange(0, 2.01, 0.05)]
    ens = integrate(SnapshotSeries(snaps), np.array([[5.0], [0.0]]), 0.0, 2.0, 0.1)
    assert ens.status[0] in (LEFT, NODE)
    assert np.isnan(ens.positions[-1, 0, 0]) and np.isfinite(ens.halted_at[0])


def test_integrator_rejects_bad_time_span():
    with pytest.raises(ValueError):
        integrate(GaussianSource(GaussianParams()), np.zeros((1, 3)), 0.0, 1.0, 0.3)


def test_equivariance_report_uses_finite_positions_only():
    prm = GaussianParams(u=(0.0,))
    pos = sample_born(prm, 500, 0)
    pos[0] = np.nan
    rep = equivariance(pos, GaussianSnapshot(prm, 0.0))
    assert rep.count == 499 and rep.max_ks < 0.07
