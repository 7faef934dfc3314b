import numpy as np
import pytest

from pilotwave.gaussian import GaussianParams
from pilotwave.propagate import box_energy
from pilotwave.scenarios import (BoundaryReachedError, BoxReleaseConfig, gaussian_surrogate_release,
                                 moving_average, rise_time, run_box_release, run_free_gaussian)


@pytest.mark.parametrize("u,H", [((0, 0, 0), 0.375), ((1, 0, 0), 0.875)])
def test_free_gaussian_report(u, H):
    rep = run_free_gaussian(GaussianParams(u=u), t_end=1.0, dt=1e-2, n=128)
    assert rep.passed, rep.comparisons
    assert rep.summary["H_analytic_track"] == pytest.approx(H, rel=1e-9)
    assert len(rep.ledger) == 101


def test_free_gaussian_ensemble_option():
    rep = run_free_gaussian(GaussianParams(), t_end=0.5, dt=0.05, n=64, ensemble=500, seed=2)
    assert rep.summary["ks_max"] < 0.07


@pytest.fixture(scope="module")
def release_1d():
    return run_box_release(BoxReleaseConfig(dim=1, n=32, t_end=0.5, dt=2e-3, ensemble=128))


def test_release_starts_from_rest_at_the_box_value(release_1d):
    s = release_1d.summary
    assert s["pre_release_max_speed"] == 0.0
    assert s["Q_stationary"] == pytest.approx(np.pi**2 / 2, rel=1e-3)
    assert s["T_initial"] == pytest.approx(0.0, abs=1e-10)


def test_release_conserves_H(release_1d):
    assert release_1d.summary["H_relative_drift"] < 1e-10


def test_released_kinetic_energy_is_bounded_by_released_energy(release_1d):
    s = release_1d.summary
    assert 0 < s["delta_KE_field_average"] <= s["released_energy"] * (1 + 1e-9)
    assert s["T_field_average_monotonic"]


def test_release_ledgers_have_one_row_per_step(release_1d):
    assert len(release_1d.ledger) == 251
    assert len(release_1d.extra_ledgers["particle"]) == 251
    t = release_1d.ledger.column("t")
    np.testing.assert_allclose(np.diff(t), 2e-3)


def test_release_is_deterministic():
    cfg = BoxReleaseConfig(dim=1, n=16, t_end=0.1, ensemble=16, seed=4)
    a, b = run_box_release(cfg), run_box_release(cfg)
    np.testing.assert_array_equal(a.ledger.column("T"), b.ledger.column("T"))
    np.testing.assert_array_equal(a.series["positions"], b.series["positions"])


def test_separable_and_full_modes_agree():
    kw = dict(dim=3, n=32, enlargement=4.0, t_end=0.1, ensemble=24)
    sep = run_box_release(BoxReleaseConfig(mode="separable", **kw))
    full = run_box_release(BoxReleaseConfig(mode="full", **kw))
    np.testing.assert_allclose(sep.series["positions"], full.series["positions"], atol=1e-10)
    np.testing.assert_allclose(sep.ledger.column("H"), full.ledger.column("H"), rtol=1e-10)
    np.testing.assert_allclose(sep.ledger.column("T"), full.ledger.column("T"),
                               rtol=1e-8, atol=1e-10)


def test_wavefront_at_the_far_wall_aborts():
    with pytest.raises(BoundaryReachedError):
        run_box_release(BoxReleaseConfig(dim=1, n=32, enlargement=4.0, t_end=1.0, ensemble=8))


def test_rise_time_is_resolution_independent():
    kw = dict(dim=1, t_end=1.0, ensemble=8)
    t32 = run_box_release(BoxReleaseConfig(n=32, **kw)).summary["rise_time_90"]
    t64 = run_box_release(BoxReleaseConfig(n=64, **kw)).summary["rise_time_90"]
    assert t32 > 0 and t64 > 0
    assert max(t32, t64) / min(t32, t64) < 1.1


def test_fixed_particle_mode():
    rep = run_box_release(BoxReleaseConfig(dim=2, n=16, t_end=0.05, particle=(0.5, 0.5)))
    assert rep.summary["particles"] == 1
    assert rep.series["positions"].shape == (26, 1, 2)


@pytest.mark.parametrize("kw", [dict(L=0), dict(enlargement=1.5), dict(dim=4), dict(n=4),
                                dict(mode="other"), dict(ensemble=0), dict(t_end=0.1, dt=0.03),
                                dict(particle=(2.0, 0.5, 0.5)), dict(particle=(0.5,))])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        BoxReleaseConfig(**kw)


def test_config_geometry():
    cfg = BoxReleaseConfig(n=63, enlargement=4)
    assert cfg.released_points == 255 and cfg.released_length == pytest.approx(4.0)
    cfg = BoxReleaseConfig(nx=95, n=64, enlargement=4)
    assert cfg.box_cells_x == 24 and cfg.released_length == pytest.approx(4.0)


def test_gaussian_surrogate_numbers():
    s = gaussian_surrogate_release().summary
    assert s["Q_stationary"] == pytest.approx(box_energy((1, 1, 1), (1, 1, 1)))
    assert s["Q0_formula"] == pytest.approx(1.0)
    assert s["delta_KE_reference_Q0"] == pytest.approx(14.554, abs=1e-3)
    assert s["delta_KE_reference_Q0"] < 15


def test_moving_average_and_rise_time():
    y = np.arange(10.0)
    np.testing.assert_allclose(moving_average(y), np.arange(2.0, 8.0))
    t = np.linspace(0, 1, 101)
    y = 1 - np.exp(-t / 0.1)
    assert rise_time(t, y, 1.0) == pytest.approx(0.1 * np.log(10), abs=1e-3)
    assert np.isnan(rise_time(t, y, 5.0))
