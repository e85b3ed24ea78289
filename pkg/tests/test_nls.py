import math

import numpy as np
import pytest

from nlscrit import nls
from nlscrit.hodograph import potentials as pot
from nlscrit.hodograph.initial_data import reconstruct_initial_data


@pytest.fixture(scope="module")
def sy_curve():
    return reconstruct_initial_data(pot.satsuma_yajima())


def _max_diff(a, b):
    return float(np.max(np.abs(a.psi - b.psi)))


def test_plane_wave_evolves_with_exact_phase():
    A, k, eps = 0.8, 0.3, 0.1
    wf = nls.plane_wave(A, k, eps, N=256)
    for order in (2, 4):
        out = nls.evolve(wf, nls.EvolutionConfig(dt=1e-3, t_end=0.5, order=order)).field
        ref = nls.plane_wave(A, k, eps, N=256, t=0.5)
        assert _max_diff(out, ref) < 1e-10


def test_plane_wave_rounds_wavenumber():
    with pytest.warns(UserWarning):
        wf = nls.plane_wave(1.0, 0.3333, 0.1, N=128)
    u, v = nls.to_madelung(wf)
    assert np.allclose(u, 1.0) and np.allclose(v, 0.33, atol=1e-12)


def test_to_madelung_plane_wave_and_real_field():
    u, v = nls.to_madelung(nls.plane_wave(0.5, -0.7, 0.05, N=512))
    assert np.max(np.abs(u - 0.25)) < 1e-14 and np.max(np.abs(v + 0.7)) < 1e-12
    x = -10 * math.pi + 20 * math.pi * np.arange(256) / 256
    u, v = nls.to_madelung(nls.WaveField(0.1, 1 / np.cosh(x) + 0j))
    assert np.nanmax(np.abs(v)) < 1e-12
    with pytest.raises(ValueError):
        nls.to_madelung(nls.WaveField(0.1, np.zeros(64, complex)))


def test_constant_data_gives_constant_field():
    const = lambda x: (np.full_like(x, 0.49), np.zeros_like(x), np.zeros_like(x))
    wf = nls.from_madelung(const, 0.1, N=64)
    assert np.allclose(wf.psi, 0.7, atol=0, rtol=1e-15)


def test_initial_tail_below_filter(sy_curve):
    wf = nls.from_madelung(sy_curve, 0.1, N=2 ** 13)
    assert nls.fourier_tail(wf.psi) < 1e-13


def test_under_resolution_is_reported():
    curve = reconstruct_initial_data(pot.symmetric_mu(1.0, 2.0))
    with pytest.raises(nls.UnderResolved):
        nls.from_madelung(curve, 0.05, N=2 ** 9)


def test_madelung_round_trip(sy_curve):
    curve = reconstruct_initial_data(pot.symmetric_mu(1.0, 2.0))
    wf = nls.from_madelung(curve, 0.1, N=2 ** 13)
    u, v = nls.to_madelung(wf)
    x = wf.x
    m = np.abs(x) < 5
    assert np.max(np.abs(u[m] - 1 / np.cosh(x[m]) ** 2)) < 1e-9
    assert np.max(np.abs(v[m] + 2 * np.tanh(x[m]))) < 1e-8
    # zero velocity for Satsuma-Yajima
    u, v = nls.to_madelung(nls.from_madelung(sy_curve, 0.1, N=2 ** 13))
    assert np.nanmax(np.abs(v[m])) < 1e-8


def test_filter_idempotent():
    rng = np.random.default_rng(5)
    c = (rng.standard_normal(256) + 1j * rng.standard_normal(256)) * 10.0 ** rng.uniform(-16, 0, 256)
    once = nls.krasny_filter(c, 1e-13)
    assert np.array_equal(nls.krasny_filter(once, 1e-13), once)
    assert np.count_nonzero(once) < np.count_nonzero(c)
    assert np.array_equal(nls.krasny_filter(c, 0.0), c)


def test_config_validation():
    with pytest.raises(ValueError):
        nls.EvolutionConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        nls.EvolutionConfig(dt=1e-3, t_end=1.0, order=3)
    with pytest.raises(ValueError):
        nls.EvolutionConfig(dt=1e-3, t_end=1.0, filter_threshold=1e-18)
    assert nls.EvolutionConfig.for_epsilon(0.05, 1.0).dt == pytest.approx(1e-4)


def test_epsilon_floor(sy_curve):
    wf = nls.plane_wave(1.0, 0.0, 0.02, N=64)
    with pytest.raises(nls.EpsilonTooSmall):
        nls.evolve(wf, nls.EvolutionConfig(dt=1e-3, t_end=0.01))
    out = nls.evolve(wf, nls.EvolutionConfig(dt=1e-3, t_end=0.01, allow_small_epsilon=True))
    assert out.field.t == 0.01


def test_grid_validation():
    with pytest.raises(ValueError):
        nls.WaveField(0.1, np.ones(100, complex))
    with pytest.raises(ValueError):
        nls.WaveField(0.0, np.ones(64, complex))


def test_snapshots_hit_requested_times(sy_curve):
    wf = nls.from_madelung(sy_curve, 0.1, N=2 ** 11, check_tail=False)
    res = nls.evolve(wf, nls.EvolutionConfig(dt=3e-3, t_end=0.1), snap_times=[0.0123, 0.05])
    assert set(res.snapshots) == {0.0123, 0.05, 0.1}
    assert res.snapshots[0.0123].t == 0.0123
    assert res.trace[0, 0] == 0.0 and res.trace[-1, 0] == pytest.approx(0.1)


@pytest.mark.parametrize("order,factor", [(2, 3.5), (4, 12.0)])
def test_dt_halving_self_convergence(sy_curve, order, factor):
    wf = nls.from_madelung(sy_curve, 0.1, N=2 ** 11, check_tail=False)
    runs = [nls.evolve(wf, nls.EvolutionConfig(dt=dt, t_end=0.25, order=order,
                                               filter_threshold=0.0)).field
            for dt in (4e-3, 2e-3, 1e-3)]
    e1, e2 = _max_diff(runs[0], runs[1]), _max_diff(runs[1], runs[2])
    assert e1 / e2 > factor


@pytest.fixture(scope="module")
def sy_tc_run(sy_curve):
    wf = nls.from_madelung(sy_curve, 0.1, N=2 ** 13)
    return nls.evolve(wf, nls.EvolutionConfig.for_epsilon(0.1, 0.5), snap_times=[0.25])


def test_symmetry_preserved_through_breakup(sy_tc_run):
    for t, snap in sy_tc_run.snapshots.items():
        du, dv = nls.symmetry_defect(snap)
        assert du < 1e-9 and dv < 1e-9, t


def test_conservation_to_breakup(sy_tc_run):
    t, m, H = sy_tc_run.trace.T
    assert np.max(np.abs(m - m[0])) / m[0] <= 1e-10
    assert np.max(np.abs(H - H[0])) / abs(H[0]) <= 1e-8


def test_trace_and_snapshot_csv(sy_tc_run, tmp_path):
    p = tmp_path / "trace.csv"
    sy_tc_run.trace_to_csv(p)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == sy_tc_run.trace.shape
    q = tmp_path / "snap.csv"
    sy_tc_run.field.to_csv(q)
    rows = np.genfromtxt(q, delimiter=",", skip_header=1)
    assert rows.shape == (2 ** 13, 5)
    assert np.allclose(rows[:, 1] + 1j * rows[:, 2], sy_tc_run.field.psi, rtol=1e-15, atol=0)


def test_mass_drift_guard():
    # a filter at the 0.5 level wipes out a broadband field
    wf = nls.WaveField(0.1, np.exp(1j * np.linspace(0, 40, 64)))
    cfg = nls.EvolutionConfig(dt=1e-3, t_end=0.01, max_mass_drift=1e-6, filter_threshold=0.5)
    with pytest.raises(nls.AccuracyError):
        nls.evolve(wf, cfg)
