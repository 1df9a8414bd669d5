import math

import numpy as np
import pytest

from nextjump import kernels, propagator
from nextjump import trajectories as tr
from nextjump.model import SystemParams, figure2_params, figure4_params
from nextjump.propagator import AmplitudeState


def test_single_sample_hits_survival():
    p = figure2_params()
    out = tr.sample_waiting_time(AmplitudeState.reset(), p, 0.7)
    assert not out.censored
    assert propagator.survival(out.state) == pytest.approx(0.7, abs=1e-9)


def test_censored_sample():
    out = tr.sample_waiting_time(AmplitudeState.reset(), figure2_params(), 1e-6, max_time=10.0)
    assert out.censored and out.time is None


def test_rejects_unnormalized_start_and_bad_u():
    with pytest.raises(ValueError):
        tr.sample_waiting_time(AmplitudeState(0.5, 0, 0), figure2_params(), 0.5)
    with pytest.raises(ValueError):
        tr.sample_waiting_time(AmplitudeState.reset(), figure2_params(), 1.0)


def test_vectorized_matches_scalar():
    p = figure2_params()
    us = np.array([0.95, 0.5, 0.2])
    vec = tr.sample_waiting_times(p, us)
    for u, t in zip(us, vec):
        assert tr.sample_waiting_time(AmplitudeState.reset(), p, u).time == pytest.approx(t, rel=1e-12)


def test_sample_times_are_monotone_in_u():
    us = np.linspace(0.99, 0.05, 50)
    times = tr.sample_waiting_times(figure2_params(), us)
    assert np.all(np.diff(times) > 0)


def test_table_is_order_independent():
    p = figure2_params()
    us = np.random.default_rng(1).random(500)
    a = tr.SurvivalTable(p).first_passage(us)[0]
    tab = tr.SurvivalTable(p)
    b = np.concatenate([tab.first_passage(us[i : i + 50])[0] for i in range(0, 500, 50)])
    assert np.array_equal(a, b)


def test_channel_selection():
    p = SystemParams(0.1, 0.1, 1.0, 1.0)
    s = AmplitudeState(0.0, 0.6, 0.8)
    # bright rate 0.36, dark 0.64
    assert tr.select_channel(s, p, 0.35) is tr.Channel.BRIGHT
    assert tr.select_channel(s, p, 0.37) is tr.Channel.DARK
    with pytest.raises(ValueError):
        tr.select_channel(AmplitudeState(1, 0, 0), p, 0.5)


def test_no_drive_record_is_empty():
    rec = tr.simulate_record(SystemParams(0.0, 0.0, 1.0, 0.1), 100.0, seed=3)
    assert len(rec) == 0 and rec.open_interval == 100.0


def test_record_structure():
    p = figure2_params()
    rec = tr.simulate_record(p, 5000.0, seed=11, stream=0)
    assert np.all(np.diff(rec.times) > 0) and rec.times[-1] <= 5000.0
    assert rec.intervals().sum() == pytest.approx(rec.times[-1])
    # beta2 = 0: every jump is a bright photon
    assert rec.bright.all()
    assert rec.events[0][1] is tr.Channel.BRIGHT


def test_records_reproducible_and_thread_independent():
    p = figure4_params()
    h = 2e-4
    a = tr.simulate_records(p, h, 5, seed=5, workers=1)
    b = tr.simulate_records(p, h, 5, seed=5, workers=3)
    c = tr.simulate_records(p, h, 5, seed=6, workers=1)
    for x, y in zip(a, b):
        assert np.array_equal(x.times, y.times) and np.array_equal(x.bright, y.bright)
    assert not np.array_equal(a[0].times, c[0].times)


@pytest.mark.skipif(len(kernels.available_backends()) < 2, reason="compiled kernels not built")
def test_records_identical_across_backends():
    p = figure4_params()
    a = tr.simulate_record(p, 3e-4, seed=8, backend="python")
    b = tr.simulate_record(p, 3e-4, seed=8, backend="cython")
    assert np.array_equal(a.times, b.times)


def test_interval_mean_matches_survival_integral():
    # E[T] = integral of W(t) dt
    p = figure2_params()
    recs = tr.simulate_records(p, 2e5, 2, seed=21)
    iv, _, _ = tr.collect_intervals(recs)
    traj = propagator.reset_trajectory(p, 4000.0, stride=10)
    mean = np.trapezoid(traj.survival, traj.t) if hasattr(np, "trapezoid") else np.trapz(traj.survival, traj.t)
    se = iv.std() / math.sqrt(iv.size)
    assert abs(iv.mean() - mean) < 4 * se


def test_dark_stats_fields():
    p = figure4_params()
    recs = tr.simulate_records(p, 1e-3, 2, seed=4)
    st = tr.dark_stats(recs, p)
    assert st.counts.sum() == st.n_intervals
    assert st.bright_counts.sum() + st.dark_counts.sum() == st.n_intervals
    assert 0 < st.fraction_extralong < st.fraction_dark < 1
    assert st.se_extralong == pytest.approx(tr.standard_error(st.fraction_extralong, st.n_intervals))
    withc = tr.dark_stats(recs, p, include_censored=True)
    assert withc.n_intervals == st.n_intervals + 2


def test_dark_stats_empty():
    with pytest.raises(ValueError):
        tr.dark_stats([], figure2_params())


def test_log_bins():
    edges = tr.log_bins(np.array([2e-7, 3e-4]))
    assert edges[0] == pytest.approx(1e-7) and edges[-1] == pytest.approx(1e-3)
    assert len(edges) == 41


def test_default_t3_threshold_fig4():
    assert tr.default_t3_threshold(figure4_params()) == pytest.approx(1 / 9652.760195292478)
