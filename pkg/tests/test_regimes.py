import math

import numpy as np
import pytest

from nextjump import regimes as rg
from nextjump.model import SystemParams, derive_rates, figure2_params, figure4_params
from nextjump.spectral import RegimeWarning


def test_renormalization_factor():
    assert rg.renormalization_factor(0.0) == 1.0
    assert rg.renormalization_factor(0.3) == pytest.approx(1 / math.sqrt(1 - 0.36))
    with pytest.raises(rg.RegimeError):
        rg.renormalization_factor(0.5)


def test_after_reset_initial_value():
    c = rg.underdamped_after_reset(0.0, figure2_params())
    assert np.allclose(np.array(c, dtype=float), [1.0, 0.0, 0.0])


def test_dark_form_rejects_early_times():
    with pytest.raises(ValueError):
        rg.underdamped_dark(np.array([1.0]), 4.0, figure2_params())


def test_underdamped_form_warns_in_overdamped_regime():
    with pytest.warns(RegimeWarning):
        rg.underdamped_after_reset(np.linspace(0, 1e-6, 3), figure4_params())


def test_overdamped_onset_values():
    p = figure4_params()
    r = derive_rates(p)
    c0, c1, c2 = rg.overdamped_dark(0.0, p)
    assert c2 == 0.0
    assert float(c0) == pytest.approx(1 - r.alpha)
    assert float(c1) == pytest.approx(-2 * r.epsilon + r.eta**2 / (2 * r.epsilon))


def test_overdamped_requires_small_alpha():
    p = SystemParams(0.1, 0.3, 1.0)  # alpha = 2.25
    with pytest.raises(rg.RegimeError):
        with pytest.warns(RegimeWarning):
            rg.overdamped_dark(0.0, p)


def test_full_shelving_zero_of_c0():
    p = figure4_params()
    t2 = rg.full_shelving_time(p)
    assert t2 > 0
    c0, _, c2 = rg.overdamped_dark(t2, p)
    assert abs(float(c0)) < 1e-12 * abs(float(c2))
    assert rg.relative_occupation(c0, c2) == pytest.approx(1.0, abs=1e-15)


def test_late_time_z():
    exact, lead = rg.late_time_z(0.1)
    assert exact == pytest.approx(0.9 / 1.1)
    assert lead == pytest.approx(0.8)
    assert exact - lead <= 2 * 0.1**2


def test_relative_occupation_bounds_and_undefined():
    assert rg.relative_occupation(1.0, 0.0) == -1.0
    assert rg.relative_occupation(0.0, 2.0) == 1.0
    with pytest.raises(ValueError):
        rg.relative_occupation(0.0, 0.0)


def test_extralong_direction():
    p = figure4_params()
    r = derive_rates(p)
    c = np.array(rg.overdamped_extralong(0.0, p), dtype=float)
    assert np.allclose(c, [-r.eta / (2 * r.epsilon), r.eta, -1.0])


def test_predictions_fig4():
    p = figure4_params()
    r = derive_rates(p)
    pred = rg.dark_period_predictions(p)
    assert pred.p_extralong == pytest.approx(r.alpha)
    assert pred.t3 == pytest.approx(2 / (r.eta**2 * p.beta1))
    assert pred.p_end_from_level2_extralong == 0.0
    # transient emission plus survival accounts for all probability
    assert pred.bright_emission_before_onset + pred.p_dark_after_reset == pytest.approx(1.0, abs=1e-6)


def test_predictions_channel_share():
    base = figure2_params()
    eps = derive_rates(base).epsilon
    p = SystemParams(base.omega1, base.omega2, 1.0, 4 * eps**2)
    assert rg.dark_period_predictions(p).bright_share_underdamped == pytest.approx(0.5)


def test_regime_curves_dispatch():
    p = figure2_params()
    t = np.linspace(4, 10, 5)
    cur = rg.regime_curves(p, t, "underdamped_dark")
    assert cur.W.shape == (5,)
    assert np.allclose(cur.pbar10(derive_rates(p).epsilon), cur.c1**2 / (4 * derive_rates(p).epsilon ** 2))
    with pytest.raises(ValueError):
        rg.regime_curves(p, t, "nonsense")
