"""Closed-form amplitudes for the weak-drive regimes, shelving diagnostics and
analytic dark-period probabilities.

All evaluators accept scalar or array times and return ``(c0, c1, c2)`` with
the sign conventions of the leading-order solutions. Times for the
overdamped forms are measured from the dark-period onset.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import propagator
from .model import RegimeTag, SystemParams, derive_rates, regime_of
from .spectral import RegimeWarning, overdamped_rates


class RegimeError(ValueError):
    """A closed form was requested where it does not exist."""


def _warn_unless(params: SystemParams, tag: RegimeTag) -> None:
    regime = regime_of(params)
    if regime.tag is not tag:
        warnings.warn(
            f"closed form for the {tag.value.lower()} regime used at margin {regime.margin:.3g} "
            f"({regime.tag.value})",
            RegimeWarning,
            stacklevel=3,
        )


def renormalization_factor(epsilon: float) -> float:
    """f = 1/sqrt(1 - 4 eps^2): the bright-channel emission probability during
    the fast transient is 4 eps^2, and surviving it rescales the amplitudes by f."""
    if 4.0 * epsilon * epsilon >= 1.0:
        raise RegimeError(f"f is undefined for 4*eps^2 >= 1 (eps = {epsilon:.4g})")
    return 1.0 / math.sqrt(1.0 - 4.0 * epsilon * epsilon)


def default_onset(params: SystemParams) -> float:
    """Dark-period onset t0' = 4/beta1."""
    return propagator.T0_PRIME_BETA1 / params.beta1


def underdamped_after_reset(t, params: SystemParams):
    _warn_unless(params, RegimeTag.UNDERDAMPED)
    r = derive_rates(params)
    t = np.asarray(t, dtype=np.float64)
    env = np.exp(-r.beta_ell * t)
    cos = np.cos(params.omega2 * t)
    c0 = cos * env
    c1 = 2.0 * r.epsilon * np.exp(-params.beta1 * t / 2.0) - 2.0 * r.epsilon * cos * env
    c2 = -np.sin(params.omega2 * t) * env
    return c0, c1, c2


def underdamped_dark(t, t0_prime: float, params: SystemParams):
    _warn_unless(params, RegimeTag.UNDERDAMPED)
    r = derive_rates(params)
    f = renormalization_factor(r.epsilon)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < t0_prime):
        raise ValueError("dark-period amplitudes need t >= t0_prime")
    env = f * np.exp(-r.beta_ell * (t - t0_prime))
    cos = np.cos(params.omega2 * t)
    return cos * env, -2.0 * r.epsilon * cos * env, -np.sin(params.omega2 * t) * env


def _overdamped_checks(params: SystemParams):
    _warn_unless(params, RegimeTag.OVERDAMPED)
    r = derive_rates(params)
    if r.alpha >= 1:
        raise RegimeError(f"overdamped dark-period form needs alpha < 1, got {r.alpha:.4g}")
    if params.beta2 >= params.beta1 * r.eta**2:
        warnings.warn("beta2 is not small compared with beta1*eta^2", RegimeWarning, stacklevel=3)
    _, lam2, lam3 = overdamped_rates(params)
    return r, lam2, lam3


def overdamped_dark(t, params: SystemParams):
    """Dark-period amplitudes; ``t`` counts from the onset, where c2 = 0."""
    r, lam2, lam3 = _overdamped_checks(params)
    t = np.asarray(t, dtype=np.float64)
    e2 = np.exp(lam2 * t)
    e3 = np.exp(lam3 * t)
    eps, eta = r.epsilon, r.eta
    c0 = e2 - r.alpha * e3
    c1 = -2.0 * eps * e2 + eta * eta / (2.0 * eps) * e3
    c2 = eta / (2.0 * eps) * (e2 - e3)
    return c0, c1, c2


def overdamped_extralong(t, params: SystemParams):
    """Unnormalized extra-long-dark direction (-eta/2eps, eta, -1) * exp(lambda3 t)."""
    r, _, lam3 = _overdamped_checks(params)
    e3 = np.exp(lam3 * np.asarray(t, dtype=np.float64))
    return -r.eta / (2.0 * r.epsilon) * e3, r.eta * e3, -e3


def relative_occupation(c0, c2):
    """Z = (c2^2 - c0^2) / (c2^2 + c0^2)."""
    c0 = np.asarray(c0, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    den = c2 * c2 + c0 * c0
    if np.any(den == 0):
        raise ValueError("Z is undefined where c0 = c2 = 0")
    z = (c2 * c2 - c0 * c0) / den
    return float(z) if z.ndim == 0 else z


def full_shelving_time(params: SystemParams) -> float:
    """Time after onset at which c0 of the overdamped form vanishes (Z = 1)."""
    r, lam2, lam3 = _overdamped_checks(params)
    if not 0 < r.alpha < 1:
        raise RegimeError("full shelving needs 0 < alpha < 1")
    # e^{lam2 t} = alpha e^{lam3 t}; |lam3| < |lam2|, so both factors are negative
    return math.log(r.alpha) / (lam2 - lam3)


def late_time_z(alpha: float) -> tuple[float, float]:
    """Late-time Z of the overdamped form, exact and to first order in alpha."""
    return (1.0 - alpha) / (1.0 + alpha), 1.0 - 2.0 * alpha


@dataclass(frozen=True)
class DarkPeriodPredictions:
    regime: RegimeTag
    t0_prime: float
    p_dark_after_reset: float
    p_dark_leading: float
    bright_emission_before_onset: float
    p_extralong: float
    t3: float
    p_end_from_level2_extralong: float
    p_end_from_level2_extralong_exact: float
    bright_share_underdamped: float


def dark_period_predictions(params: SystemParams, t0_prime: float | None = None) -> DarkPeriodPredictions:
    """Analytic dark-period probabilities.

    The survival to the onset is measured numerically rather than from the
    leading-order 1 - 4 eps^2, which is also returned.
    """
    r = derive_rates(params)
    t0 = default_onset(params) if t0_prime is None else t0_prime
    traj = propagator.reset_trajectory(params, t0)
    w0 = float(traj.survival[-1])
    rate1 = params.beta1 * traj.c[:, 1] ** 2
    bright = float(np.trapezoid(rate1, traj.t)) if hasattr(np, "trapezoid") else float(np.trapz(rate1, traj.t))
    eta2 = r.eta**2
    t3 = math.inf if eta2 == 0 else 2.0 / (eta2 * params.beta1)
    if eta2 == 0:
        p2_lead = math.inf if params.beta2 > 0 else 0.0
        p2_exact = 1.0 if params.beta2 > 0 else 0.0
    else:
        p2_lead = params.beta2 / (params.beta1 * eta2)
        p2_exact = params.beta2 / (params.beta2 + params.beta1 * eta2)
    g = 4.0 * params.beta1 * r.epsilon**2
    return DarkPeriodPredictions(
        regime=regime_of(params).tag,
        t0_prime=t0,
        p_dark_after_reset=w0,
        p_dark_leading=1.0 - 4.0 * r.epsilon**2,
        bright_emission_before_onset=bright,
        p_extralong=r.alpha,
        t3=t3,
        p_end_from_level2_extralong=p2_lead,
        p_end_from_level2_extralong_exact=p2_exact,
        bright_share_underdamped=g / (g + params.beta2),
    )


@dataclass(frozen=True)
class RegimeCurves:
    label: str
    t: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    @property
    def W(self) -> np.ndarray:
        return self.c0**2 + self.c1**2 + self.c2**2

    @property
    def Z(self) -> np.ndarray:
        return relative_occupation(self.c0, self.c2)

    def pbar10(self, epsilon: float) -> np.ndarray:
        return self.c1**2 / (4.0 * epsilon**2)

    @property
    def p20(self) -> np.ndarray:
        return self.c2**2


def regime_curves(params: SystemParams, t, form: str, t0_prime: float | None = None) -> RegimeCurves:
    t = np.asarray(t, dtype=np.float64)
    if form == "underdamped_after_reset":
        c = underdamped_after_reset(t, params)
    elif form == "underdamped_dark":
        c = underdamped_dark(t, default_onset(params) if t0_prime is None else t0_prime, params)
    elif form == "overdamped_dark":
        c = overdamped_dark(t, params)
    elif form == "overdamped_extralong":
        c = overdamped_extralong(t, params)
    else:
        raise ValueError(f"unknown closed form {form!r}")
    return RegimeCurves(form, t, *(np.asarray(x, dtype=np.float64) for x in c))
