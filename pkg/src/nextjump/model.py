"""Physical parameters, derived dimensionless groups and regime classification.

All rates are stored in angular units: Rabi frequencies in rad/s, decay
rates in 1/s. Drive phases are absorbed so both Rabi frequencies are real
and non-negative; detunings are zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

# Default thresholds on the margin omega2**2 / beta_ell**2.
R_LO = 0.25
R_HI = 4.0
# Above this epsilon, 4*eps**2 >= 1 and the weak-drive expansion is void.
EPS_MAX = 0.5


class UndefinedEtaError(ValueError):
    """Raised when eta = omega2/omega1 is requested with omega1 == 0."""


@dataclass(frozen=True)
class SystemParams:
    """Driven three-level atom.

    Attributes:
        omega1: Rabi frequency of the |0>-|1> (bright) drive, rad/s.
        omega2: Rabi frequency of the |0>-|2> (dark) drive, rad/s.
        beta1: spontaneous decay rate of |1>, 1/s.
        beta2: spontaneous decay rate of |2>, 1/s.
    """

    omega1: float
    omega2: float
    beta1: float
    beta2: float = 0.0

    def __post_init__(self):
        for name in ("omega1", "omega2", "beta1", "beta2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.beta1 <= 0:
            raise ValueError(f"beta1 must be > 0, got {self.beta1!r}")
        for name in ("omega1", "omega2", "beta2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    @classmethod
    def from_hertz(cls, omega1_hz: float, omega2_hz: float, beta1: float, beta2: float = 0.0) -> SystemParams:
        """Build from drive frequencies quoted as Omega/2pi in Hz.

        Decay rates are taken as direct 1/s values, which is the convention
        that makes 1 MHz / 48 MHz give epsilon = 0.13.
        """
        return cls(TWO_PI * omega1_hz, TWO_PI * omega2_hz, beta1, beta2)

    @property
    def tau1(self) -> float:
        return 1.0 / self.beta1

    @property
    def tau2(self) -> float:
        return math.inf if self.beta2 == 0 else 1.0 / self.beta2

    def scaled(self, k: float) -> SystemParams:
        return SystemParams(k * self.omega1, k * self.omega2, k * self.beta1, k * self.beta2)


@dataclass(frozen=True)
class DerivedRates:
    epsilon: float
    eta: float
    alpha: float
    beta_ell: float


def slow_rate(params: SystemParams) -> float:
    """beta_ell = beta2/4 + beta1*eps**2; defined even when omega1 == 0."""
    eps = params.omega1 / params.beta1
    return params.beta2 / 4.0 + params.beta1 * eps * eps


def derive_rates(params: SystemParams) -> DerivedRates:
    if params.omega1 == 0:
        raise UndefinedEtaError("eta = omega2/omega1 is undefined for omega1 = 0")
    eps = params.omega1 / params.beta1
    eta = params.omega2 / params.omega1
    alpha = (eta / (2.0 * eps)) ** 2
    return DerivedRates(epsilon=eps, eta=eta, alpha=alpha, beta_ell=slow_rate(params))


class RegimeTag(str, enum.Enum):
    UNDERDAMPED = "Underdamped"
    OVERDAMPED = "Overdamped"
    CROSSOVER = "Crossover"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    margin: float


def classify_regime(
    rates: DerivedRates,
    params: SystemParams,
    r_lo: float = R_LO,
    r_hi: float = R_HI,
    eps_max: float = EPS_MAX,
) -> Regime:
    """Classify by the margin omega2**2 / beta_ell**2.

    A bright drive with ``epsilon >= eps_max`` is tagged Crossover whatever
    the margin, since neither asymptotic family applies there.
    """
    if not r_lo < 1.0 < r_hi:
        raise ValueError("thresholds must satisfy r_lo < 1 < r_hi")
    bl = rates.beta_ell
    if bl == 0:
        if params.omega2 > 0:
            return Regime(RegimeTag.UNDERDAMPED, math.inf)
        raise ValueError("beta_ell = 0 and omega2 = 0: margin undefined")
    margin = params.omega2**2 / bl**2
    if rates.epsilon >= eps_max:
        tag = RegimeTag.CROSSOVER
    elif margin > r_hi:
        tag = RegimeTag.UNDERDAMPED
    elif margin < r_lo:
        tag = RegimeTag.OVERDAMPED
    else:
        tag = RegimeTag.CROSSOVER
    return Regime(tag, margin)


def regime_of(params: SystemParams, **thresholds) -> Regime:
    return classify_regime(derive_rates(params), params, **thresholds)


# Parameter sets of the four figures.
def figure2_params(beta1: float = 1.0) -> SystemParams:
    return SystemParams(omega1=beta1 / 24.0, omega2=beta1 / 48.0, beta1=beta1, beta2=0.0)


def figure4_params() -> SystemParams:
    return SystemParams.from_hertz(1.0e6, 2.0e4, 4.8e7, 0.0)


def figure5_params() -> SystemParams:
    return SystemParams(omega1=1.0e6, omega2=0.2e6, beta1=1.0e6, beta2=0.0)


def figure3_params(alpha: float = 0.1, epsilon: float = 0.05, beta1: float = 1.0) -> SystemParams:
    """Any (epsilon, eta) with (eta/2eps)**2 = alpha; the curves depend on alpha only."""
    eta = 2.0 * epsilon * math.sqrt(alpha)
    omega1 = epsilon * beta1
    return SystemParams(omega1=omega1, omega2=eta * omega1, beta1=beta1, beta2=0.0)
