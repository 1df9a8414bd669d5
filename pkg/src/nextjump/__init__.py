"""Statistics of the next quantum jump of a weakly driven three-level atom."""

from .kernels import BACKEND
from .model import DerivedRates, Regime, RegimeTag, SystemParams, classify_regime, derive_rates
from .propagator import AmplitudeState, build_generator, condition_on_no_jump, evolve, survival

__all__ = [
    "BACKEND",
    "AmplitudeState",
    "DerivedRates",
    "Regime",
    "RegimeTag",
    "SystemParams",
    "build_generator",
    "classify_regime",
    "condition_on_no_jump",
    "derive_rates",
    "evolve",
    "survival",
]

__version__ = "0.1.0"
