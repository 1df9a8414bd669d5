"""Eigenvalues of the no-jump generator.

The exact spectrum comes from the characteristic cubic of the 3x3 generator.
Two leading-order asymptotic forms are provided alongside it: the
underdamped pair ``-beta_ell +/- i*sqrt(...)`` and the three well separated
real rates of the overdamped case.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import RegimeTag, SystemParams, derive_rates, regime_of, slow_rate


class RegimeWarning(UserWarning):
    """An asymptotic formula was evaluated outside its regime of validity."""


class EigenKind(str, enum.Enum):
    EXACT = "Exact"
    UNDERDAMPED = "AsymptoticUnderdamped"
    OVERDAMPED = "AsymptoticOverdamped"


def _sort_key(z: complex):
    return (-z.real, -z.imag)


@dataclass(frozen=True)
class EigenTriple:
    """Three eigenvalues (1/s), sorted by descending real part, then imaginary part."""

    lambdas: tuple[complex, complex, complex]
    kind: EigenKind

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(sorted((complex(z) for z in self.lambdas), key=_sort_key)))

    def __iter__(self):
        return iter(self.lambdas)

    @property
    def slowest(self) -> complex:
        return self.lambdas[0]

    @property
    def fastest(self) -> complex:
        return self.lambdas[-1]

    def as_array(self) -> np.ndarray:
        return np.array(self.lambdas)


def characteristic_cubic(params: SystemParams) -> tuple[float, float, float]:
    """Coefficients (p2, p1, p0) of det(lambda*I - A) = l^3 + p2 l^2 + p1 l + p0."""
    o1, o2, b1, b2 = params.omega1, params.omega2, params.beta1, params.beta2
    p2 = b1 / 2.0 + b2 / 2.0
    p1 = b1 * b2 / 4.0 + o1 * o1 + o2 * o2
    p0 = o1 * o1 * b2 / 2.0 + o2 * o2 * b1 / 2.0
    return p2, p1, p0


def reduced_cubic(params: SystemParams) -> tuple[float, float]:
    """(B, C) of the weak-drive factorization (x + 1/2)(x^2 + B x + C), x = lambda/beta1."""
    b1 = params.beta1
    eps = params.omega1 / b1
    B = 2.0 * slow_rate(params) / b1
    C = params.omega2**2 / b1**2 + 2.0 * eps * eps * params.beta2 / b1
    return B, C


def _cubic(coeffs, z):
    p2, p1, p0 = coeffs
    return ((z + p2) * z + p1) * z + p0


def _dcubic(coeffs, z):
    p2, p1, _ = coeffs
    return (3.0 * z + 2.0 * p2) * z + p1


def exact_eigenvalues(params: SystemParams) -> EigenTriple:
    """Roots of the exact cubic via the companion matrix, then one Newton polish each."""
    coeffs = characteristic_cubic(params)
    roots = np.roots([1.0, *coeffs]).astype(complex)
    polished = []
    for z in roots:
        d = _dcubic(coeffs, z)
        if d != 0:
            step = _cubic(coeffs, z) / d
            # a Newton step that does not reduce the residual (near a double root) is dropped
            if abs(_cubic(coeffs, z - step)) <= abs(_cubic(coeffs, z)):
                z = z - step
        polished.append(z)
    # real cubic: force exact conjugate symmetry
    scale = max(1.0, *(abs(z) for z in polished))
    fixed = []
    for z in polished:
        if abs(z.imag) <= 1e-13 * scale:
            z = complex(z.real, 0.0)
        fixed.append(z)
    complex_roots = [z for z in fixed if z.imag != 0.0]
    if len(complex_roots) == 2:
        a, b = complex_roots
        re = 0.5 * (a.real + b.real)
        im = 0.5 * (abs(a.imag) + abs(b.imag))
        fixed = [z for z in fixed if z.imag == 0.0] + [complex(re, im), complex(re, -im)]
    elif complex_roots:
        fixed = [complex(z.real, 0.0) for z in fixed]
    return EigenTriple(tuple(fixed), EigenKind.EXACT)


def _warn_regime(params: SystemParams, expected: RegimeTag) -> None:
    if params.omega1 == 0:
        return
    regime = regime_of(params)
    if regime.tag is not expected:
        warnings.warn(
            f"parameters classify as {regime.tag.value} (margin {regime.margin:.3g}), "
            f"not {expected.value}",
            RegimeWarning,
            stacklevel=3,
        )


def asymptotic_underdamped(params: SystemParams) -> EigenTriple:
    """{-beta1/2, -beta_ell +/- sqrt(beta_ell^2 - omega2^2 - 2 eps^2 beta1 beta2)}."""
    _warn_regime(params, RegimeTag.UNDERDAMPED)
    b1 = params.beta1
    eps = params.omega1 / b1
    bl = slow_rate(params)
    disc = bl * bl - (params.omega2**2 + 2.0 * eps * eps * b1 * params.beta2)
    if disc >= 0:
        root = complex(math.sqrt(disc), 0.0)
    else:
        root = complex(0.0, math.sqrt(-disc))
    return EigenTriple((complex(-b1 / 2.0), -bl + root, -bl - root), EigenKind.UNDERDAMPED)


def _eta_squared(params: SystemParams) -> float:
    if params.omega2 == 0:
        return 0.0
    return derive_rates(params).eta ** 2


def asymptotic_overdamped(params: SystemParams) -> EigenTriple:
    """{-beta1/2, -2 beta_ell, -eta^2 beta1/2}."""
    _warn_regime(params, RegimeTag.OVERDAMPED)
    if params.omega1 > 0 and params.omega2 > 0:
        rates = derive_rates(params)
        if rates.alpha >= 1:
            warnings.warn(f"alpha = {rates.alpha:.3g} is not small", RegimeWarning, stacklevel=2)
        if params.beta2 >= params.beta1 * rates.eta**2:
            warnings.warn("beta2 is not small compared with beta1*eta^2", RegimeWarning, stacklevel=2)
    return EigenTriple(overdamped_rates(params), EigenKind.OVERDAMPED)


def overdamped_rates(params: SystemParams) -> tuple[float, float, float]:
    """(lambda1, lambda2, lambda3) of the overdamped asymptotics, without warnings."""
    b1 = params.beta1
    return (-b1 / 2.0, -2.0 * slow_rate(params), -_eta_squared(params) * b1 / 2.0)


@dataclass(frozen=True)
class EigenComparison:
    exact: EigenTriple
    asymptotic: EigenTriple
    pairs: tuple[tuple[complex, complex], ...]
    relative_errors: tuple[float, ...]

    @property
    def max_relative_error(self) -> float:
        return max(self.relative_errors)


@dataclass(frozen=True)
class EigenReport:
    exact: EigenTriple
    underdamped: EigenComparison
    overdamped: EigenComparison


def _relative_error(exact: complex, approx: complex) -> float:
    diff = abs(exact - approx)
    if diff == 0:
        return 0.0
    if exact == 0:
        return diff
    return diff / abs(exact)


def pair_eigenvalues(exact: EigenTriple, approx: EigenTriple) -> list[tuple[complex, complex]]:
    """Greedy nearest-neighbour pairing; ties go to the larger real part."""
    candidates = sorted(
        (
            (abs(e - a), -e.real, i, j)
            for i, e in enumerate(exact.lambdas)
            for j, a in enumerate(approx.lambdas)
        )
    )
    used_e, used_a, pairs = set(), set(), {}
    for _, _, i, j in candidates:
        if i in used_e or j in used_a:
            continue
        used_e.add(i)
        used_a.add(j)
        pairs[i] = (exact.lambdas[i], approx.lambdas[j])
    return [pairs[i] for i in range(3)]


def compare(exact: EigenTriple, approx: EigenTriple) -> EigenComparison:
    pairs = pair_eigenvalues(exact, approx)
    errs = tuple(_relative_error(e, a) for e, a in pairs)
    return EigenComparison(exact, approx, tuple(pairs), errs)


def eigen_compare(params: SystemParams) -> EigenReport:
    exact = exact_eigenvalues(params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        under = asymptotic_underdamped(params)
        over = asymptotic_overdamped(params)
    return EigenReport(exact, compare(exact, under), compare(exact, over))


def named_overdamped_roots(triple: EigenTriple, params: SystemParams) -> dict[str, complex]:
    """Label an exact triple as lambda1/lambda2/lambda3 by matching the overdamped rates.

    lambda2 is the O(eps^2 beta1) root and lambda3 the O(eta^2 beta1) one,
    whatever their numerical order.
    """
    ref = EigenTriple(overdamped_rates(params), EigenKind.OVERDAMPED)
    pairs = pair_eigenvalues(triple, ref)
    r1, r2, r3 = overdamped_rates(params)
    names = {}
    for e, a in pairs:
        if a == r1 and "lambda1" not in names:
            names["lambda1"] = e
        elif a == r2 and "lambda2" not in names:
            names["lambda2"] = e
        else:
            names["lambda3"] = e
    return names
