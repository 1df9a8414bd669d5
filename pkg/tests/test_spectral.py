import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nextjump import spectral as sp
from nextjump.model import SystemParams, figure2_params, figure4_params, figure5_params
from nextjump.propagator import build_generator

# eigvals of the generator, frozen from numpy.linalg.eigvals
FIG2 = [
    complex(-0.0017452433718043378, 0.020833462035029903),
    complex(-0.0017452433718043378, -0.020833462035029903),
    complex(-0.49650951325639125, 0.0),
]
FIG4 = [-9652.760195292478, -1766705.7840478644, -22223641.455756843]
FIG5 = [
    complex(-19404.774872486418, 0.0),
    complex(-240297.6125637567, 986372.7567445112),
    complex(-240297.6125637567, -986372.7567445112),
]


@pytest.mark.parametrize(
    "params,ref", [(figure2_params(), FIG2), (figure4_params(), FIG4), (figure5_params(), FIG5)]
)
def test_exact_roots_frozen(params, ref):
    roots = sp.exact_eigenvalues(params).lambdas
    for z, r in zip(roots, ref):
        assert abs(z - r) <= 1e-10 * abs(r)


def test_sorting_and_conjugates():
    t = sp.exact_eigenvalues(figure2_params())
    assert t.slowest.imag > 0 and t.lambdas[1] == t.slowest.conjugate()
    assert t.fastest.imag == 0
    assert t.kind is sp.EigenKind.EXACT


def test_cubic_coefficients_match_trace_and_det():
    p = SystemParams(0.3, 0.2, 1.5, 0.4)
    A = build_generator(p).matrix
    p2, p1, p0 = sp.characteristic_cubic(p)
    assert p2 == pytest.approx(-np.trace(A))
    assert p0 == pytest.approx(-np.linalg.det(A))
    assert np.allclose(np.poly(A)[1:], [p2, p1, p0])


def test_reduced_cubic_product():
    p = figure2_params()
    B, C = sp.reduced_cubic(p)
    roots = np.roots([1, B, C])
    exact = [z / p.beta1 for z in sp.exact_eigenvalues(p).lambdas[:2]]
    assert np.allclose(sorted(roots, key=lambda z: z.imag), sorted(exact, key=lambda z: z.imag), rtol=0.01)


def test_overdamped_triple_fig4():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        t = sp.asymptotic_overdamped(figure4_params())
    assert t.kind is sp.EigenKind.OVERDAMPED
    rep = sp.eigen_compare(figure4_params())
    assert rep.overdamped.max_relative_error < 0.0857


def test_underdamped_warns_outside_regime():
    with pytest.warns(sp.RegimeWarning):
        sp.asymptotic_underdamped(figure4_params())
    with pytest.warns(sp.RegimeWarning):
        sp.asymptotic_overdamped(figure2_params())


def test_named_roots():
    p = figure4_params()
    names = sp.named_overdamped_roots(sp.exact_eigenvalues(p), p)
    assert names["lambda1"].real == pytest.approx(FIG4[2])
    assert names["lambda2"].real == pytest.approx(FIG4[1])
    assert names["lambda3"].real == pytest.approx(FIG4[0])


def test_pairing_is_one_to_one():
    t = sp.exact_eigenvalues(figure2_params())
    pairs = sp.pair_eigenvalues(t, t)
    assert [a for a, _ in pairs] == [b for _, b in pairs]


def test_double_root_is_stable():
    # critically damped slow pair: omega2 = beta_ell exactly at eps -> 0 limit
    p = SystemParams(1e-3, 0.125, 1.0, 0.5)
    roots = sp.exact_eigenvalues(p).as_array()
    assert np.all(np.isfinite(roots))
    assert np.allclose(np.sort_complex(roots), np.sort_complex(np.linalg.eigvals(build_generator(p).matrix)), atol=1e-6)


rate = st.floats(1e-3, 10.0)


@settings(max_examples=60, deadline=None)
@given(rate, rate, st.floats(0.1, 100.0), st.floats(0.0, 10.0))
def test_root_identities(o1, o2, b1, b2):
    p = SystemParams(o1, o2, b1, b2)
    lam = sp.exact_eigenvalues(p).as_array()
    p2, p1, p0 = sp.characteristic_cubic(p)
    scale = max(abs(lam))
    assert abs(lam.sum() + p2) <= 1e-9 * scale
    assert abs(np.prod(lam) + p0) <= 1e-8 * max(abs(p0), scale**3 * 1e-6)
    assert np.all(lam.real < 0)


@settings(max_examples=40, deadline=None)
@given(rate, rate, st.floats(0.1, 10.0), st.floats(0.0, 1.0), st.floats(0.01, 100.0))
def test_roots_scale_with_rates(o1, o2, b1, b2, k):
    p = SystemParams(o1, o2, b1, b2)
    a = sp.exact_eigenvalues(p).as_array()
    b = sp.exact_eigenvalues(p.scaled(k)).as_array()
    assert np.allclose(b, k * a, rtol=1e-7, atol=1e-9 * k * max(abs(a)))
