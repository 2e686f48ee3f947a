from __future__ import annotations

import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from twistzero.errors import GammaOverflowError, PoleError
from twistzero.specfun import (complex_gamma, g0_modulus_asymptotic, g_delta, log_g_delta,
                               log_gamma, regularized_upper_gamma, upper_incomplete_gamma)

finite_s = st.complex_numbers(min_magnitude=0.05, max_magnitude=60, allow_nan=False,
                              allow_infinity=False).filter(lambda s: abs(s.imag) > 1e-3 or s.real > 0.05)


def test_log_gamma_matches_frozen_mpmath(oracles):
    for a, b, re, im in oracles["loggamma"]:
        ref = complex(re, im)
        assert abs(log_gamma(complex(a, b)) - ref) <= 1e-13 * max(1.0, abs(ref))


def test_gamma_known_values():
    assert complex_gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert complex_gamma(5) == pytest.approx(24.0, rel=1e-14)
    assert complex_gamma(1j) == pytest.approx(complex(mp.gamma(1j)), rel=1e-13)


def test_gamma_pole_and_overflow():
    for n in (0, -1, -7):
        with pytest.raises(PoleError):
            complex_gamma(n)
    with pytest.raises(PoleError):
        log_gamma(-3)
    with pytest.raises(GammaOverflowError):
        complex_gamma(200.0)


@settings(max_examples=200, deadline=None)
@given(finite_s)
def test_recurrence(s):
    lhs = log_gamma(s + 1) - log_gamma(s)
    assert cmath.exp(lhs) == pytest.approx(s, rel=1e-11)


@settings(max_examples=200, deadline=None)
@given(st.floats(-30, 30).filter(lambda x: abs(x - round(x)) > 1e-3), st.floats(-30, 30))
def test_reflection(x, y):
    s = complex(x, y)
    lhs = log_gamma(s) + log_gamma(1 - s)
    rhs = cmath.log(math.pi / cmath.sin(math.pi * s))
    diff = (lhs - rhs) / (2j * math.pi)
    # equal up to a branch multiple of 2 pi i
    assert abs(diff.imag) < 1e-10 and abs(diff.real - round(diff.real)) < 1e-10


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0, 17.0, 60.0, 200.0])
def test_half_line_modulus(t):
    lg = log_gamma(complex(0.5, t))
    val = math.exp(2 * lg.real + math.log(math.cosh(math.pi * t)) - math.log(math.pi))
    assert val == pytest.approx(1.0, abs=1e-10)


def test_conjugate_symmetry():
    for s in (complex(2.3, 4.1), complex(-1.5, 0.7), complex(0.5, 80)):
        assert log_gamma(s.conjugate()) == pytest.approx(log_gamma(s).conjugate(), rel=1e-14)


def test_incomplete_gamma_matches_frozen_mpmath(oracles):
    for a, b, x, re, im in oracles["gammainc"]:
        ref = complex(re, im)
        assert abs(upper_incomplete_gamma(complex(a, b), x) - ref) <= 1e-12 * abs(ref)


def _gamma_quad(s, x):
    # int_x^inf t^(s-1) e^-t dt, real and imaginary parts by quadrature
    f = lambda t, part: part(cmath.exp((s - 1) * math.log(t) - t))  # noqa: E731
    re = quad(f, x, np.inf, args=(lambda z: z.real,), limit=400, epsabs=0, epsrel=1e-13)[0]
    im = quad(f, x, np.inf, args=(lambda z: z.imag,), limit=400, epsabs=0, epsrel=1e-13)[0]
    return complex(re, im)


@pytest.mark.parametrize("s,x", [(2.5 + 1j, 0.5), (2.5 + 1j, 4.0), (6 + 3j, 2.0), (6 + 3j, 9.0),
                                 (0.7 - 2j, 1.1), (4.0, 4.9), (4.0, 5.1), (3 + 8j, 12.0)])
def test_incomplete_gamma_branches_agree_with_quadrature(s, x):
    # the two sides of x = |s| + 1 use different algorithms
    ref = _gamma_quad(s, x)
    assert abs(upper_incomplete_gamma(s, x) - ref) <= 1e-9 * abs(ref)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 30), st.floats(-20, 20), st.floats(0.05, 60))
def test_regularized_upper_gamma_vs_mpmath(a, b, x):
    s = complex(a, b)
    ref = complex(mp.gammainc(s, x, regularized=True))
    got = regularized_upper_gamma(s, x)
    assert abs(got - ref) <= 1e-10 * max(abs(ref), 1e-300) + 1e-290


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, 20), st.floats(0.1, 20))
def test_incomplete_gamma_recurrence(a, x):
    # Gamma(s+1, x) = s Gamma(s, x) + x^s e^-x
    s = complex(a, 0.5)
    lhs = upper_incomplete_gamma(s + 1, x)
    rhs = s * upper_incomplete_gamma(s, x) + cmath.exp(s * math.log(x) - x)
    assert abs(lhs - rhs) <= 1e-11 * abs(lhs)


def test_incomplete_gamma_rejects_nonpositive_x():
    with pytest.raises(ValueError):
        upper_incomplete_gamma(1.5, 0.0)


def test_g_delta_definition():
    for s in (complex(3.2, 1.0), complex(0.5, 12.0)):
        for delta in (0, 1):
            ref = 2 * 1j ** delta * (2 * math.pi) ** (-s) * complex(mp.gamma(s)) * cmath.cos(
                math.pi * (s - delta) / 2)
            assert g_delta(s, delta) == pytest.approx(ref, rel=1e-12)


def test_g_delta_exact_zeros_and_parity():
    assert g_delta(1.0, 0) == 0
    assert g_delta(3.0, 0) == 0
    assert g_delta(2.0, 1) == 0
    assert g_delta(2.5, 0).imag == 0.0
    assert g_delta(2.5, 1).real == 0.0
    with pytest.raises(ValueError):
        g_delta(1.5, 2)
    with pytest.raises(GammaOverflowError):
        log_g_delta(complex(0.5, 800.0), 0)


# frozen mpmath values of |G_0(sigma + it)| / (t/2pi)^(sigma - 1/2)
STIRLING_MPMATH = {
    (6.0, 20.0): 1.0695859141801074,
    (6.0, 30.0): 1.030720424358638,
    (6.25, 25.0): 1.050794756206783,
    (6.25, 40.0): 1.0197268188045736,
}


def _stirling_ratio(sigma, t):
    return abs(g_delta(complex(sigma, t), 0)) / g0_modulus_asymptotic(sigma, t)


def test_stirling_ratio_on_half_line():
    for t in np.linspace(20.0, 200.0, 91):
        assert abs(_stirling_ratio(0.5, t) - 1.0) <= 0.05


@pytest.mark.parametrize("key", sorted(STIRLING_MPMATH))
def test_stirling_ratio_matches_mpmath(key):
    assert _stirling_ratio(*key) == pytest.approx(STIRLING_MPMATH[key], rel=1e-12)


@pytest.mark.parametrize("sigma,t_enter", [(6.0, 24.0), (6.25, 26.0)])
def test_stirling_ratio_decreases_into_band(sigma, t_enter):
    # the relative correction is about sigma^2 (sigma/6 - 1/4) / t^2, so the
    # 5% band is only reached for t past t_enter
    ts = np.linspace(20.0, 200.0, 181)
    r = np.array([_stirling_ratio(sigma, t) for t in ts])
    assert np.all(np.diff(r) < 0) and np.all(r > 1.0)
    assert np.all(r[ts >= t_enter] <= 1.05)
    assert r[0] > 1.05


def test_stirling_example_at_40():
    assert 0.9 <= _stirling_ratio(6.0, 40.0) <= 1.1


def test_inverse_g0_bounded():
    # empirical global constant: the maximum, about 126.2, sits near sigma = 6.9, t = 1
    worst = 0.0
    for sigma in np.linspace(0.5, 40.0, 80):
        for t in np.linspace(1.0, 300.0, 150):
            worst = max(worst, 1.0 / abs(g_delta(complex(sigma, t), 0)))
    assert 100.0 < worst <= 130.0


def test_stirling_needs_large_t():
    with pytest.raises(ValueError):
        g0_modulus_asymptotic(0.5, 0.2)


def test_g_delta_small_examples():
    assert g_delta(2.0, 0) == pytest.approx(-1.0 / (2 * math.pi ** 2), rel=1e-14)
    assert g_delta(1.0, 1) == pytest.approx(1j / math.pi, rel=1e-14)
