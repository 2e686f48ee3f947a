from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from twistzero import DELTA, TwistedL
from twistzero.errors import HypothesisViolation, SupportConditionError
from twistzero.hlharness import (INCONCLUSIVE, SIGN_CHANGE, SUPPORT_THRESHOLD, BumpFamily, Window,
                                 decay_probe, decay_probe_dual, hl_experiment, loglog_slope,
                                 lutlem_rhs, panel_rule, tail_probe, verify_lutlem, window_rule)
from twistzero.lfun import LValue

FAM = BumpFamily()


def _phi(v, beta=8.0):
    return math.exp(beta - beta / (1 - v * v)) if abs(v) < 1 else 0.0


@pytest.fixture(scope="module")
def L_wide():
    # window for T = 4 reaches t ~ 16 + 4 * 53
    return TwistedL.from_form(DELTA, 1, 5, t_max=240)


def test_constants_against_scipy():
    I = quad(_phi, -1, 1, epsabs=0, epsrel=1e-13)[0]
    assert float(FAM.u(0.0)) == pytest.approx(I * I, rel=1e-13)
    lam1 = quad(lambda v: _phi(v) ** 2, -1, 1, epsabs=0, epsrel=1e-13)[0]
    assert FAM.lambda_at_1 == pytest.approx(lam1, rel=1e-13)
    assert FAM.lambda_at_1 == pytest.approx(0.4244171883, abs=1e-10)


@pytest.mark.parametrize("t", [0.5, 3.0, 17.0, 41.0])
def test_mpsi_against_scipy(t):
    ref = 2 * quad(lambda v: _phi(v) * math.cos(t * v), 0, 1, epsabs=1e-15, epsrel=1e-13,
                   limit=200)[0]
    assert float(FAM.mpsi(t)) == pytest.approx(ref, abs=1e-14)


@pytest.mark.parametrize("ell", [0.0, 0.3, 1.1, 1.7])
def test_lambda_against_scipy(ell):
    ref = quad(lambda v: _phi(v) * _phi(ell - v), max(-1, ell - 1), min(1, ell + 1),
               epsabs=0, epsrel=1e-12)[0]
    assert float(FAM.lam(math.exp(ell))) == pytest.approx(ref, rel=1e-9, abs=1e-15)


def test_lambda_spline_matches_direct():
    ell, _ = FAM.lambda_nodes
    assert np.allclose(FAM.lam(np.exp(ell)), FAM.lambda_direct, atol=1e-10)


@pytest.mark.parametrize("T", [5.0, 10.0, 20.0])
def test_u_T_bounds(T):
    t = np.linspace(2 * T ** 1.5 - 60 * T, 2 * T ** 1.5 + 60 * T, 10_000)
    u = FAM.u_T(T, t)
    assert np.all(u >= 0) and np.all(u <= 4)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 50), st.floats(-200, 200))
def test_u_T_translation(T, t):
    a = float(FAM.u_T(T, t + 2 * T ** 1.5))
    b = float(FAM.u(t / T))
    assert abs(a - b) <= 1e-14 * max(1.0, abs(b))


def test_u_T_example():
    assert float(FAM.u_T(4.0, 16.0)) == float(FAM.u(0.0))
    for s in (1.0, 2.0):
        assert float(FAM.u_T(4.0, 16.0 + 4 * s)) == pytest.approx(float(FAM.u(s)), rel=1e-14)


def test_psi_and_lambda_symmetry():
    x = np.exp(np.linspace(-2.2, 2.2, 301))
    assert np.allclose(FAM.psi(x), FAM.psi(1 / x), atol=1e-15)
    assert np.allclose(FAM.lam(x), FAM.lam(1 / x), atol=1e-12)
    assert float(FAM.lam(math.exp(2.05))) == 0.0


@pytest.mark.parametrize("T", [3.0, 4.0, 10.0])
def test_lambda_T_vanishes_at_integers(T):
    # lambda_T(n) = T n^(-2iT^(3/2)) lambda(n^T) and n^T > e^2 once T > 2/log 2
    for n in (2, 3, 7):
        assert abs(FAM.lambda_T(T, float(n))) == 0.0
    assert abs(FAM.lambda_T(T, 1.0)) == pytest.approx(T * FAM.lambda_at_1, rel=1e-9)


@pytest.mark.parametrize("T", [3.0, 8.0, 25.0])
def test_mass_identity(T):
    t, w = window_rule(FAM, Window(T, FAM.halfwidth(1e-14)))
    assert np.sum(w) == pytest.approx(2 * math.pi * FAM.lambda_at_1 * T, rel=1e-12)


def test_u_decay_envelope():
    t = np.linspace(10, 200, 19001)
    g = FAM.u(t) * t ** 4
    assert g.max() <= 10.0
    lo = t <= 80
    gl = g[lo]
    peaks = [i for i in range(1, len(gl) - 1) if gl[i] >= gl[i - 1] and gl[i] >= gl[i + 1]]
    assert np.all(np.diff(gl[peaks]) < 0)
    # beyond t = 80 u sits at its roundoff floor
    assert g[~lo].max() <= 1e-10


def test_tail_fraction_against_scipy():
    for W in (10.0, 20.0):
        ref = 2 * quad(lambda x: float(FAM.u(x)), W, 200, limit=400)[0]
        assert FAM.tail_fraction(W) == pytest.approx(ref / (2 * math.pi * FAM.lambda_at_1), rel=1e-6)
    assert FAM.halfwidth(1e-11) < FAM.halfwidth(1e-14)
    with pytest.raises(ValueError):
        FAM.halfwidth(-1.0)


def test_normalized_family():
    fam = BumpFamily.normalized()
    assert fam.lambda_at_1 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        BumpFamily(0.0)


def test_panel_rule_exact_for_polynomials():
    x, w = panel_rule(-1.3, 4.7, 1.0)
    for k in range(0, 40, 7):
        assert np.dot(w, x ** k) == pytest.approx((4.7 ** (k + 1) - (-1.3) ** (k + 1)) / (k + 1), rel=1e-12)
    assert panel_rule(1.0, 1.0)[0].size == 0


def test_support_condition():
    assert SUPPORT_THRESHOLD == pytest.approx(2.8853900817779268)
    with pytest.raises(SupportConditionError):
        hl_experiment(None, 2.0, Zfun=lambda t: 1.0)
    with pytest.raises(HypothesisViolation):
        decay_probe(None, [2.5])


def test_lutlem_synthetic_single_coefficient(monkeypatch):
    # a = (1, 0, 0, ...): L(s) = e(p/q) for every s
    class Fake:
        a_twisted = np.array([cmath.exp(2j * math.pi * 2 / 7)])

    monkeypatch.setattr("twistzero.hlharness.smoothed_L",
                        lambda L, s: LValue(complex(Fake.a_twisted[0]), 0.0, 1))
    r = verify_lutlem(Fake(), 6.0, 0.5 + 1j, FAM, tail_tol=1e-14)
    assert r.rel_error <= 1e-12
    assert r.rhs == pytest.approx(lutlem_rhs(Fake(), 6.0, FAM))


def test_lutlem_independent_of_s(L_wide):
    vals = [verify_lutlem(L_wide, 4.0, s).lhs for s in (0.0, 0.5, 2.0, 1 + 1j)]
    rhs = lutlem_rhs(L_wide, 4.0, FAM)
    for v in vals:
        assert abs(v - rhs) <= 1e-6 * abs(rhs)
    for a in vals:
        for b in vals:
            assert abs(a - b) <= 1e-6 * abs(rhs)


def test_decay_probe_matches_x_side(L_wide):
    (row,) = decay_probe(L_wide, [4.0])
    (dual,) = decay_probe_dual(L_wide, [4.0])
    assert abs(row.value - dual.value) <= max(dual.noise, 1e-7 * abs(dual.value))
    assert dual.noise <= 1e-7 * abs(dual.value)
    assert row.edge_ratio <= 1e-3
    assert row.scale >= row.magnitude


def test_tail_probe_controls():
    rows = tail_probe(lambda x: np.zeros_like(x), [4.0, 8.0])
    assert [r.value for r in rows] == [0.0, 0.0]
    for T in (4.0, 8.0, 16.0):
        (r,) = tail_probe(lambda x: np.ones_like(x), [T])
        mass = 2 * math.pi * FAM.lambda_at_1 * T
        assert 0 < r.value < mass
        # beyond |t - c| > T^(3/2) means |v| > T^(1/2) in the window variable v = (t - c)/T
        ref = 2 * T * quad(lambda v: float(FAM.u(v)), T ** 0.5, 60, limit=400)[0]
        assert r.value == pytest.approx(ref, rel=1e-8)


def test_loglog_slope():
    T = [4, 8, 16, 32]
    assert loglog_slope(T, [3.0 * t ** -4 for t in T]) == pytest.approx(-4.0)


@pytest.mark.parametrize("T", [4.0, 9.0])
def test_hl_controls(T):
    mass = 2 * math.pi * FAM.lambda_at_1 * T
    one = hl_experiment(None, T, Zfun=lambda t: 1.0)
    assert one.I_signed == one.I_abs == pytest.approx(mass, rel=1e-9)
    assert one.verdict == INCONCLUSIVE
    wave = lambda t: math.cos(t)  # noqa: E731
    osc = hl_experiment(None, T, Zfun=wave)
    pos = hl_experiment(None, T, Zfun=lambda t: abs(wave(t)))
    assert pos.I_signed == pos.I_abs and pos.verdict == INCONCLUSIVE
    assert osc.verdict == SIGN_CHANGE and osc.ratio > 10
    assert osc.I_abs == pos.I_abs
