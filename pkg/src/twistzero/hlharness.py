"""Bump-function windows and the Hardy-Littlewood sign-change experiment.

phi is an even bump on [-1, 1], psi(x) = phi(log x), lambda = psi * psi
(multiplicative convolution, so lambda(e^l) = (phi * phi)(l)), and the
t-side window is u(t) = (M psi(it))^2 with M psi(it) = 2 int_0^1 phi(v) cos(tv) dv.
u_T(t) = u((t - 2 T^(3/2)) / T) has mass 2 pi lambda(1) T.

All t-integrals use composite Gauss-Legendre panels over
|t - 2T^(3/2)| <= W T, with W chosen from the computed tail mass of u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import SupportConditionError
from .lfun import TwistedL, mellin_m0, parallel_map, smoothed_L, z_function

SUPPORT_THRESHOLD = 2.0 / math.log(2.0)
GL_ORDER = 32
PANEL_WIDTH = 3.0
DEFAULT_SHARPNESS = 8.0
SIGN_CHANGE = "SignChangeForced"
INCONCLUSIVE = "Inconclusive"

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def panel_rule(a: float, b: float, width: float = PANEL_WIDTH, order: int = GL_ORDER):
    """Nodes and weights of composite Gauss-Legendre on [a, b] with panels <= width."""
    if b <= a:
        return np.empty(0), np.empty(0)
    if order == GL_ORDER:
        x, w = _GL_X, _GL_W
    else:
        x, w = np.polynomial.legendre.leggauss(order)
    npan = max(1, math.ceil((b - a) / width - 1e-12))
    edges = np.linspace(a, b, npan + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class BumpFamily:
    """phi(v) = exp(beta - beta / (1 - v^2)) on (-1, 1); beta = 1 is the classical bump."""

    sharpness: float = DEFAULT_SHARPNESS
    _v: np.ndarray = field(init=False, repr=False, compare=False)
    _wv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.sharpness > 0:
            raise ValueError("sharpness must be positive")
        v, w = panel_rule(0.0, 1.0, 1.0 / 64, 16)
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "_wv", w * self.phi(v))

    @classmethod
    def normalized(cls) -> BumpFamily:
        """The member of the family with lambda(1) = 1."""
        beta = brentq(lambda b: cls(b).lambda_at_1 - 1.0, 0.05, 1.0, xtol=1e-14)
        return cls(beta)

    def phi(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        inside = np.abs(v) < 1.0
        vv = v[inside]
        out[inside] = np.exp(self.sharpness - self.sharpness / (1.0 - vv * vv))
        return out

    def psi(self, x):
        return self.phi(np.log(np.asarray(x, dtype=float)))

    @cached_property
    def lambda_at_1(self) -> float:
        v, w = panel_rule(-1.0, 1.0, 1.0 / 32, 16)
        return float(np.sum(w * self.phi(v) ** 2))

    def mpsi(self, t):
        """M psi(it) = 2 int_0^1 phi(v) cos(t v) dv."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty_like(flat)
        for i in range(0, len(flat), 2048):
            chunk = flat[i:i + 2048]
            out[i:i + 2048] = 2.0 * (np.cos(np.outer(chunk, self._v)) @ self._wv)
        return out.reshape(t.shape)

    def u(self, t):
        return self.mpsi(t) ** 2

    def u_T(self, T: float, t):
        if not T > 0:
            raise ValueError("T must be positive")
        return self.u((np.asarray(t, dtype=float) - 2.0 * T ** 1.5) / T)

    @cached_property
    def _lambda_spline(self) -> CubicSpline:
        ell = np.linspace(-2.0, 2.0, 2001)
        vals = np.empty_like(ell)
        for i, l in enumerate(ell):
            lo, hi = max(-1.0, l - 1.0), min(1.0, l + 1.0)
            v, w = panel_rule(lo, hi, 1.0 / 16, 16)
            vals[i] = np.sum(w * self.phi(v) * self.phi(l - v))
        vals[0] = vals[-1] = 0.0
        return CubicSpline(ell, vals)

    @cached_property
    def lambda_nodes(self):
        """Gauss-Legendre nodes/weights on [-2, 2] in the variable log x."""
        return panel_rule(-2.0, 2.0, 1.0 / 16, 16)

    @cached_property
    def lambda_direct(self) -> np.ndarray:
        """(phi * phi)(l) by quadrature at lambda_nodes, without interpolation."""
        ell, _ = self.lambda_nodes
        out = np.zeros_like(ell)
        for i, l in enumerate(ell):
            lo, hi = max(-1.0, l - 1.0), min(1.0, l + 1.0)
            if hi > lo:
                v, w = panel_rule(lo, hi, 1.0 / 32, 16)
                out[i] = np.sum(w * self.phi(v) * self.phi(l - v))
        return out

    def lam(self, x):
        """lambda(x) = (psi * psi)(x), supported on [e^-2, e^2]."""
        ell = np.log(np.asarray(x, dtype=float))
        out = np.zeros_like(ell)
        inside = np.abs(ell) < 2.0
        out[inside] = self._lambda_spline(ell[inside])
        return out

    def lambda_T(self, T: float, x):
        x = np.asarray(x, dtype=float)
        return T * np.exp(-2j * T ** 1.5 * np.log(x)) * self.lam(x ** T)

    @cached_property
    def _tail_table(self):
        # cumulative mass of u on [0, tau] for tau up to 200
        edges = np.arange(0.0, 200.0 + 1e-9, 0.5)
        v, w = panel_rule(0.0, 0.5, 0.5, 24)
        masses = np.array([np.sum(w * self.u(a + v)) for a in edges[:-1]])
        tail = np.concatenate((np.cumsum(masses[::-1])[::-1], [0.0]))
        return edges, tail / tail[0]

    def tail_fraction(self, W: float) -> float:
        """int_{|t| > W} u / int u (0 beyond the tabulated range)."""
        edges, tail = self._tail_table
        return float(np.interp(W, edges, tail))

    def halfwidth(self, tol: float) -> float:
        """Smallest W (multiple of 1/2) whose two-sided tail mass fraction is <= tol."""
        edges, tail = self._tail_table
        idx = np.nonzero(tail <= tol)[0]
        if len(idx) == 0:
            raise ValueError(f"u tail does not fall below {tol} within |t| <= {edges[-1]}")
        return float(max(edges[idx[0]], 4.0))


@dataclass(frozen=True)
class Window:
    T: float
    W: float

    @property
    def center(self) -> float:
        return 2.0 * self.T ** 1.5

    @property
    def bounds(self) -> tuple[float, float]:
        return self.center - self.W * self.T, self.center + self.W * self.T


def window_rule(family: BumpFamily, window: Window, width: float = PANEL_WIDTH):
    """Nodes and u_T-weighted quadrature weights over the window."""
    a, b = window.bounds
    t, w = panel_rule(a, b, width)
    return t, w * family.u_T(window.T, t)


def _check_support(T: float):
    if not T > SUPPORT_THRESHOLD:
        raise SupportConditionError(
            f"T = {T} violates the support condition T > 2/log 2 = {SUPPORT_THRESHOLD:.6f}")


@dataclass(frozen=True)
class LutlemResult:
    T: float
    s: complex
    lhs: complex
    rhs: complex
    W: float
    nodes: int

    @property
    def rel_error(self) -> float:
        return abs(self.lhs - self.rhs) / abs(self.rhs)


def lutlem_rhs(L: TwistedL, T: float, family: BumpFamily) -> complex:
    """2 pi a_1 e(p/q) lambda(1) T."""
    return 2.0 * math.pi * complex(L.a_twisted[0]) * family.lambda_at_1 * T


def verify_lutlem(L: TwistedL, T: float, s: complex, family: BumpFamily | None = None, *,
                  tail_tol: float = 1e-9) -> LutlemResult:
    """Quadrature of int L(s + it) u_T(t) dt against its closed form."""
    _check_support(T)
    family = family or BumpFamily()
    window = Window(T, family.halfwidth(tail_tol))
    t, w = window_rule(family, window)
    s = complex(s)
    vals = np.array(parallel_map(lambda tt: smoothed_L(L, s + 1j * tt).value, t))
    lhs = complex(np.dot(w, vals))
    return LutlemResult(T, s, lhs, lutlem_rhs(L, T, family), window.W, len(t))


@dataclass(frozen=True)
class DecayRow:
    T: float
    value: complex
    scale: float       # int |M_0 tau| u_T, the size the cancellation starts from
    edge_ratio: float  # |integrand| at the window edges over its peak
    W: float

    @property
    def magnitude(self) -> float:
        return abs(self.value)


def decay_probe(L: TwistedL, T_list: Sequence[float], family: BumpFamily | None = None, *,
                tail_tol: float = 1e-14) -> list[DecayRow]:
    """|int M_0 tau(kappa/2 + it) u_T(t) dt| for each T."""
    family = family or BumpFamily()
    rows = []
    for T in T_list:
        _check_support(T)
        window = Window(T, family.halfwidth(tail_tol))
        t, w = window_rule(family, window)
        sig = L.kappa / 2.0
        vals = np.array(parallel_map(lambda tt: mellin_m0(L, complex(sig, tt)), t))
        integrand = np.abs(vals) * family.u_T(T, t)
        peak = float(np.max(integrand))
        edge = float(max(integrand[0], integrand[-1]))
        rows.append(DecayRow(float(T), complex(np.dot(w, vals)), float(np.dot(w, np.abs(vals))),
                             edge / peak if peak > 0 else 0.0, window.W))
    return rows


_LD = np.longdouble


def _gauss_legendre_ld(order: int):
    """Gauss-Legendre nodes and weights refined by Newton steps in long double."""
    x = np.polynomial.legendre.leggauss(order)[0].astype(_LD)

    def legendre(x):
        p0, p1 = np.ones_like(x), x.copy()
        for k in range(2, order + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        return p1, order * (x * p1 - p0) / (x * x - 1)

    for _ in range(4):
        p, dp = legendre(x)
        x = x - p / dp
    _, dp = legendre(x)
    return x, 2 / ((1 - x * x) * dp * dp)


def _panel_rule_ld(a, b, npan: int, order: int = 16):
    x, w = _gauss_legendre_ld(order)
    edges = a + (b - a) * np.arange(npan + 1, dtype=_LD) / npan
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    return (mid[:, None] + half[:, None] * x[None, :]).ravel(), (half[:, None] * w[None, :]).ravel()


def _lambda_ld(family: BumpFamily):
    """Nodes, weights and (phi * phi) values on [-2, 2] in long double."""
    beta = _LD(family.sharpness)

    def phi(v):
        out = np.zeros_like(v)
        inside = np.abs(v) < 1
        vv = v[inside]
        out[inside] = np.exp(beta - beta / (1 - vv * vv))
        return out

    ell, wl = _panel_rule_ld(_LD(-2), _LD(2), 64)
    lam = np.zeros_like(ell)
    for i, l in enumerate(ell):
        lo, hi = max(_LD(-1), l - 1), min(_LD(1), l + 1)
        if hi > lo:
            v, w = _panel_rule_ld(lo, hi, max(1, math.ceil(float(hi - lo) * 32)))
            lam[i] = np.sum(w * phi(v) * phi(l - v))
    return ell, wl, lam


@dataclass(frozen=True)
class DualRow:
    T: float
    value: complex
    noise: float   # size of the rounding floor where the n-sum was cut
    terms: int


def decay_probe_dual(L: TwistedL, T_list: Sequence[float], family: BumpFamily | None = None,
                     ) -> list[DualRow]:
    """The decay-probe integral computed on the x side, as an independent check.

    By Mellin-Parseval the t-integral equals
    2 pi sum_n c_n e(np/q) int 2 cos(2 pi n x/q) T lambda(x^T) x^(2i T^(3/2) + kappa/2 - 1) dx.
    The inner integrals J_n live around n ~ q T^(3/2)/pi and then decay until
    they reach the rounding floor.  Since |c_n| grows like n^(kappa/2) that
    floor eventually dominates, so everything here runs in long double, the
    sum is cut where the terms are smallest, and the floor there is reported
    as noise.  (Where long double is plain double the noise is correspondingly larger.)
    """
    family = family or BumpFamily()
    ell, wl, lam = _lambda_ld(family)
    q = L.twist.q
    twopi = 2 * np.arccos(_LD(-1))
    coef = (np.asarray(L.table.exact, dtype=_LD) if L.table.exact is not None
            else L.table.c.real.astype(_LD))
    out = []
    for T in T_list:
        _check_support(T)
        TT = _LD(T)
        amp = lam * wl * np.exp(ell * _LD(L.kappa / 2) / TT)
        ph = ell * 2 * np.sqrt(TT)
        amp_c, amp_s = amp * np.cos(ph), amp * np.sin(ph)
        x = np.exp(ell / TT)
        n0 = q * T ** 1.5 / math.pi
        N = int(30 * n0) + 50
        if N > L.table.count:
            raise ValueError(f"need {N} coefficients for T = {T}")
        phases = L.twist.coefficient_phases(N)
        terms = np.empty(N, dtype=np.clongdouble)
        for k in range(1, N + 1):
            c2 = 2 * np.cos(twopi * k * x / q)
            J = np.sum(amp_c * c2) + 1j * np.sum(amp_s * c2)
            terms[k - 1] = twopi * coef[k - 1] * J * np.clongdouble(phases[k - 1])
        width = max(10, int(n0))
        mags = np.abs(terms).astype(float)
        roll = np.array([mags[i:i + width].max() for i in range(N - width + 1)])
        start = int(6 * n0)
        cut = start + int(np.argmin(roll[start:]))
        value = complex(np.sum(terms[:cut + width]))
        out.append(DualRow(float(T), value, float(roll[cut]) * math.sqrt(cut + width), cut + width))
    return out


@dataclass(frozen=True)
class TailRow:
    T: float
    value: float


def tail_probe(f: Callable, T_list: Sequence[float], family: BumpFamily | None = None, *,
               tail_tol: float = 1e-16) -> list[TailRow]:
    """int_{|x - 2T^(3/2)| > T^(3/2)} |f(x)| u_T(x) dx for each T."""
    family = family or BumpFamily()
    rows = []
    for T in T_list:
        if not T > 0:
            raise ValueError("T must be positive")
        c = 2.0 * T ** 1.5
        W = family.halfwidth(tail_tol)
        total = 0.0
        if W * T > T ** 1.5:
            for a, b in ((c - W * T, c - T ** 1.5), (c + T ** 1.5, c + W * T)):
                x, w = panel_rule(a, b)
                total += float(np.dot(w * family.u_T(T, x), np.abs(f(x))))
        rows.append(TailRow(float(T), total))
    return rows


def loglog_slope(Ts: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(T)."""
    return float(np.polyfit(np.log(np.asarray(Ts, dtype=float)),
                            np.log(np.asarray(values, dtype=float)), 1)[0])


@dataclass(frozen=True)
class HLResult:
    T: float
    I_signed: float
    I_abs: float
    quad_err: float
    verdict: str
    W: float
    nodes: int

    @property
    def ratio(self) -> float:
        return self.I_abs / abs(self.I_signed) if self.I_signed else math.inf


def hl_experiment(L: TwistedL | None, T: float, family: BumpFamily | None = None, *,
                  Zfun: Callable[[float], float] | None = None,
                  tail_tol: float = 1e-10) -> HLResult:
    """Compare int Z u_T with int |Z| u_T; a clear gap forces a sign change of Z.

    Zfun defaults to the real Z-function of L; any real function of t may be
    supplied instead (for controls).
    """
    _check_support(T)
    family = family or BumpFamily()
    if Zfun is None:
        zf = z_function(L)
        Zfun = lambda t: zf(t).Z.real  # noqa: E731
    window = Window(T, family.halfwidth(tail_tol))

    def integrals(width):
        t, w = window_rule(family, window, width)
        z = np.array(parallel_map(lambda tt: float(Zfun(tt)), t))
        return float(np.dot(w, z)), float(np.dot(w, np.abs(z))), len(t)

    signed, absolute, nodes = integrals(PANEL_WIDTH)
    signed2, absolute2, _ = integrals(2.0 * PANEL_WIDTH)
    tail = 2.0 * math.pi * family.lambda_at_1 * T * family.tail_fraction(window.W)
    quad_err = abs(signed - signed2) + abs(absolute - absolute2) + tail * max(1.0, absolute / T)
    verdict = SIGN_CHANGE if abs(signed) < absolute - quad_err else INCONCLUSIVE
    return HLResult(float(T), signed, absolute, quad_err, verdict, window.W, nodes)
