"""Additively twisted L-functions L(s, f, p/q) and their critical-line data.

Normalisation: with kappa the weight and c_n the raw Fourier coefficients,
a_n = c_n n^-(kappa-1)/2 and L(s) = sum a_n e(n p/q) n^-s, so the critical
line is Re s = 1/2.  With w = s + (kappa-1)/2 the completed function is
Lambda(w) = (2 pi)^-w Gamma(w) sum c_n e(np/q) n^-w.

Away from absolute convergence L is evaluated by splitting the Mellin
integral of f(p/q + iy) at a point y0 of a rotated ray and transforming the
lower piece with the matrix (p r; q p~) of Gamma_0(N).  Both pieces become
rapidly convergent sums of incomplete Gamma functions.  Rotating the ray to
angle close to pi/2 keeps the terms of size comparable to the result for
large |Im s|.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numba as nb
import numpy as np

from . import arith
from .arith import Twist, i_power, make_twist
from .errors import (ConvergenceError, CosineZero, HypothesisViolation, RealnessViolation,
                     SelfCheckError)
from .qseries import CoeffTable, FormSpec, form_coeffs, parse_form
from .specfun import (LOG_2PI, lgamma_kernel, log_cos_kernel, lower_series_kernel,
                      upper_cf_kernel)

EPS = 2.220446049250313e-16
ROTATION_SLACK = 6.0     # (pi/2 - |angle|) * |t| of the splitting ray
TRUNC_RTOL = 1e-17       # truncation error relative to sum |terms|
FE_SPLITS = (1.0, 0.8)   # split parameters of the two FE sides


@nb.njit(cache=True, nogil=True)
def _ray_sum(coef, env, logn, a, lga, lg_norm, y, force_cf, rtol):
    """sum_n coef[n-1] n^-a Gamma(a, 2 pi n y) / exp(lg_norm).

    Returns (sum, sum of |terms|, terms used, converged).
    """
    two_pi_y = 2.0 * math.pi * y
    const = a * cmath.log(two_pi_y) - lg_norm
    gam_part = lga - lg_norm
    decay = math.exp(-2.0 * math.pi * y.real)
    kexp = 0.5 * env[0]  # exponent of the envelope's polynomial growth
    abs_a = abs(a)
    total = 0j
    abs_total = 0.0
    nmax = coef.shape[0]
    for i in range(nmax):
        n = i + 1.0
        z = n * two_pi_y
        c = coef[i]
        absz = abs(z)
        if force_cf or absz >= abs_a + 1.0:
            h, _, ok = upper_cf_kernel(a, z, 100000)
            term = cmath.exp(const - z) * h
        else:
            s, _, ok = lower_series_kernel(a, z, 100000)
            term = cmath.exp(gam_part - a * logn[i]) - cmath.exp(const - z) * s / a
        if c != 0:
            v = c * term
            total += v
            abs_total += abs(v)
        if absz > 2.0 * abs_a + 10.0:
            rho = decay * ((n + 1.0) / n) ** kexp
            if rho < 1.0:
                bound = env[i + 1] * abs(cmath.exp(const - z)) / (absz - abs_a)
                if bound / (1.0 - rho) <= rtol * abs_total or bound == 0.0:
                    return total, abs_total, i + 1, True
    return total, abs_total, nmax, False


class PartialSum(NamedTuple):
    value: complex
    tail_bound: float


@dataclass(frozen=True)
class LValue:
    value: complex
    err: float
    terms: int


@dataclass(frozen=True)
class CriticalValue:
    t: float
    L: complex
    Z: complex
    err_est: float

    @property
    def z(self) -> float:
        return self.Z.real


def _envelope(c: np.ndarray, kappa: float) -> np.ndarray:
    # env[0] stores kappa; env[n] >= |c_m| for m <= n, growing like n^(kappa/2)
    n = np.arange(1, len(c) + 1, dtype=float)
    scaled = np.maximum.accumulate(np.abs(c) / n ** (kappa / 2.0))
    return np.concatenate(([kappa], scaled * n ** (kappa / 2.0), [scaled[-1] * (len(c) + 1.0) ** (kappa / 2.0)]))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("TWISTZERO_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Iterable) -> list:
    """Map in input order; uses TWISTZERO_THREADS worker threads (kernels drop the GIL)."""
    items = list(items)
    nthreads = thread_count()
    if nthreads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        return list(pool.map(fn, items))


def root_factor(spec: FormSpec, twist: Twist) -> complex:
    """mu with f(p/q + iy) = mu (q y)^-kappa f(-p~/q + i/(q^2 y)).

    Read off from (p r; q p~) in Gamma_0(N): i^k for integral weight
    (trivial character) and (q/p~)^(2k+1) eps_(p~)^(-1-2k) i^(k+1/2) for
    weight k+1/2 with the theta multiplier.
    """
    if spec.integral_weight:
        return i_power(spec.weight2 // 2)
    k = spec.k
    return arith.theta_multiplier(twist.q, twist.p_tilde, k) * cmath.exp(0.5j * math.pi * spec.kappa)


def closed_form_root(spec: FormSpec, twist: Twist) -> complex:
    """i^kappa ((-q)/p)^(-1-2k) eps_p^(2k+1): the same constant written via p."""
    k = spec.k
    return (cmath.exp(0.5j * math.pi * spec.kappa) / arith.beta_pq(twist.p, twist.q, k))


class TwistedL:
    """L(s, f, p/q) for a fixed form table and twist."""

    def __init__(self, spec: FormSpec, table: CoeffTable, twist: Twist, *,
                 check: bool = True, _reflected_of: TwistedL | None = None):
        if table.weight2 != spec.weight2:
            raise ValueError("table and form disagree on the weight")
        self.spec = spec
        self.table = table
        self.twist = twist
        self.kappa = spec.kappa
        M = table.count
        phases = twist.coefficient_phases(M)
        self.coef = np.ascontiguousarray(table.c * phases)
        self.a_twisted = table.a * phases
        self.logn = np.log(np.arange(1, M + 1, dtype=float))
        self.env = _envelope(table.c, self.kappa)
        self.has_fe = twist.equiv_infinity
        self._sqrt_beta_sign = 1.0
        self._reflected = _reflected_of
        if self.has_fe:
            self.mu = root_factor(spec, twist)
            refl = twist.reflected()
            self.coef_refl = np.ascontiguousarray(table.c * refl.coefficient_phases(M))
            if spec.integral_weight and spec.weight2 % 4:
                raise HypothesisViolation("odd integral weight needs a nebentypus; unsupported")
            if check:
                self.self_check()
                if not spec.integral_weight and self.realness_applies:
                    if z_g(self, 0.0, check_real=False).Z.real < 0:
                        self._sqrt_beta_sign = -1.0

    @classmethod
    def from_form(cls, form: str | FormSpec, p: int, q: int, M: int | None = None, *,
                  t_max: float = 50.0, level: int | None = None, check: bool = True) -> TwistedL:
        spec = parse_form(form, level=level) if isinstance(form, str) else form
        twist = make_twist(p, q, spec.level)
        if M is None:
            M = required_terms(spec.kappa, q, t_max)
        table = form_coeffs(spec, M)
        return cls(spec, table, twist, check=check)

    @property
    def reflected(self) -> TwistedL:
        """The same form twisted by -p~/q (no self check)."""
        if self._reflected is None:
            self._reflected = TwistedL(self.spec, self.table, self.twist.reflected(),
                                       check=False, _reflected_of=self)
        return self._reflected

    @property
    def realness_applies(self) -> bool:
        return self.has_fe and self.twist.self_inverse and self.table.is_real

    def require_fe(self):
        if not self.has_fe:
            raise HypothesisViolation(
                f"{self.twist} is not equivalent to infinity under Gamma_0({self.spec.level}); "
                "no functional equation")

    def self_check(self, tol: float = 1e-8) -> float:
        s_ref = complex((self.kappa + 1.0) / 2.0 + 0.37, 1.3)
        res = fe_residual(self, s_ref)
        if not res <= tol:
            raise SelfCheckError(
                f"functional equation residual {res:.3g} at s = {s_ref} for {self.spec.label} "
                f"twisted by {self.twist}; coefficients or level are wrong")
        return res

    def __repr__(self):
        return f"TwistedL({self.spec.label!r}, {self.twist}, M={self.table.count})"


# ---------------------------------------------------------------------------


def required_terms(kappa: float, q: int, t_max: float, split: float = 1.0,
                   slack: float = ROTATION_SLACK) -> int:
    """Table size that lets smoothed_L converge for |Im s| <= t_max (generous)."""
    t = max(abs(t_max), 2.0 * slack / math.pi)
    phi = math.pi / 2 - slack / t
    worst = 0
    for A in (split, 1.0 / split):
        y = A * complex(math.cos(phi), math.sin(phi)) / q
        a_abs = math.hypot(kappa + 2.0, t)
        n0 = (2.0 * a_abs + 10.0) / (2.0 * math.pi * abs(y))
        # beyond n0 the terms decay like exp(-2 pi n Re y) n^(kappa/2); ask for ~50 e-folds
        n = n0
        while -2.0 * math.pi * (n - n0) * y.real + (kappa / 2.0) * math.log(n / n0) > -55.0:
            n *= 1.05
        worst = max(worst, int(n) + 1)
    return int(worst * 1.1) + 16


def dirichlet_sum(L: TwistedL, s: complex, M: int | None = None) -> PartialSum:
    """sum_{n<=M} a_n e(np/q) n^-s with a tail bound for Re s > 3/2."""
    s = complex(s)
    M = L.table.count if M is None else min(M, L.table.count)
    n = np.arange(1, M + 1, dtype=float)
    val = complex(np.sum(L.a_twisted[:M] * np.exp(-s * L.logn[:M])))
    sigma = s.real
    # Hecke bound |a_n| <= C n^(1/2) with C fitted on the table
    C = float(np.max(np.abs(L.table.a[:M]) / np.sqrt(n)))
    if sigma > 1.5:
        tail = C * M ** (1.5 - sigma) / (sigma - 1.5)
    else:
        tail = math.inf
    return PartialSum(val, tail)


def _ray(t: float, split: float, q: int, slack: float) -> complex:
    if abs(t) <= 2.0 * slack / math.pi:
        phi = 0.0
    else:
        phi = math.copysign(math.pi / 2 - slack / abs(t), t)
    return split * cmath.exp(1j * phi) / q


def smoothed_L(L: TwistedL, s: complex, *, split: float = 1.0,
               slack: float = ROTATION_SLACK) -> LValue:
    """L(s, f, p/q) anywhere in the plane, with an absolute error estimate."""
    L.require_fe()
    s = complex(s)
    kappa = L.kappa
    w = s + (kappa - 1.0) / 2.0
    if w.imag == 0.0 and w.real <= 0.0 and w.real == math.floor(w.real):
        return LValue(0j, 0.0, 0)  # trivial zero: 1/Gamma(w) vanishes
    q = L.twist.q
    y0 = _ray(w.imag, split, q, slack)
    lg_w = lgamma_kernel(w)
    s1, abs1, n1, ok1 = _ray_sum(L.coef, L.env, L.logn, w, lg_w, lg_w, y0, False, TRUNC_RTOL)
    a2 = kappa - w
    a2_pole = a2.imag == 0.0 and a2.real <= 0.0 and a2.real == math.floor(a2.real)
    lg_a2 = 0j if a2_pole else lgamma_kernel(a2)
    y1 = 1.0 / (q * q * y0)
    s2, abs2, n2, ok2 = _ray_sum(L.coef_refl, L.env, L.logn, a2, lg_a2, lg_w, y1, a2_pole,
                                 TRUNC_RTOL)
    if not (ok1 and ok2):
        need = required_terms(kappa, q, abs(w.imag), split, slack)
        raise ConvergenceError(
            f"{L.table.count} coefficients are not enough at s = {s}; need about {need}",
            needed=max(need, 2 * L.table.count))
    pref = L.mu * cmath.exp((2.0 * w - kappa) * cmath.log(2.0 * math.pi / q))
    val = s1 + pref * s2
    err = 16.0 * EPS * (abs1 + abs(pref) * abs2) + EPS * abs(val)
    return LValue(complex(val), float(err), max(n1, n2))


def completed_scaled(L: TwistedL, s: complex, split: float = 1.0) -> tuple[complex, float]:
    """q^s (2 pi)^-s Gamma(s) L(s - (kappa-1)/2), i.e. M_0 tau / (2 cos(pi s/2))."""
    s = complex(s)
    lv = smoothed_L(L, s - (L.kappa - 1.0) / 2.0, split=split)
    fac = cmath.exp(s * (math.log(L.twist.q) - LOG_2PI) + lgamma_kernel(s))
    return fac * lv.value, abs(fac) * lv.err


def mellin_m0(L: TwistedL, s: complex, split: float = 1.0) -> complex:
    """M_0 tau_{p/q}(s) = q^s G_0(s) L(s - (kappa-1)/2, f, p/q)."""
    s = complex(s)
    if s.imag == 0.0 and s.real <= 0.0 and s.real == math.floor(s.real):
        raise ConvergenceError(f"G_0 has a pole at {s}")
    if s.imag == 0.0 and s.real % 2.0 == 1.0:
        return 0j  # cos(pi s/2) = 0 exactly
    lc = log_cos_kernel(math.pi * s / 2.0)
    if math.isinf(lc.real):
        return 0j
    lv = smoothed_L(L, s - (L.kappa - 1.0) / 2.0, split=split)
    logfac = math.log(2.0) + s * (math.log(L.twist.q) - LOG_2PI) + lgamma_kernel(s) + lc
    return cmath.exp(logfac) * lv.value


def fe_residual(L: TwistedL, s: complex) -> float:
    """Relative mismatch of the two sides of the functional equation at s.

    The sides are evaluated with different split points, so the value is not
    forced to vanish by construction.  For integral weight the common factor
    2 cos(pi s/2) (which equals +-2 cos(pi (kappa - s)/2)) is divided out of
    M_0 tau_{p/q}(s) = M_0 tau_{-p~/q}(kappa - s).
    """
    L.require_fe()
    s = complex(s)
    kappa = L.kappa
    lhs, _ = completed_scaled(L, s, FE_SPLITS[0])
    if L.spec.integral_weight:
        rhs, _ = completed_scaled(L.reflected, kappa - s, FE_SPLITS[1])
        rhs *= i_power(L.spec.weight2 // 2)  # (-1)^(kappa/2)
    else:
        other = smoothed_L(L.reflected, kappa / 2.0 + 0.5 - s, split=FE_SPLITS[1]).value
        fac = cmath.exp((s - kappa) * (LOG_2PI - math.log(L.twist.q)) + lgamma_kernel(kappa - s))
        rhs = closed_form_root(L.spec, L.twist) * fac * other
    denom = abs(lhs) + abs(rhs)
    return abs(lhs - rhs) / denom if denom > 0 else 0.0


def _critical_phase(L: TwistedL, t: float) -> complex:
    # (q/2pi)^(it) Gamma(kappa/2 + it)/|Gamma(kappa/2 + it)|
    lg = lgamma_kernel(complex(L.kappa / 2.0, t))
    return cmath.exp(1j * (t * (math.log(L.twist.q) - LOG_2PI) + lg.imag))


def _check_real(val: complex, err: float, t: float, real_tol: float):
    if abs(val.imag) > real_tol * abs(val) + 10.0 * err:
        raise RealnessViolation(f"Im Z = {val.imag:.3g} vs |Z| = {abs(val):.3g} at t = {t}", t)


def z_f(L: TwistedL, t: float, *, check_real: bool = True, real_tol: float = 1e-8) -> CriticalValue:
    """Real Z-function of an integral-weight form twisted by a self-inverse p/q.

    Z_f(t) = i^(-k/2) (q/2pi)^(it) Gamma(k/2+it)/|Gamma(k/2+it)| L(1/2+it); the
    cosine of the Mellin factor cancels analytically, so t = 0 needs no
    special treatment.
    """
    if not L.spec.integral_weight:
        raise HypothesisViolation("Z_f needs integral weight; use z_g")
    _require_real(L)
    lv = smoothed_L(L, complex(0.5, t))
    Z = i_power(-(L.spec.weight2 // 4)) * _critical_phase(L, t) * lv.value
    if check_real:
        _check_real(Z, lv.err, t, real_tol)
    return CriticalValue(float(t), lv.value, complex(Z), lv.err)


def _require_real(L: TwistedL):
    L.require_fe()
    if not L.twist.self_inverse:
        raise HypothesisViolation(f"{L.twist} is not self-inverse; Z is not real")
    if not L.table.is_real:
        raise HypothesisViolation("coefficients are not real")


def _sqrt_beta(L: TwistedL) -> complex:
    beta = arith.beta_pq(L.twist.p, L.twist.q, L.spec.k)
    return L._sqrt_beta_sign * cmath.sqrt(beta)


def z_g(L: TwistedL, t: float, *, check_real: bool = True, real_tol: float = 1e-8) -> CriticalValue:
    """Real Z-function for half-integral weight: beta^(1/2) i^(-kappa/2) times the phase times L."""
    if L.spec.integral_weight:
        raise HypothesisViolation("z_g needs half-integral weight; use z_f")
    _require_real(L)
    lv = smoothed_L(L, complex(0.5, t))
    Z = _sqrt_beta(L) * cmath.exp(-0.25j * math.pi * L.kappa) * _critical_phase(L, t) * lv.value
    if check_real:
        _check_real(Z, lv.err, t, real_tol)
    return CriticalValue(float(t), lv.value, complex(Z), lv.err)


def h_g(L: TwistedL, t: float) -> complex:
    """beta^(1/2) i^(-kappa/2) M_0 tau(kappa/2 + it) / (2 cos(pi (kappa/2 + it)/2))."""
    if L.spec.integral_weight:
        raise HypothesisViolation("h_g needs half-integral weight")
    _require_real(L)
    s = complex(L.kappa / 2.0, t)
    val, _ = completed_scaled(L, s)
    return _sqrt_beta(L) * cmath.exp(-0.25j * math.pi * L.kappa) * val


def z_function(L: TwistedL) -> Callable[[float], CriticalValue]:
    """z_f or z_g according to the weight."""
    if L.spec.integral_weight:
        return lambda t: z_f(L, t)
    return lambda t: z_g(L, t)


def literal_z_f(L: TwistedL, t: float) -> complex:
    """Z_f through M_0 tau, |Gamma| and the cosine, as written in closed form.

    Fails with CosineZero where the cosine vanishes; used to cross-check z_f.
    """
    s = complex(L.kappa / 2.0, t)
    cosv = cmath.cos(math.pi * s / 2.0)
    if abs(cosv) == 0.0 or (t == 0.0 and (L.spec.weight2 // 4) % 2 == 1):
        raise CosineZero(f"cos(pi s/2) vanishes at t = {t}")
    m0 = mellin_m0(L, s)
    gam = abs(cmath.exp(lgamma_kernel(s)))
    return (i_power(-(L.spec.weight2 // 4)) * (2.0 * math.pi) ** (L.kappa / 2.0)
            * L.twist.q ** (-L.kappa / 2.0) * m0 / (2.0 * cosv * gam))


def two_phase_lower_bound(theta1: float, theta2: float, alpha: complex, beta: complex) -> float:
    """Lower bound |sin(theta2 - theta1)| (|alpha| + |beta|) / 2 for |alpha e^{i theta1} + beta e^{i theta2}|."""
    return abs(math.sin(theta2 - theta1)) * (abs(alpha) + abs(beta)) / 2.0
