"""Complex Gamma, incomplete Gamma and the Mellin Gamma factors G_delta.

The scalar kernels are numba-compiled because the L-function evaluator
calls the regularized upper incomplete Gamma function millions of times.
"""

from __future__ import annotations

import cmath
import math

import numba as nb
import numpy as np

from .errors import ConvergenceError, GammaOverflowError, PoleError

LANCZOS_G = 607.0 / 128.0
LANCZOS_COEF = np.array([
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
])

LOG_2PI = math.log(2.0 * math.pi)
MAX_IMAG = 700.0  # beyond this cos(pi s/2) alone overflows a double
_EPS = 2.220446049250313e-16


@nb.njit(cache=True, nogil=True)
def _log_sin_pi(z):
    # log(sin(pi z)) without overflow for large |Im z|
    w = math.pi * z
    if w.imag > 0:
        return -1j * w + cmath.log(1.0 - cmath.exp(2j * w)) - cmath.log(-2j)
    return 1j * w + cmath.log(1.0 - cmath.exp(-2j * w)) - cmath.log(2j)


@nb.njit(cache=True, nogil=True)
def lgamma_kernel(z):
    """Principal-ish log Gamma (continuous in Im z on each half plane)."""
    if z.real < 0.5:
        return math.log(math.pi) - _log_sin_pi(z) - lgamma_kernel(1.0 - z)
    z = z - 1.0
    x = LANCZOS_COEF[0] + 0j
    for i in range(1, 15):
        x += LANCZOS_COEF[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return 0.5 * LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


@nb.njit(cache=True, nogil=True)
def log_cos_kernel(z):
    """log cos z, stable for large |Im z|; returns -inf real part at zeros."""
    if z.imag >= 0:
        v = 1.0 + cmath.exp(2j * z)
        if v == 0:
            return complex(-np.inf, 0.0)
        return -1j * z + cmath.log(v) - math.log(2.0)
    v = 1.0 + cmath.exp(-2j * z)
    if v == 0:
        return complex(-np.inf, 0.0)
    return 1j * z + cmath.log(v) - math.log(2.0)


@nb.njit(cache=True, nogil=True)
def lower_series_kernel(a, z, max_iter):
    # sum_{j>=0} z^j / ((a+1)...(a+j)); converged flag in the last slot
    term = 1.0 + 0j
    s = term
    for j in range(1, max_iter):
        term *= z / (a + j)
        s += term
        if abs(term) < 1e-17 * abs(s):
            return s, j, True
    return s, max_iter, False


@nb.njit(cache=True, nogil=True)
def upper_cf_kernel(a, z, max_iter):
    # modified Lentz for Gamma(a,z) = z^a e^{-z} * h
    tiny = 1e-300
    b = z + 1.0 - a
    c = 1.0 / tiny + 0j
    d = 1.0 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h, i, True
    return h, max_iter, False


@nb.njit(cache=True, nogil=True)
def reg_upper_kernel(a, z, lga):
    """Q(a, z) = Gamma(a, z)/Gamma(a) for Re z > 0; lga = log Gamma(a).

    Returns (value, ok).
    """
    lz = cmath.log(z)
    if abs(z) < abs(a) + 1.0:
        s, _, ok = lower_series_kernel(a, z, 200000)
        p = cmath.exp(a * lz - z - lga - cmath.log(a)) * s
        return 1.0 - p, ok
    h, _, ok = upper_cf_kernel(a, z, 200000)
    return cmath.exp(a * lz - z - lga) * h, ok


def _is_nonpositive_integer(s: complex) -> bool:
    return s.imag == 0.0 and s.real <= 0.0 and s.real == math.floor(s.real)


def log_gamma(s: complex) -> complex:
    """log Gamma(s), the branch continuous on each open half plane Im s > 0 / < 0."""
    s = complex(s)
    if _is_nonpositive_integer(s):
        raise PoleError(f"Gamma has a pole at {s}")
    return complex(lgamma_kernel(s))


def complex_gamma(s: complex) -> complex:
    """Gamma(s) for complex s (Lanczos with reflection).

    Relative error is about 1e-13 for |Im s| <= 200.
    """
    s = complex(s)
    if _is_nonpositive_integer(s):
        raise PoleError(f"Gamma has a pole at {s}")
    lg = lgamma_kernel(s)
    if lg.real > 709.0:
        raise GammaOverflowError(f"Gamma({s}) overflows a double")
    return cmath.exp(lg)


def regularized_upper_gamma(a: complex, z: complex) -> complex:
    """Q(a, z) = Gamma(a, z)/Gamma(a) for complex a and Re z > 0."""
    a, z = complex(a), complex(z)
    if z.real <= 0:
        raise ValueError("need Re z > 0")
    if _is_nonpositive_integer(a):
        return 0.0 + 0j
    val, ok = reg_upper_kernel(a, z, lgamma_kernel(a))
    if not ok:
        raise ConvergenceError(f"incomplete gamma Q({a}, {z}) did not converge")
    return complex(val)


def upper_incomplete_gamma(s: complex, x: float) -> complex:
    """Gamma(s, x) for complex s and real x > 0.

    Series for the lower function when x < |s| + 1, continued fraction
    otherwise.  Nonpositive integer s always uses the continued fraction.
    """
    s = complex(s)
    x = float(x)
    if not x > 0:
        raise ValueError("x must be positive")
    lx = math.log(x)
    if _is_nonpositive_integer(s) or x >= abs(s) + 1.0:
        h, _, ok = upper_cf_kernel(s, complex(x), 1_000_000)
        if not ok:
            raise ConvergenceError(f"continued fraction for Gamma({s}, {x}) did not converge")
        return complex(cmath.exp(s * lx - x) * h)
    series, _, ok = lower_series_kernel(s, complex(x), 1_000_000)
    if not ok:
        raise ConvergenceError(f"series for gamma({s}, {x}) did not converge")
    lg = lgamma_kernel(s)
    p = cmath.exp(s * lx - x - lg - cmath.log(s)) * series
    return complex(cmath.exp(lg) * (1.0 - p))


def log_cos(z: complex) -> complex:
    return complex(log_cos_kernel(complex(z)))


def log_g_delta(s: complex, delta: int) -> complex:
    """log G_delta(s); -inf real part where the cosine vanishes."""
    s = complex(s)
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    if abs(s.imag) > MAX_IMAG:
        raise GammaOverflowError(f"|Im s| = {abs(s.imag)} exceeds {MAX_IMAG}")
    if _is_nonpositive_integer(s):
        raise PoleError(f"Gamma has a pole at {s}")
    lc = log_cos_kernel(math.pi * (s - delta) / 2.0)
    return math.log(2.0) + delta * (0.5j * math.pi) - s * LOG_2PI + lgamma_kernel(s) + lc


def g_delta(s: complex, delta: int) -> complex:
    """G_delta(s) = 2 i^delta (2 pi)^-s Gamma(s) cos(pi (s - delta)/2)."""
    s = complex(s)
    if s.imag == 0.0 and (s.real - delta) % 2.0 == 1.0:
        # cos vanishes exactly; guard poles first
        if _is_nonpositive_integer(s):
            raise PoleError(f"Gamma has a pole at {s}")
        return 0j
    lg = log_g_delta(s, delta)
    if lg.real > 709.0:
        raise GammaOverflowError(f"G_{delta}({s}) overflows a double")
    val = cmath.exp(lg)
    if s.imag == 0.0:
        # real for delta = 0, purely imaginary for delta = 1
        val = complex(val.real, 0.0) if delta == 0 else complex(0.0, val.imag)
    return val


def g0_modulus_asymptotic(sigma: float, t: float) -> float:
    """Leading Stirling term (|t|/2pi)^(sigma - 1/2) of |G_0(sigma + it)|."""
    if abs(t) < 1.0:
        raise ValueError("asymptotic form needs |t| >= 1")
    return (abs(t) / (2.0 * math.pi)) ** (sigma - 0.5)
