"""Exact rational and modular arithmetic for additive twists.

Covers reduced fractions p/q, the matrices of Gamma_0(N) sending infinity
to a cusp, Shimura's extended Jacobi symbol and the theta multiplier
constants.  Nothing here touches floating point except the root-of-unity
table, whose angles are reduced mod q in exact integer arithmetic first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvenDenominator, EvenInput, EvenP, NotCoprime, ZeroArgument, ZeroDenominator

_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)


def i_power(m: int) -> complex:
    """i**m exactly, for any integer m."""
    return _I_POWERS[m % 4]


@dataclass(frozen=True)
class ReducedRational:
    p: int
    q: int

    def __post_init__(self):
        if self.q <= 0:
            raise ZeroDenominator("denominator must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise NotCoprime(f"{self.p}/{self.q} is not reduced")

    def __str__(self):
        return f"{self.p}/{self.q}"


def reduce(p: int, q: int) -> ReducedRational:
    """Reduce p/q to lowest terms with a positive denominator."""
    if q == 0:
        raise ZeroDenominator("q = 0")
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if q < 0:
        p, q = -p, -q
    return ReducedRational(p, q)


def parse_fraction(text: str) -> ReducedRational:
    """Parse 'p/q' (or an integer) into a reduced fraction."""
    text = text.strip()
    if "/" in text:
        a, b = text.split("/", 1)
        return reduce(int(a), int(b))
    return reduce(int(text), 1)


def mod_inverse(p: int, q: int) -> int:
    """The inverse of p mod q in [0, q)."""
    if q <= 0:
        raise ZeroDenominator("modulus must be positive")
    if math.gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p}, {q}) != 1")
    return pow(p, -1, q) if q > 1 else 0


def is_self_inverse(p: int, q: int) -> bool:
    if q <= 0:
        raise ZeroDenominator("modulus must be positive")
    if math.gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p}, {q}) != 1")
    return (p * p - 1) % q == 0


@dataclass(frozen=True)
class CuspMatrix:
    """An integer matrix (a b; c d) of determinant one."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self} is not 1")

    def act(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def in_gamma0(self, level: int) -> bool:
        return self.c % level == 0

    def __matmul__(self, other: CuspMatrix) -> CuspMatrix:
        return CuspMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )


def cusp_matrix(cusp: ReducedRational) -> CuspMatrix:
    """gamma = (p r; q p~) with p p~ = 1 mod q, so gamma(infinity) = p/q."""
    p, q = cusp.p, cusp.q
    pt = mod_inverse(p, q)
    r = (p * pt - 1) // q
    return CuspMatrix(p, r, q, pt)


def is_equiv_infinity(cusp: ReducedRational, level: int) -> bool:
    """p/q is Gamma_0(N)-equivalent to infinity iff N divides q."""
    if level <= 0:
        raise ValueError("level must be positive")
    return cusp.q % level == 0


def _jacobi_positive(a: int, n: int) -> int:
    # standard Jacobi symbol (a/n) for odd n > 0
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def jacobi_extended(c: int, d: int) -> int:
    """Shimura's extension of the Jacobi symbol (c/d) to odd d of either sign.

    (0/+-1) = 1, (c/d) = 0 when gcd(c, d) > 1, and for d < 0 the value is
    (c/|d|), negated when c < 0.
    """
    if d % 2 == 0:
        raise EvenDenominator(f"(c/d) needs odd d, got {d}")
    if math.gcd(c, d) != 1:
        return 0
    val = _jacobi_positive(c, abs(d))
    if d < 0 and c < 0:
        val = -val
    return val


def epsilon_d(d: int) -> complex:
    """1 if d = 1 mod 4, i if d = 3 mod 4."""
    if d % 2 == 0:
        raise EvenInput(f"epsilon_d needs odd d, got {d}")
    return 1 + 0j if d % 4 == 1 else 1j


def _epsilon_index(d: int) -> int:
    # epsilon_d = i**_epsilon_index(d)
    return 0 if d % 4 == 1 else 1


def theta_multiplier(c: int, d: int, k: int) -> complex:
    """(c/d)^(2k+1) eps_d^(-1-2k): the constant part of the weight k+1/2 factor."""
    sym = jacobi_extended(c, d)
    return sym ** (2 * k + 1) * i_power(-(1 + 2 * k) * _epsilon_index(d))


def hilbert_real(x: float, y: float) -> int:
    """Hilbert symbol at the real place: -1 iff both arguments are negative."""
    if x == 0 or y == 0:
        raise ZeroArgument("Hilbert symbol of zero")
    return -1 if (x < 0 and y < 0) else 1


def beta_pq(p: int, q: int, k: int) -> complex:
    """beta = (-q/p)^(2k+1) eps_p^(-1-2k) for odd p coprime to q."""
    if p % 2 == 0:
        raise EvenP(f"p must be odd, got {p}")
    if math.gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p}, {q}) != 1")
    return theta_multiplier(-q, p, k)


def root_of_unity(num: int, den: int) -> complex:
    """e(num/den), exact at multiples of a quarter turn."""
    r = num % den
    if (4 * r) % den == 0:
        return _I_POWERS[(4 * r) // den]
    ang = 2.0 * math.pi * r / den
    return complex(math.cos(ang), math.sin(ang))


@dataclass(frozen=True)
class Twist:
    """An additive twist n -> e(n p/q) together with the data its FE needs."""

    cusp: ReducedRational
    level: int
    p_tilde: int
    unit_roots: tuple = field(repr=False, compare=False)

    @property
    def p(self) -> int:
        return self.cusp.p

    @property
    def q(self) -> int:
        return self.cusp.q

    @property
    def equiv_infinity(self) -> bool:
        return is_equiv_infinity(self.cusp, self.level)

    @property
    def self_inverse(self) -> bool:
        return is_self_inverse(self.p, self.q)

    def reflected(self) -> Twist:
        """The twist by -p~/q appearing on the other side of the FE."""
        return make_twist(-self.p_tilde, self.q, self.level)

    def coefficient_phases(self, count: int) -> np.ndarray:
        """e(n p/q) for n = 1..count."""
        roots = np.asarray(self.unit_roots, dtype=complex)
        return roots[np.arange(1, count + 1) % self.q]

    def __str__(self):
        return str(self.cusp)


def make_twist(p: int, q: int, level: int) -> Twist:
    cusp = reduce(p, q)
    if cusp != ReducedRational(p, q):
        raise NotCoprime(f"{p}/{q} is not reduced")
    if level <= 0:
        raise ValueError("level must be positive")
    pt = mod_inverse(cusp.p, cusp.q)
    roots = tuple(root_of_unity(r * cusp.p, cusp.q) for r in range(cusp.q))
    return Twist(cusp, level, pt, roots)


def root_of_unity_table(twist: Twist) -> np.ndarray:
    """Entry r is e(r p/q); the table has period q by construction."""
    return np.asarray(twist.unit_roots, dtype=complex)


def random_gamma0(level: int, rng: np.random.Generator, cmax: int = 64) -> CuspMatrix:
    """A random element of Gamma_0(level) with 0 < |c| <= cmax and |d| <= |c|/2."""
    while True:
        c = level * int(rng.integers(1, max(1, cmax // level) + 1))
        if rng.integers(0, 2):
            c = -c
        d = int(rng.integers(-abs(c) // 2, abs(c) // 2 + 1))
        if math.gcd(c, d) != 1:
            continue
        # a d - b c = 1
        a = pow(d, -1, abs(c)) if abs(c) > 1 else 0
        b = (a * d - 1) // c
        return CuspMatrix(a, b, c, d)
