"""Exact q-expansion coefficients of eta quotients and theta products.

Series arithmetic is done on Python/gmpy2 integers.  Truncated products use
Kronecker substitution: both operands are packed into one huge integer,
multiplied by GMP, and unpacked again, which is far faster than a quadratic
convolution once the truncation reaches a few thousand terms.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import gmpy2
import numpy as np

from .arith import CuspMatrix, theta_multiplier
from .errors import (FormSpecError, InsufficientTruncation, NonIntegralPrefactor, ParseError,
                     WeightMismatch)

# ---------------------------------------------------------------------------
# integer power series


def _pack(coeffs, nbytes: int) -> int:
    pos = b"".join((x if x > 0 else 0).to_bytes(nbytes, "little") for x in coeffs)
    neg = b"".join((-x if x < 0 else 0).to_bytes(nbytes, "little") for x in coeffs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _kronecker_mul(a: list[int], b: list[int], n: int) -> list[int]:
    """First n coefficients of the product of two integer series."""
    a, b = a[:n], b[:n]
    if not a or not b:
        return [0] * n
    bound = max(abs(x) for x in a) * max(abs(x) for x in b) * min(len(a), len(b))
    if bound == 0:
        return [0] * n
    nbytes = (bound.bit_length() + 2 + 7) // 8
    prod = gmpy2.mpz(_pack(a, nbytes)) * gmpy2.mpz(_pack(b, nbytes))
    half = 1 << (8 * nbytes - 1)
    offset = int.from_bytes(half.to_bytes(nbytes, "little") * n, "little")
    total = (int(prod) + offset) & ((1 << (8 * nbytes * n)) - 1)
    raw = total.to_bytes(nbytes * n, "little")
    out = [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - half for i in range(n)]
    return out


@dataclass(frozen=True)
class PowerSeries:
    """Integer power series sum_{m < prec} coeffs[m] q^m, truncated at prec."""

    coeffs: tuple
    prec: int

    def __post_init__(self):
        if len(self.coeffs) != self.prec:
            object.__setattr__(self, "coeffs", tuple(self.coeffs[:self.prec])
                               + (0,) * max(0, self.prec - len(self.coeffs)))

    def __getitem__(self, m: int) -> int:
        return self.coeffs[m] if 0 <= m < self.prec else 0

    def __len__(self):
        return self.prec

    def __mul__(self, other: PowerSeries) -> PowerSeries:
        n = min(self.prec, other.prec)
        return PowerSeries(tuple(_kronecker_mul(list(self.coeffs), list(other.coeffs), n)), n)

    def __pow__(self, e: int) -> PowerSeries:
        if e < 0:
            raise ValueError("use inverse() for negative powers")
        result = PowerSeries((1,), self.prec)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def inverse(self) -> PowerSeries:
        """1/self by Newton iteration; needs a unit constant term."""
        c0 = self.coeffs[0]
        if c0 not in (1, -1):
            raise ValueError("constant term must be +-1")
        g = [c0]
        k = 1
        src = list(self.coeffs)
        while k < self.prec:
            k = min(2 * k, self.prec)
            e = [-x for x in _kronecker_mul(src, g, k)]
            e[0] += 2
            g = _kronecker_mul(g, e, k)
        return PowerSeries(tuple(g), self.prec)

    def shift(self, k: int) -> PowerSeries:
        """Multiply by q^k (k >= 0), keeping the precision."""
        return PowerSeries((0,) * k + self.coeffs[:self.prec - k], self.prec)

    def dilate(self, m: int) -> PowerSeries:
        """Substitute q -> q^m."""
        out = [0] * self.prec
        for i in range(0, (self.prec - 1) // m + 1):
            out[i * m] = self.coeffs[i]
        return PowerSeries(tuple(out), self.prec)


def euler_product(prec: int) -> PowerSeries:
    """prod_{n>=1} (1 - q^n) via the pentagonal number theorem."""
    out = [0] * prec
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        hit = False
        for g in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2):
            if g < prec:
                out[g] = sign
                hit = True
        if not hit:
            break
        k += 1
    return PowerSeries(tuple(out), prec)


def partition_series(prec: int) -> PowerSeries:
    """prod (1 - q^n)^-1 = sum p(n) q^n via Euler's recurrence."""
    p = [0] * prec
    p[0] = 1
    for n in range(1, prec):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > n:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[n - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    return PowerSeries(tuple(p), prec)


def theta_coeffs(M: int) -> PowerSeries:
    """theta(z) = sum_{n in Z} q^(n^2) up to and including q^M."""
    out = [0] * (M + 1)
    out[0] = 1
    n = 1
    while n * n <= M:
        out[n * n] = 2
        n += 1
    return PowerSeries(tuple(out), M + 1)


# ---------------------------------------------------------------------------
# form descriptions


@dataclass(frozen=True)
class EtaQuotient:
    """prod_m eta(m z)^e_m, stored as sorted (m, e) pairs."""

    factors: tuple

    def __post_init__(self):
        merged: dict[int, int] = {}
        for m, e in self.factors:
            if m <= 0:
                raise FormSpecError(f"eta argument multiplier must be positive, got {m}")
            merged[m] = merged.get(m, 0) + e
        object.__setattr__(self, "factors", tuple(sorted((m, e) for m, e in merged.items() if e)))
        if not self.factors:
            raise FormSpecError("empty eta quotient")

    @property
    def weight2(self) -> int:
        return sum(e for _, e in self.factors)

    @property
    def order24(self) -> int:
        """24 times the order of vanishing at infinity."""
        return sum(m * e for m, e in self.factors)

    def text(self) -> str:
        return "*".join(f"{m}^{e}" for m, e in self.factors)


@dataclass(frozen=True)
class ThetaTimesEta:
    eta: EtaQuotient

    @property
    def weight2(self) -> int:
        return 1 + self.eta.weight2


@dataclass(frozen=True)
class CoefficientFile:
    path: str


def eta_level(eta: EtaQuotient, with_theta: bool = False) -> int:
    """Smallest N meeting the usual eta-quotient level conditions."""
    base = math.lcm(*(m for m, _ in eta.factors))
    if with_theta:
        base = math.lcm(base, 4)
    for mult in range(1, 24 * 4 + 1):
        n = base * mult
        if eta.order24 % 24:
            break
        if sum((n // m) * e for m, e in eta.factors) % 24 == 0:
            return n
    return base


@dataclass(frozen=True)
class FormSpec:
    weight2: int
    level: int
    source: object
    label: str

    def __post_init__(self):
        if self.level <= 0:
            raise FormSpecError("level must be positive")
        if self.weight2 <= 0:
            raise FormSpecError("weight must be positive")
        if self.weight2 % 2 and self.level % 4:
            raise FormSpecError("half-integral weight needs 4 | level")
        src = self.source
        if isinstance(src, EtaQuotient):
            if src.weight2 != self.weight2:
                raise FormSpecError(f"eta quotient has weight2 {src.weight2}, not {self.weight2}")
            _check_prefactor(src)
        elif isinstance(src, ThetaTimesEta):
            if src.weight2 != self.weight2:
                raise FormSpecError(f"theta*eta has weight2 {src.weight2}, not {self.weight2}")
            _check_prefactor(src.eta)
        elif not isinstance(src, CoefficientFile):
            raise FormSpecError(f"unknown source {src!r}")

    @property
    def kappa(self) -> float:
        return self.weight2 / 2.0

    @property
    def integral_weight(self) -> bool:
        return self.weight2 % 2 == 0

    @property
    def k(self) -> int:
        """k with kappa = k (integral weight) or kappa = k + 1/2."""
        return self.weight2 // 2


def _check_prefactor(eta: EtaQuotient) -> None:
    if eta.order24 % 24 or eta.order24 < 0:
        raise NonIntegralPrefactor(
            f"sum m*e / 24 = {eta.order24}/24 is not a nonnegative integer")


_ETA_RE = re.compile(r"^(\d+)\^(-?\d+)$")


def _parse_eta(body: str) -> EtaQuotient:
    factors = []
    for part in body.split("*"):
        mt = _ETA_RE.match(part.strip())
        if not mt:
            raise FormSpecError(f"bad eta factor {part!r}; expected m^e")
        factors.append((int(mt.group(1)), int(mt.group(2))))
    return EtaQuotient(tuple(factors))


def parse_form(text: str, level: int | None = None, weight2: int | None = None) -> FormSpec:
    """Parse the form mini-language.

    ``eta:1^24``                 an eta quotient (here Delta)
    ``theta*eta:4^6``            theta(z) times an eta quotient
    ``file:PATH``                a coefficient file (weight/level from its header)
    """
    text = text.strip()
    if text.startswith("eta:"):
        eta = _parse_eta(text[4:])
        lvl = level or eta_level(eta)
        return FormSpec(weight2 or eta.weight2, lvl, eta, text)
    if text.startswith("theta*eta:"):
        eta = _parse_eta(text[len("theta*eta:"):])
        src = ThetaTimesEta(eta)
        lvl = level or eta_level(eta, with_theta=True)
        return FormSpec(weight2 or src.weight2, lvl, src, text)
    if text.startswith("file:"):
        path = text[5:]
        header = read_header(path)
        return FormSpec(weight2 or header["weight2"], level or header["level"],
                        CoefficientFile(path), header["label"])
    raise FormSpecError(f"cannot parse form {text!r}")


DELTA = "eta:1^24"
THETA_ETA6 = "theta*eta:4^6"

# ---------------------------------------------------------------------------
# coefficient tables


@dataclass(frozen=True, eq=False)
class CoeffTable:
    """c_n for n = 1..M (index 0 holds n = 1) and a_n = c_n n^-(kappa-1)/2."""

    weight2: int
    level: int
    label: str
    c: np.ndarray
    a: np.ndarray
    exact: tuple | None = None

    @property
    def count(self) -> int:
        return len(self.c)

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.c.imag == 0))

    def exact_coeff(self, n: int) -> int:
        if self.exact is None:
            raise ValueError("table has no exact coefficients")
        return self.exact[n - 1]


def normalize(c: np.ndarray, weight2: int) -> np.ndarray:
    n = np.arange(1, len(c) + 1, dtype=float)
    return np.asarray(c, dtype=complex) * n ** (-(weight2 / 2.0 - 1.0) / 2.0)


def _table_from_ints(ints, weight2, level, label) -> CoeffTable:
    c = np.array([float(x) for x in ints], dtype=complex)
    return CoeffTable(weight2, level, label, c, normalize(c, weight2), tuple(int(x) for x in ints))


def eta_series(eta: EtaQuotient, prec: int) -> PowerSeries:
    """prod (prod_n (1 - q^(m n)))^e to precision prec, without the q^(order/24) shift."""
    result = PowerSeries((1,), prec)
    base = euler_product(prec)
    inv = None
    for m, e in eta.factors:
        if e > 0:
            factor = base.dilate(m) ** e
        else:
            if inv is None:
                inv = base.inverse()
            factor = inv.dilate(m) ** (-e)
        result = result * factor
    return result


def eta_quotient_coeffs(eta: EtaQuotient, M: int, level: int | None = None,
                        label: str | None = None) -> CoeffTable:
    """Exact c_1..c_M of prod eta(m z)^e_m."""
    if eta.order24 % 24 or eta.order24 < 24:
        raise NonIntegralPrefactor(
            f"sum m*e / 24 = {eta.order24}/24 must be an integer >= 1")
    shift = eta.order24 // 24
    series = eta_series(eta, M + 1).shift(shift)
    ints = series.coeffs[1:M + 1]
    return _table_from_ints(ints, eta.weight2, level or eta_level(eta), label or "eta:" + eta.text())


def theta_eta_coeffs(src: ThetaTimesEta, M: int, level: int | None = None,
                     label: str | None = None) -> CoeffTable:
    eta = src.eta
    if eta.order24 % 24 or eta.order24 < 24:
        raise NonIntegralPrefactor("eta part must vanish to integral order >= 1")
    series = eta_series(eta, M + 1).shift(eta.order24 // 24) * theta_coeffs(M)
    ints = series.coeffs[1:M + 1]
    return _table_from_ints(ints, src.weight2, level or eta_level(eta, True),
                            label or "theta*eta:" + eta.text())


def form_coeffs(spec: FormSpec, M: int) -> CoeffTable:
    """c_1..c_M for any FormSpec source."""
    if M < 1:
        raise ValueError("M must be >= 1")
    src = spec.source
    if isinstance(src, EtaQuotient):
        return eta_quotient_coeffs(src, M, spec.level, spec.label)
    if isinstance(src, ThetaTimesEta):
        return theta_eta_coeffs(src, M, spec.level, spec.label)
    table = load_coeffs(src.path, expect=spec)
    if table.count < M:
        raise InsufficientTruncation(f"{src.path} holds {table.count} coefficients, {M} requested")
    return CoeffTable(table.weight2, spec.level, table.label, table.c[:M].copy(), table.a[:M].copy())


# ---------------------------------------------------------------------------
# evaluation and automorphy


def truncation_tail_bound(table: CoeffTable, y: float) -> float:
    """Bound on sum_{n>M} |c_n| e^(-2 pi n y) from a fitted C n^kappa envelope."""
    M = table.count
    n = np.arange(1, M + 1, dtype=float)
    nu = table.weight2 / 2.0
    C = float(np.max(np.abs(table.c) / n ** nu))
    r = math.exp(-2.0 * math.pi * y)
    rho = ((M + 2.0) / (M + 1.0)) ** nu * r
    if rho >= 1.0:
        return math.inf
    first = C * math.exp(nu * math.log(M + 1.0) - 2.0 * math.pi * y * (M + 1.0))
    return first / (1.0 - rho)


def eval_form(table: CoeffTable, z: complex, rtol: float = 1e-12) -> complex:
    """f(z) = sum c_n e(n z), raising if the truncation tail may exceed rtol."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("need Im z > 0")
    n = np.arange(1, table.count + 1, dtype=float)
    frac = (n * z.real) % 1.0
    terms = table.c * np.exp(2j * math.pi * frac - 2.0 * math.pi * n * z.imag)
    val = complex(np.sum(terms))
    tail = truncation_tail_bound(table, z.imag)
    if tail > rtol * max(abs(val), 1e-300):
        raise InsufficientTruncation(
            f"tail bound {tail:.3g} vs |f| {abs(val):.3g} at Im z = {z.imag:.3g}; "
            f"M = {table.count} is too small")
    return val


def automorphy_factor(spec: FormSpec, gamma: CuspMatrix, z: complex) -> complex:
    cz_d = gamma.c * z + gamma.d
    if spec.integral_weight:
        return cz_d ** (spec.weight2 // 2)
    k = spec.k
    return theta_multiplier(gamma.c, gamma.d, k) * np.sqrt(complex(cz_d)) ** (2 * k + 1)


def verify_automorphy(spec: FormSpec, table: CoeffTable, gamma: CuspMatrix, z: complex) -> float:
    """Relative residual |f(gamma z) - j(gamma, z) f(z)| / |f(gamma z)|."""
    if not gamma.in_gamma0(spec.level):
        raise ValueError(f"{gamma} is not in Gamma_0({spec.level})")
    lhs = eval_form(table, gamma.act(z))
    rhs = automorphy_factor(spec, gamma, z) * eval_form(table, z)
    return abs(lhs - rhs) / abs(lhs)


# ---------------------------------------------------------------------------
# coefficient files

_HEADER_RE = re.compile(
    r"^# twistzero-coeffs v1 weight2=(-?\d+) level=(\d+) label=(.*) count=(\d+)\s*$")


def save_coeffs(table: CoeffTable, path) -> None:
    lines = [f"# twistzero-coeffs v1 weight2={table.weight2} level={table.level} "
             f"label={table.label} count={table.count}"]
    for n, cn in enumerate(table.c, start=1):
        lines.append(f"{n} {cn.real:.16e} {cn.imag:.16e}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_header(path) -> dict:
    with open(path) as fh:
        first = fh.readline()
    mt = _HEADER_RE.match(first.rstrip("\n"))
    if not mt:
        raise ParseError("missing or malformed twistzero-coeffs header", 1)
    return {"weight2": int(mt.group(1)), "level": int(mt.group(2)),
            "label": mt.group(3), "count": int(mt.group(4))}


def load_coeffs(path, expect: FormSpec | None = None) -> CoeffTable:
    """Read a coefficient file; ParseError carries the offending line number."""
    text = Path(path).read_text().split("\n")
    head = _HEADER_RE.match(text[0]) if text else None
    if not head:
        raise ParseError("missing or malformed twistzero-coeffs header", 1)
    weight2, level, label, count = (int(head.group(1)), int(head.group(2)),
                                    head.group(3), int(head.group(4)))
    if expect is not None and expect.weight2 != weight2:
        raise WeightMismatch(f"file has weight2={weight2}, form expects {expect.weight2}")
    c = np.empty(count, dtype=complex)
    for i in range(count):
        lineno = i + 2
        if lineno - 1 >= len(text) or not text[lineno - 1].strip():
            raise ParseError(f"expected coefficient {i + 1} of {count}", lineno)
        parts = text[lineno - 1].split()
        if len(parts) != 3:
            raise ParseError(f"expected 'n re im', got {text[lineno - 1]!r}", lineno)
        try:
            n, re_, im_ = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if n != i + 1:
            raise ParseError(f"expected index {i + 1}, got {n}", lineno)
        c[i] = complex(re_, im_)
    for j in range(count + 1, len(text)):
        if text[j].strip():
            raise ParseError("trailing data after the declared count", j + 1)
    return CoeffTable(weight2, level, label, c, normalize(c, weight2))
