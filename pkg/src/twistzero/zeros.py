"""Sign-change scanning and bisection for zeros of real Z-functions."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import LostBracket, RealnessViolation
from .lfun import CriticalValue, TwistedL, parallel_map, smoothed_L, z_function

log = logging.getLogger(__name__)

DEFAULT_STEP = 0.05


@dataclass(frozen=True)
class Bracket:
    t_lo: float
    t_hi: float
    z_lo: float
    z_hi: float


@dataclass(frozen=True)
class Zero:
    t: float
    abs_L: float
    width: float


@dataclass
class ZeroReport:
    label: str
    twist: str
    t0: float
    t1: float
    step: float
    brackets: list = field(default_factory=list)
    zeros: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "form": self.label,
            "twist": self.twist,
            "window": [self.t0, self.t1],
            "step": self.step,
            "brackets": [asdict(b) for b in self.brackets],
            "zeros": [asdict(z) for z in self.zeros],
            "warnings": list(self.warnings),
        }


def _sample(Zfun: Callable, t: float, real_tol: float) -> tuple[float, float]:
    """Value and noise level of one sample; checks realness of complex output."""
    r = Zfun(t)
    noise = 0.0
    if isinstance(r, CriticalValue):
        r, noise = r.Z, r.err_est
    if isinstance(r, complex):
        if abs(r.imag) > real_tol * abs(r) + 10.0 * noise:
            raise RealnessViolation(f"Z({t}) = {r} is not real", t)
        r = r.real
    return float(r), noise


def sample_points(t0: float, t1: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError("step must be positive")
    if t1 < t0:
        raise ValueError("need t0 <= t1")
    n = int(math.floor((t1 - t0) / step + 1e-9))
    return t0 + step * np.arange(n + 1)


def scan(Zfun: Callable, t0: float, t1: float, step: float, *, noise_floor: float = 0.0,
         real_tol: float = 1e-6) -> list[Bracket]:
    """Brackets [t_lo, t_hi] around every strict sign change on the sample grid.

    Samples whose magnitude does not exceed the noise floor (or their own
    error estimate) carry no reliable sign; they are skipped and logged.
    """
    ts = sample_points(t0, t1, step)
    samples = parallel_map(lambda t: _sample(Zfun, float(t), real_tol), ts)
    brackets = []
    prev = None
    for t, (z, noise) in zip(ts, samples):
        if abs(z) <= max(noise_floor, noise):
            log.info("skipping sample t=%.17g with |Z|=%.3g below noise", t, abs(z))
            continue
        if prev is not None and (prev[1] > 0) != (z > 0):
            brackets.append(Bracket(prev[0], float(t), prev[1], z))
        prev = (float(t), z)
    return brackets


def refine_bracket(Zfun: Callable, bracket: Bracket, tol: float, *, noise_floor: float = 0.0,
                   real_tol: float = 1e-6) -> Bracket:
    """Bisect until the width is at most tol; returns the final bracket."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi, zlo, zhi = bracket.t_lo, bracket.t_hi, bracket.z_lo, bracket.z_hi
    if (zlo > 0) == (zhi > 0):
        raise LostBracket("endpoints have the same sign", bracket)
    width = hi - lo
    iters = max(0, math.ceil(math.log2(width / tol))) if width > tol else 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise LostBracket(f"width {tol:.3g} is below the floating-point spacing at t = {mid:.17g}",
                              bracket)
        zm, noise = _sample(Zfun, mid, real_tol)
        if zm == 0.0:
            return Bracket(mid, mid, 0.0, 0.0)
        if abs(zm) <= max(noise_floor, noise):
            raise LostBracket(
                f"|Z({mid:.17g})| = {abs(zm):.3g} is below its error estimate {noise:.3g}", bracket)
        if (zm > 0) == (zlo > 0):
            lo, zlo = mid, zm
        else:
            hi, zhi = mid, zm
    return Bracket(lo, hi, zlo, zhi)


def refine(Zfun: Callable, bracket: Bracket, tol: float, **kw) -> float:
    """Midpoint of the bracket after bisection to width <= tol."""
    b = refine_bracket(Zfun, bracket, tol, **kw)
    return 0.5 * (b.t_lo + b.t_hi)


def count_zeros(report: ZeroReport) -> tuple[int, dict[int, int]]:
    """Number of reported zeros and how many fall in each unit interval [m, m+1)."""
    density: dict[int, int] = {}
    for z in report.zeros:
        key = int(math.floor(z.t))
        density[key] = density.get(key, 0) + 1
    return len(report.zeros), dict(sorted(density.items()))


def find_zeros(L: TwistedL, t0: float, t1: float, step: float = DEFAULT_STEP,
               tol: float = 1e-8) -> ZeroReport:
    """Scan, refine and certify the sign-change zeros of Z on [t0, t1]."""
    Zfun = z_function(L)
    report = ZeroReport(L.spec.label, str(L.twist), float(t0), float(t1), float(step))
    if t1 == t0:
        return report
    report.brackets = scan(Zfun, t0, t1, step)

    def work(b):
        try:
            return refine_bracket(Zfun, b, tol)
        except LostBracket as exc:
            return exc

    for b, res in zip(report.brackets, parallel_map(work, report.brackets)):
        if isinstance(res, LostBracket):
            report.warnings.append({"bracket": [b.t_lo, b.t_hi], "LostBracket": str(res)})
            continue
        t_star = 0.5 * (res.t_lo + res.t_hi)
        abs_L = abs(smoothed_L(L, complex(0.5, t_star)).value)
        report.zeros.append(Zero(t_star, abs_L, res.t_hi - res.t_lo))
    return report
