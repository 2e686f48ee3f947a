"""Regenerate the frozen oracle values in this directory.

Everything here is computed with mpmath at high precision and with plain
Python integer arithmetic, independently of the twistzero code paths:

* log Gamma and the upper incomplete Gamma function at fixed points;
* Delta(i) from its closed form Gamma(1/4)^24 / (2^24 pi^18);
* tau(n) from the product q prod (1 - q^n)^24 by schoolbook multiplication;
* twisted L-values of Delta computed by splitting the Mellin integral of
  Delta(p/q + iy) on the real y axis at y0 = 1.3/q, with mpmath's gammainc
  at 40 digits (the library rotates the splitting ray and uses its own
  special functions, so the two computations share no numerics).

Run:  python3 tests/oracles/make_oracles.py
"""

from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

HERE = Path(__file__).parent


def tau_brute(N: int) -> list[int]:
    # q prod_{n>=1} (1 - q^n)^24, truncated at q^N
    poly = [0] * (N + 1)
    poly[0] = 1
    for n in range(1, N + 1):
        for _ in range(24):
            for i in range(N, n - 1, -1):
                poly[i] -= poly[i - n]
    return [0] + poly[:N]  # tau(m) = coefficient of q^(m-1) in the product


def twisted_L_delta(s, p: int, q: int, pt: int, N: int = 500, split: float = 1.3):
    kappa = 12
    w = s + mp.mpf(kappa - 1) / 2
    y0 = mp.mpf(split) / q
    Y0 = 1 / (q * q * y0)
    mu = mp.mpc(0, 1) ** kappa  # f(p/q + iy) = i^kappa (qy)^-kappa f(-pt/q + i/(q^2 y))
    tau = tau_brute(N)
    first = mp.mpf(0)
    second = mp.mpf(0)
    for n in range(1, N + 1):
        c = tau[n]
        if c == 0:
            continue
        x = 2 * mp.pi * n
        first += c * mp.expjpi(2 * mp.mpf(n * p) / q) * x ** (-w) * mp.gammainc(w, x * y0)
        second += c * mp.expjpi(-2 * mp.mpf(n * pt) / q) * x ** (w - kappa) * mp.gammainc(kappa - w, x * Y0)
    D = (2 * mp.pi) ** w / mp.gamma(w) * (first + mu * mp.mpf(q) ** (kappa - 2 * w) * second)
    return D


def main():
    mp.mp.dps = 40
    out = {}
    pts = [(0.5, 0.0), (0.5, 10.0), (0.5, 100.0), (-3.7, 2.2), (12.0, -30.0), (1e-3, 1e-3),
           (0.25, 300.0), (-20.5, 0.5), (60.0, 5.0)]
    out["loggamma"] = [[a, b, float(mp.re(mp.loggamma(mp.mpc(a, b)))), float(mp.im(mp.loggamma(mp.mpc(a, b))))]
                       for a, b in pts]
    ig = [((2.5, 1.0), 3.0), ((0.5, 0.0), 0.1), ((6.0, 10.0), 40.0), ((12.5, -4.0), 7.0),
          ((-2.0, 0.0), 1.5), ((0.0, 0.0), 2.0), ((3.0, 50.0), 0.7)]
    out["gammainc"] = []
    for (a, b), x in ig:
        v = mp.gammainc(mp.mpc(a, b), x)
        out["gammainc"].append([a, b, x, float(mp.re(v)), float(mp.im(v))])
    out["delta_at_i"] = float(mp.gamma(mp.mpf(1) / 4) ** 24 / (2 ** 24 * mp.pi ** 18))
    out["tau"] = tau_brute(60)[1:]
    rows = []
    for sigma, t in [(0.5, 0.0), (0.5, 1.0), (0.5, 10.0), (0.5, 25.0), (0.8, -7.5), (2.0, 3.0)]:
        s = mp.mpc(sigma, t)
        v = twisted_L_delta(s, 1, 5, 1)
        rows.append([sigma, t, float(mp.re(v)), float(mp.im(v))])
    out["L_delta_1_5"] = rows
    rows = []
    for sigma, t in [(0.5, 4.0), (1.5, -2.0)]:
        v = twisted_L_delta(mp.mpc(sigma, t), 2, 5, 3)
        rows.append([sigma, t, float(mp.re(v)), float(mp.im(v))])
    out["L_delta_2_5"] = rows
    (HERE / "oracles.json").write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
