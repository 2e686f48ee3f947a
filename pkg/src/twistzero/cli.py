"""Command-line interface: coeffs, eval, zeros, fecheck and hl.

Form mini-language (``--form``):

  eta:m1^e1*m2^e2...      eta quotient prod eta(m z)^e, e.g. eta:1^24 for Delta
  theta*eta:m1^e1*...     theta(z) times an eta quotient, e.g. theta*eta:4^6
  file:PATH               coefficients written earlier by ``twistzero coeffs``

Exit codes: 0 success, 1 numerical failure, 2 hypothesis violation,
3 configuration error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .arith import parse_fraction
from .errors import HypothesisViolation, TwistZeroError, FormSpecError, ParseError, WeightMismatch
from .hlharness import (SUPPORT_THRESHOLD, BumpFamily, decay_probe, hl_experiment, loglog_slope,
                        verify_lutlem)
from .lfun import TwistedL, fe_residual, smoothed_L, z_function
from .qseries import form_coeffs, parse_form, save_coeffs
from .zeros import find_zeros, sample_points

log = logging.getLogger("twistzero")

EXIT_OK, EXIT_NUMERIC, EXIT_HYPOTHESIS, EXIT_CONFIG = 0, 1, 2, 3

DEFAULTS = {
    "form": "eta:1^24",
    "twist": "1/5",
    "level": None,
    "count": 100,
    "t0": 0.0,
    "t1": 10.0,
    "step": 1.0,
    "sigma": 0.5,
    "no_z": False,
    "T": "4,8,16",
    "tol": 1e-8,
    "out": None,
    "seed": 0,
    "grid": "5,7,0,10,5",
    "random": 0,
    "identity": False,
    "decay": False,
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def fmt(x: float) -> str:
    """17 significant digits; the same bits always give the same text."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON text with every float printed through fmt."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(to_json(v, indent + 1) for v in obj) + "]"
        items = [inner + to_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# config


def _floats(text, name: str) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--{name}: expected comma separated numbers, got {text!r}") from None


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, flags and the --config file (which wins) and validate."""
    cfg = dict(DEFAULTS)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    if args.config:
        try:
            extra = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(extra, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, val in extra.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = val
    cfg["command"] = args.command

    try:
        cfg["spec"] = parse_form(str(cfg["form"]), level=cfg["level"])
    except (FormSpecError, ParseError, WeightMismatch, OSError) as exc:
        raise ConfigError(f"--form: {exc}") from None
    try:
        cfg["frac"] = parse_fraction(str(cfg["twist"]))
    except (TwistZeroError, ValueError) as exc:
        raise ConfigError(f"--twist: {exc}") from None
    for key in ("t0", "t1", "step", "tol", "sigma"):
        try:
            cfg[key] = float(cfg[key])
        except (TypeError, ValueError):
            raise ConfigError(f"--{key}: not a number: {cfg[key]!r}") from None
    if not cfg["step"] > 0:
        raise ConfigError("--step must be positive")
    if not cfg["tol"] > 0:
        raise ConfigError("--tol must be positive")
    if cfg["t1"] < cfg["t0"]:
        raise ConfigError("--t1 must not be below --t0")
    if int(cfg["count"]) < 1:
        raise ConfigError("--count must be at least 1")
    cfg["T_list"] = _floats(cfg["T"], "T")
    grid = _floats(cfg["grid"], "grid")
    if len(grid) != 5 or grid[4] < 1 or grid[4] != int(grid[4]):
        raise ConfigError("--grid needs sigma0,sigma1,t0,t1,n with n >= 1")
    cfg["grid"] = grid
    return cfg


def build_L(cfg: dict, t_max: float) -> TwistedL:
    fr = cfg["frac"]
    return TwistedL.from_form(cfg["spec"], fr.p, fr.q, t_max=max(t_max, 1.0))


# ---------------------------------------------------------------------------
# commands


def cmd_coeffs(cfg: dict) -> str:
    table = form_coeffs(cfg["spec"], int(cfg["count"]))
    if cfg["out"]:
        save_coeffs(table, cfg["out"])
        return ""
    tmp = io.StringIO()
    tmp.write(f"# twistzero-coeffs v1 weight2={table.weight2} level={table.level} "
              f"label={table.label} count={table.count}\n")
    for n, cn in enumerate(table.c, start=1):
        tmp.write(f"{n} {cn.real:.16e} {cn.imag:.16e}\n")
    return tmp.getvalue()


def _require_z(L: TwistedL):
    if not L.has_fe:
        raise HypothesisViolation(
            f"twist {L.twist} is not Gamma_0({L.spec.level})-equivalent to infinity "
            f"(need N | q); Z is undefined")
    if not L.twist.self_inverse:
        p, q = L.twist.p, L.twist.q
        raise HypothesisViolation(
            f"twist {p}/{q} fails p^2 = 1 (mod q): {p}^2 = {p * p % q} mod {q}; Z is not real")


def cmd_eval(cfg: dict) -> str:
    ts = sample_points(cfg["t0"], cfg["t1"], cfg["step"])
    L = build_L(cfg, max(abs(cfg["t0"]), abs(cfg["t1"])))
    want_z = not cfg["no_z"]
    lines = ["t,L_re,L_im,Z,err"]
    if want_z:
        _require_z(L)
        zf = z_function(L)
        for t in ts:
            cv = zf(float(t))
            lines.append(",".join([fmt(t), fmt(cv.L.real), fmt(cv.L.imag), fmt(cv.Z.real),
                                   fmt(cv.err_est)]))
    else:
        for t in ts:
            lv = smoothed_L(L, complex(cfg["sigma"], float(t)))
            lines.append(",".join([fmt(t), fmt(lv.value.real), fmt(lv.value.imag), "",
                                   fmt(lv.err)]))
    return "\n".join(lines) + "\n"


def cmd_zeros(cfg: dict) -> str:
    L = build_L(cfg, max(abs(cfg["t0"]), abs(cfg["t1"])))
    _require_z(L)
    report = find_zeros(L, cfg["t0"], cfg["t1"], cfg["step"], cfg["tol"])
    return to_json(report.to_dict()) + "\n"


def cmd_fecheck(cfg: dict) -> str:
    s0, s1, t0, t1, n = cfg["grid"]
    n = int(n)
    sig = np.linspace(s0, s1, n)
    tt = np.linspace(t0, t1, n)
    points = [complex(a, b) for a in sig for b in tt]
    rng = np.random.default_rng(int(cfg["seed"]))
    for _ in range(int(cfg["random"])):
        points.append(complex(rng.uniform(s0, s1), rng.uniform(t0, t1)))
    t_max = max(abs(t0), abs(t1))
    L = build_L(cfg, t_max + 2.0)
    L.require_fe()
    rows = [{"s": s, "residual": fe_residual(L, s)} for s in points]
    return to_json({
        "form": L.spec.label, "twist": str(L.twist), "weight2": L.spec.weight2,
        "level": L.spec.level, "seed": int(cfg["seed"]),
        "max_residual": max(r["residual"] for r in rows), "points": rows,
    }) + "\n"


def cmd_hl(cfg: dict) -> str:
    Ts = cfg["T_list"]
    for T in Ts:
        if not T > SUPPORT_THRESHOLD:
            raise HypothesisViolation(
                f"T = {T} violates the support condition T > 2/log 2 = {SUPPORT_THRESHOLD:.6f}")
    family = BumpFamily()
    W = family.halfwidth(1e-10)
    L = build_L(cfg, max(2.0 * T ** 1.5 + W * T for T in Ts) + 1.0)
    _require_z(L)
    out = {"form": L.spec.label, "twist": str(L.twist), "lambda_at_1": family.lambda_at_1,
           "experiments": []}
    for T in Ts:
        r = hl_experiment(L, T, family)
        out["experiments"].append({
            "T": r.T, "I_signed": r.I_signed, "I_abs": r.I_abs, "ratio": r.ratio,
            "quad_err": r.quad_err, "verdict": r.verdict, "W": r.W, "nodes": r.nodes})
    if cfg["identity"]:
        out["identity"] = []
        for T in Ts:
            for s in (0.5, 2.0):
                r = verify_lutlem(L, T, s, family)
                out["identity"].append({"T": T, "s": r.s, "lhs": r.lhs, "rhs": r.rhs,
                                      "rel_error": r.rel_error})
    if cfg["decay"]:
        rows = decay_probe(L, Ts, family)
        out["decay"] = {
            "rows": [{"T": r.T, "value": r.value, "magnitude": r.magnitude,
                      "edge_ratio": r.edge_ratio} for r in rows],
            "slope": loglog_slope(Ts, [r.magnitude for r in rows]) if len(Ts) > 1 else None,
        }
    return to_json(out) + "\n"


COMMANDS = {"coeffs": cmd_coeffs, "eval": cmd_eval, "zeros": cmd_zeros,
            "fecheck": cmd_fecheck, "hl": cmd_hl}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twistzero", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--form", help="form spec, e.g. eta:1^24 or theta*eta:4^6")
    common.add_argument("--twist", help="p/q, e.g. 1/5")
    common.add_argument("--level", type=int, help="override the level of the form")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--seed", type=int, help="seed for randomized points")
    common.add_argument("--config", help="JSON file whose keys override the flags")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeffs", parents=[common], help="write a coefficient file")
    p.add_argument("--count", type=int, help="number of coefficients")

    p = sub.add_parser("eval", parents=[common], help="CSV grid t,L_re,L_im,Z,err")
    for name in ("t0", "t1", "step"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--sigma", type=float, help="Re s when --no-z is given (default 1/2)")
    p.add_argument("--no-z", dest="no_z", action="store_true",
                   help="evaluate L only; skips the Z column and its hypotheses")

    p = sub.add_parser("zeros", parents=[common], help="JSON report of sign-change zeros")
    for name in ("t0", "t1", "step", "tol"):
        p.add_argument(f"--{name}", type=float)

    p = sub.add_parser("fecheck", parents=[common], help="functional equation residuals")
    p.add_argument("--grid", help="sigma0,sigma1,t0,t1,n (n x n grid)")
    p.add_argument("--random", type=int, help="extra random points drawn with --seed")

    p = sub.add_parser("hl", parents=[common], help="window integrals of Z and |Z|")
    p.add_argument("--T", help="comma separated window parameters")
    p.add_argument("--identity", action="store_true", help="also check the mass identity")
    p.add_argument("--decay", action="store_true", help="also run the decay probe")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        text = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"twistzero: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolation as exc:
        print(f"twistzero: hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (TwistZeroError, ArithmeticError, ValueError) as exc:
        print(f"twistzero: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg["out"] and args.command != "coeffs":
        Path(cfg["out"]).write_text(text)
    elif text:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
