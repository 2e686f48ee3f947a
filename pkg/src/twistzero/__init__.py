"""Additively twisted L-functions of modular forms and the zeros of their Z-functions."""

from __future__ import annotations

__version__ = "0.1.0"

from .arith import Twist, make_twist, parse_fraction
from .errors import TwistZeroError, HypothesisViolation
from .hlharness import BumpFamily, hl_experiment, verify_lutlem
from .lfun import TwistedL, fe_residual, smoothed_L, z_f, z_g, z_function
from .qseries import DELTA, THETA_ETA6, form_coeffs, parse_form
from .zeros import find_zeros

__all__ = [
    "BumpFamily", "DELTA", "HypothesisViolation", "THETA_ETA6", "Twist", "TwistZeroError",
    "TwistedL", "fe_residual", "find_zeros", "form_coeffs", "hl_experiment", "make_twist",
    "parse_form", "parse_fraction", "smoothed_L", "verify_lutlem", "z_f", "z_g", "z_function",
]
