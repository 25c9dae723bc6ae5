"""Default numeric settings, collected so tests and the CLI can override them in one place."""

from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class QuadratureDefaults:
    """Tolerances and budgets for the adaptive quadrature."""

    request_tol: float = 1e-12      # tolerance handed to integrate() by default
    assert_tol: float = 1e-10       # what downstream checks may rely on
    max_subdivisions: int = 2000    # bisection budget before NonConvergence
    divergence_budget: int = 500    # first refinement level of the divergence detector


@dataclass(frozen=True)
class SeriesDefaults:
    """Stop rules for infinite-series summation."""

    tol: float = 1e-14
    max_terms: int = 10_000_000     # hard cap -> TruncationUnsafe
    quiet_run: int = 64             # consecutive negligible terms before stopping
    quiet_margin: float = 1e-3      # negligible means |term| < tol * quiet_margin


@dataclass(frozen=True)
class LcgConstants:
    """64-bit linear congruential generator (MMIX constants), diagnostics only."""

    multiplier: int = 6364136223846793005
    increment: int = 1442695040888963407
    modulus: int = 2**64
    default_seed: int = 20130819


QUAD = QuadratureDefaults()
SERIES = SeriesDefaults()
LCG = LcgConstants()

TOL_ENV_VAR = "STEINB_TOL"


def resolve_tol(flag_value: float | None = None) -> float:
    """Effective quadrature tolerance: --tol beats STEINB_TOL beats the default."""
    if flag_value is not None:
        return float(flag_value)
    env = os.environ.get(TOL_ENV_VAR)
    if env:
        return float(env)
    return QUAD.request_tol
