"""Scalar numerical kernels: adaptive quadrature, series summation, differentiation, sign scans.

Everything here operates on plain Python callables ``float -> float``.
Improper integrals are reduced to finite ones by smooth changes of variable:

    (-inf, inf)  :  x = t / (1 - t^2),    t in (-1, 1)
    [a, inf)     :  x = a + t / (1 - t),  t in [0, 1)
    (-inf, b]    :  x = b - t / (1 - t),  t in [0, 1)

The transformed integrand is then handled by a globally adaptive 15-point
Gauss-Kronrod rule (worst-interval-first bisection).  Kronrod nodes are
interior points, so integrable endpoint singularities are never sampled
directly; they just cost extra bisections near the offending endpoint.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Callable

from . import config

RealFn = Callable[[float], float]

_EPS = math.ulp(1.0)
# Margin (in transform space) used when a bounded sample range is needed for
# an unbounded interval; maps to |x| of roughly 1e6.
_SCAN_MARGIN = 1e-6


class NumericsError(Exception):
    """Base class for numerical failures in this module."""


class NonConvergence(NumericsError):
    """The error estimate stagnated above tolerance after the subdivision budget.

    Carries the partial result so callers can diagnose divergence.
    """

    def __init__(self, message: str, value: float, abs_error_estimate: float, evaluations: int):
        super().__init__(message)
        self.value = value
        self.abs_error_estimate = abs_error_estimate
        self.evaluations = evaluations


class NonFinite(NumericsError):
    """A function returned NaN/inf at an interior point, even after nudging."""

    def __init__(self, message: str, point: float | None = None, observed: float | None = None):
        super().__init__(message)
        self.point = point
        self.observed = observed


class TruncationUnsafe(NumericsError):
    """A series hit the term cap without meeting either stop rule."""


@dataclass(frozen=True)
class Interval:
    """An open/closed real interval with extended-real endpoints, lo < hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if not lo < hi:
            raise ValueError(f"interval requires lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def real_line(cls) -> "Interval":
        return cls(-math.inf, math.inf)

    @classmethod
    def half_line(cls, lo: float = 0.0) -> "Interval":
        return cls(lo, math.inf)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self) -> None:
        if self.abs_error_estimate < 0:
            raise ValueError("error estimate must be >= 0")
        if self.evaluations <= 0:
            raise ValueError("evaluations must be > 0")


class Verdict(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    NOT_MONOTONE = "not-monotone"


@dataclass(frozen=True)
class MonotonicityCertificate:
    verdict: Verdict
    witness: float | None = None     # sign-change location, set iff NOT_MONOTONE (unless all skipped)
    skipped: int = 0                 # non-finite samples that were dropped
    all_skipped: bool = False

    @property
    def strictly_monotone(self) -> bool:
        return self.verdict in (Verdict.INCREASING, Verdict.DECREASING)


# --------------------------------------------------------------------------
# 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK dqk15).

_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _eval_raw(f: RealFn, x: float) -> float:
    # Python's math module raises where IEEE arithmetic would produce inf/nan;
    # fold both conventions into one observation.
    try:
        return f(x)
    except (OverflowError, ZeroDivisionError):
        return math.inf
    except ValueError:
        return math.nan


def _safe_eval(f: RealFn, x: float, lo: float, hi: float) -> float:
    value = _eval_raw(f, x)
    if math.isfinite(value):
        return value
    # Singularity-avoidance nudge: retry slightly toward the cell midpoint.
    mid = 0.5 * (lo + hi)
    step = 1e-9 * (hi - lo)
    x2 = x + (step if x < mid else -step)
    value2 = _eval_raw(f, x2)
    if math.isfinite(value2):
        return value2
    raise NonFinite(f"integrand not finite near {x!r}", point=x, observed=value2)


def _gk15(f: RealFn, lo: float, hi: float) -> tuple[float, float, float]:
    """One Gauss-Kronrod pass over [lo, hi]: (kronrod value, error estimate, integral of |f|)."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)

    fc = _safe_eval(f, center, lo, hi)
    fplus = [_safe_eval(f, center + half * x, lo, hi) for x in _XGK[:7]]
    fminus = [_safe_eval(f, center - half * x, lo, hi) for x in _XGK[:7]]

    resk = _WGK[7] * fc
    resabs = _WGK[7] * abs(fc)
    for i in range(7):
        s = fplus[i] + fminus[i]
        resk += _WGK[i] * s
        resabs += _WGK[i] * (abs(fplus[i]) + abs(fminus[i]))
    resg = _WG[3] * fc
    for j, i in enumerate((1, 3, 5)):
        resg += _WG[j] * (fplus[i] + fminus[i])

    reskh = resk * 0.5
    resasc = _WGK[7] * abs(fc - reskh)
    for i in range(7):
        resasc += _WGK[i] * (abs(fplus[i] - reskh) + abs(fminus[i] - reskh))

    value = resk * half
    resabs *= abs(half)
    resasc *= abs(half)
    err = abs((resk - resg) * half)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > 1e-290:
        err = max(err, 50.0 * _EPS * resabs)
    return value, err, resabs


# --------------------------------------------------------------------------
# Variable changes onto a bounded parameter interval.


def _transformed(f: RealFn, iv: Interval) -> tuple[RealFn, float, float]:
    """Return (g, t_lo, t_hi) with integral of f over iv equal to integral of g over [t_lo, t_hi]."""
    lo, hi = iv.lo, iv.hi
    if iv.bounded:
        return f, lo, hi
    if math.isfinite(lo):  # [a, inf)
        def g(t: float, a: float = lo) -> float:
            onemt = 1.0 - t
            return f(a + t / onemt) / (onemt * onemt)
        return g, 0.0, 1.0
    if math.isfinite(hi):  # (-inf, b]
        def g(t: float, b: float = hi) -> float:
            onemt = 1.0 - t
            return f(b - t / onemt) / (onemt * onemt)
        return g, 0.0, 1.0

    def g(t: float) -> float:
        onemt2 = 1.0 - t * t
        return f(t / onemt2) * (1.0 + t * t) / (onemt2 * onemt2)

    return g, -1.0, 1.0


def from_transform(iv: Interval, t: float) -> float:
    """Map a point of the transform parameter interval back to x-space."""
    lo, hi = iv.lo, iv.hi
    if iv.bounded:
        return t
    if math.isfinite(lo):
        return lo + t / (1.0 - t)
    if math.isfinite(hi):
        return hi - t / (1.0 - t)
    return t / (1.0 - t * t)


def integrate(
    f: RealFn,
    iv: Interval,
    tol: float = config.QUAD.request_tol,
    *,
    budget: int = config.QUAD.max_subdivisions,
) -> QuadResult:
    """Adaptively integrate f over iv to absolute tolerance tol.

    Raises NonConvergence when the subdivision budget is exhausted with the
    error estimate still above tolerance (the partial result rides along on
    the exception), and NonFinite when the integrand cannot be evaluated at
    an interior point even after nudging.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    g, t_lo, t_hi = _transformed(f, iv)

    evaluations = 0
    seq = 0
    # heap entries: (-err, seq, lo, hi, value, err, resabs)
    heap: list[tuple[float, int, float, float, float, float, float]] = []
    frozen: list[tuple[float, float, float]] = []  # cells below splitting resolution

    def push(a: float, b: float) -> None:
        nonlocal evaluations, seq
        v, e, r = _gk15(g, a, b)
        evaluations += 15
        heapq.heappush(heap, (-e, seq, a, b, v, e, r))
        seq += 1

    n_init = 8
    width = (t_hi - t_lo) / n_init
    for i in range(n_init):
        push(t_lo + i * width, t_lo + (i + 1) * width)

    def totals() -> tuple[float, float, float]:
        total_v = math.fsum([c[4] for c in heap] + [v for v, _, _ in frozen])
        total_e = math.fsum([c[5] for c in heap] + [e for _, e, _ in frozen])
        total_r = math.fsum([c[6] for c in heap] + [r for _, _, r in frozen])
        return total_v, total_e, total_r

    def target(total_r: float) -> float:
        # Accumulated |f| mass bounds what double precision can resolve; an
        # absolute tol below that floor counts as met once the estimate
        # reaches the floor (the estimate stays honest either way).
        return max(tol, 100.0 * _EPS * total_r)

    splits = 0
    total_v, total_e, total_r = totals()
    while total_e > target(total_r):
        if not math.isfinite(total_v):
            raise NonConvergence("partial integral overflowed", total_v, total_e, evaluations)
        if splits >= budget:
            raise NonConvergence(
                f"error {total_e:.3e} above tol {tol:.3e} after {splits} subdivisions",
                total_v, total_e, evaluations,
            )
        if not heap:
            raise NonConvergence(
                "interval exhausted below resolution with error above tol",
                total_v, total_e, evaluations,
            )
        _, _, a, b, v, e, r = heapq.heappop(heap)
        if (b - a) < 1e-300 + 50.0 * _EPS * max(abs(a), abs(b)):
            frozen.append((v, e, r))
        else:
            mid = 0.5 * (a + b)
            push(a, mid)
            push(mid, b)
            splits += 1
        total_v, total_e, total_r = totals()

    return QuadResult(value=total_v, abs_error_estimate=total_e, evaluations=evaluations)


def integrate_detecting_divergence(
    f: RealFn,
    iv: Interval,
    tol: float = config.QUAD.request_tol,
    *,
    base_budget: int = config.QUAD.divergence_budget,
) -> float:
    """Integrate f over iv, returning +-inf when the integral diverges.

    Divergence is declared when, across three refinement levels (budget,
    2*budget, 4*budget), the error estimate fails to contract while the
    partial value grows monotonically in magnitude.  A convergent integral
    returns its value at the first level that meets tolerance; anything
    else re-raises the underlying NonConvergence.
    """
    partial_values: list[float] = []
    partial_errors: list[float] = []
    last_exc: NonConvergence | None = None
    for level, budget in enumerate((base_budget, 2 * base_budget, 4 * base_budget)):
        try:
            return integrate(f, iv, tol, budget=budget).value
        except NonConvergence as exc:
            partial_values.append(exc.value)
            partial_errors.append(exc.abs_error_estimate)
            last_exc = exc
        except NonFinite as exc:
            # Overflow to +-inf deep in a singular cascade is divergence
            # evidence; genuine NaNs stay fatal.
            if exc.observed is not None and math.isinf(exc.observed):
                partial_values.append(exc.observed)
                partial_errors.append(math.inf)
            else:
                raise
    magnitudes = [abs(v) for v in partial_values]
    growing = (
        magnitudes[0] <= magnitudes[1] <= magnitudes[2]
        and (magnitudes[2] > 1.5 * magnitudes[0] or math.isinf(magnitudes[2]))
    )
    contracted = partial_errors[2] <= 0.25 * partial_errors[0]
    if growing and not contracted:
        sign = 1.0
        for v in reversed(partial_values):
            if v != 0.0 and not math.isnan(v):
                sign = math.copysign(1.0, v)
                break
        return sign * math.inf
    assert last_exc is not None
    raise last_exc


# --------------------------------------------------------------------------
# Series summation.


def sum_series(
    f: Callable[[int], float],
    start: int = 0,
    tail_bound: Callable[[int], float | None] | None = None,
    tol: float = config.SERIES.tol,
    *,
    max_terms: int = config.SERIES.max_terms,
) -> float:
    """Sum f(start) + f(start+1) + ... for an absolutely convergent series.

    Stops when the supplied tail bound drops below tol, or heuristically when
    64 consecutive terms are each below tol * 1e-3 in absolute value.  Hitting
    the term cap first raises TruncationUnsafe.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    threshold = tol * config.SERIES.quiet_margin
    terms: list[float] = []
    quiet = 0
    x = start
    for _ in range(max_terms):
        term = f(x)
        if not math.isfinite(term):
            raise NonFinite(f"series term not finite at {x}", point=float(x), observed=term)
        terms.append(term)
        if tail_bound is not None:
            tb = tail_bound(x)
            if tb is not None and abs(tb) < tol:
                return math.fsum(terms)
        quiet = quiet + 1 if abs(term) < threshold else 0
        if quiet >= config.SERIES.quiet_run:
            return math.fsum(terms)
        x += 1
    raise TruncationUnsafe(f"no stop rule met within {max_terms} terms")


# --------------------------------------------------------------------------
# Differentiation.

_FD_STEP = float(_EPS ** (1.0 / 3.0))  # optimal central-difference scaling


def derivative(f: RealFn, x: float) -> float:
    """Central finite difference with step cbrt(eps) * max(1, |x|)."""
    h = _FD_STEP * max(1.0, abs(x))
    # Make the step exactly representable around x.
    xp = x + h
    xm = x - h
    h2 = xp - xm
    fp, fm = _eval_raw(f, xp), _eval_raw(f, xm)
    if not (math.isfinite(fp) and math.isfinite(fm)):
        raise NonFinite(f"function not evaluable at {x} +- {h}", point=x)
    return (fp - fm) / h2


# --------------------------------------------------------------------------
# Sign / monotonicity scanning.


def scan_grid(iv: Interval, count: int, margin: float = _SCAN_MARGIN) -> list[float]:
    """Sample points of iv, log-like spaced toward infinite endpoints.

    Uses the same variable changes as integrate(): the grid is uniform in the
    transform parameter and clipped by ``margin`` at the ends, which keeps
    unbounded coordinates inside a wide quantile-like range (|x| up to about
    1/margin).  The count is rounded up to an odd number so symmetric scans
    straddle the midpoint exactly; stationary points at the center of a
    symmetric support (a recurring feature of scale and skew scores) are then
    sampled rather than jumped over.
    """
    n = count | 1
    lo, hi = iv.lo, iv.hi
    if iv.bounded:
        a = lo + margin * (hi - lo)
        b = hi - margin * (hi - lo)
        return [a + (b - a) * i / (n - 1) for i in range(n)]
    if math.isfinite(lo) or math.isfinite(hi):
        ts = [margin + (1.0 - 2.0 * margin) * i / (n - 1) for i in range(n)]
        if math.isfinite(lo):
            return [lo + t / (1.0 - t) for t in ts]
        return [hi - t / (1.0 - t) for t in reversed(ts)]
    ts = [-1.0 + margin + (2.0 - 2.0 * margin) * i / (n - 1) for i in range(n)]
    return [t / (1.0 - t * t) for t in ts]


def monotonicity_scan(
    f: RealFn,
    f_prime: RealFn | None,
    iv: Interval,
    grid: int = 256,
) -> MonotonicityCertificate:
    """Classify f as Increasing/Decreasing/NotMonotone from the sign of f' on a grid.

    Increasing needs every sampled derivative > 0, Decreasing every one < 0;
    anything else (including an exact zero) yields NotMonotone with the first
    sign-change bracket midpoint (or the zero itself) as witness.  Non-finite
    samples are skipped and counted; if everything is skipped the verdict is
    NotMonotone with no witness and the all_skipped flag set.
    """
    if grid < 64:
        raise ValueError("grid must be >= 64")
    slope = f_prime if f_prime is not None else (lambda x: derivative(f, x))
    xs = scan_grid(iv, grid)
    samples: list[tuple[float, float]] = []
    skipped = 0
    for x in xs:
        try:
            d = slope(x)
        except (ArithmeticError, ValueError, NonFinite):
            skipped += 1
            continue
        if not math.isfinite(d):
            skipped += 1
            continue
        samples.append((x, d))
    if not samples:
        return MonotonicityCertificate(Verdict.NOT_MONOTONE, None, skipped, all_skipped=True)

    witness: float | None = None
    prev_x, prev_d = samples[0]
    if prev_d == 0.0:
        witness = prev_x
    else:
        for x, d in samples[1:]:
            if d == 0.0:
                witness = x
                break
            if d * prev_d < 0.0:
                witness = 0.5 * (prev_x + x)
                break
            prev_x, prev_d = x, d
    if witness is not None:
        return MonotonicityCertificate(Verdict.NOT_MONOTONE, witness, skipped)
    if all(d > 0.0 for _, d in samples):
        return MonotonicityCertificate(Verdict.INCREASING, None, skipped)
    return MonotonicityCertificate(Verdict.DECREASING, None, skipped)


def bisect_root(f: RealFn, lo: float, hi: float, *, iterations: int = 200) -> float:
    """Plain bisection for a bracketed sign change of a continuous function."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError("root not bracketed")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or (hi - lo) < 4.0 * _EPS * max(1.0, abs(mid)):
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def golden_section_minimize(f: RealFn, lo: float, hi: float, *, iterations: int = 200) -> tuple[float, float]:
    """Golden-section search for a local minimum in [lo, hi]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if (b - a) < 1e-14 * max(1.0, abs(a), abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = c if fc <= fd else d
    return x, min(fc, fd)
