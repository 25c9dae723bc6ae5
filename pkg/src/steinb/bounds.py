"""Variance bounds built from score profiles and exchanging pairs.

For a family with score phi, Fisher information I = E[phi^2], and exchanging
function f-tilde (for the constant test function):

    lower:  ( E[h'(X) f-tilde(X)] )^2 / I          -- no monotonicity needed
    upper:  E[ (h'(X))^2 / (-phi'(X)) * f-tilde(X) ]   -- phi strictly monotone

Discrete families get the lower bound only, evaluated by summation by parts:
the numerator is  sum_x D+h(x) f-tilde(x+1) g(x+1)  with the boundary term
f-tilde(0) g(0) = 0 checked up front.  (Evaluating D+h at unshifted mass
points, as sometimes quoted for the Poisson, overshoots the true variance:
h = x^2 at rate 1 gives 25 > 11.  The shifted form below yields 9 <= 11.)

Also here: the log-concavity Poincare constant and the classical comparator
bounds (Chernoff, Cacoullos, Klaassen) for the families they apply to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .families import (
    ContinuousFamily,
    DiscreteFamily,
    Family,
    Location,
    ParamRole,
    Scale,
    TestFunction,
    expectation,
    role_kind,
)
from .numerics import (
    RealFn,
    golden_section_minimize,
    integrate_detecting_divergence,
    scan_grid,
    sum_series,
)
from .operators import (
    BoundaryViolation,
    ScoreProfile,
    UnsupportedRole,
    exchanging_pair,
    score_profile,
)


class NotStronglyUnimodal(Exception):
    """-(log g)'' has no positive infimum; no Poincare constant of the 1/eps form."""


class NotApplicable(Exception):
    """No comparator bounds are catalogued for this family/role."""


@dataclass(frozen=True)
class Comparator:
    name: str
    kind: str     # "lower" | "upper"
    value: float  # may be +inf


@dataclass(frozen=True)
class PoincareConstant:
    epsilon: float   # inf of -(log g)'' over the support
    d: float         # 1 / epsilon

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0 for a finite constant")


@dataclass(frozen=True)
class BoundReport:
    """Lower bound, ground-truth variance, upper bound, and diagnostics."""

    lower: float
    variance_truth: float
    upper: float                      # +inf allowed
    tightness_residual: float         # min over (alpha, beta) of E[(h - a*phi - b)^2] / Var[h]
    comparators: tuple[Comparator, ...] = ()
    flags: tuple[str, ...] = ()
    upper_witness: float | None = None   # where monotonicity failed, if it did

    @property
    def lower_slack(self) -> float:
        return self.variance_truth - self.lower

    @property
    def upper_slack(self) -> float:
        return self.upper - self.variance_truth


# --------------------------------------------------------------------------
# Continuous bounds.


def lower_bound(
    fam: Family,
    role: ParamRole | None = None,
    h: TestFunction | None = None,
    *,
    tol: float = 1e-12,
    profile: ScoreProfile | None = None,
) -> float:
    """(E[h' f-tilde])^2 / Fisher; returns 0 (vacuous) when Fisher diverges."""
    if h is None:
        raise TypeError("lower_bound requires a test function h")
    if isinstance(fam, DiscreteFamily):
        return discrete_lower_bound(fam, h, tol=tol, profile=profile)
    prof = profile if profile is not None else score_profile(fam, role, tol=tol)
    if math.isinf(prof.fisher):
        return 0.0
    pair = exchanging_pair(fam)
    numerator = expectation(fam, lambda x: h.h_prime(x) * pair.f_tilde(x), tol)
    return numerator * numerator / prof.fisher


def upper_bound(
    fam: ContinuousFamily,
    role: ParamRole | None = None,
    h: TestFunction | None = None,
    *,
    tol: float = 1e-12,
    profile: ScoreProfile | None = None,
) -> float:
    """E[(h')^2 / (-phi') * f-tilde], or +inf when the score is not strictly
    monotone (witness available on the profile's certificate) or the
    integral itself diverges."""
    if h is None:
        raise TypeError("upper_bound requires a test function h")
    if isinstance(fam, DiscreteFamily):
        raise UnsupportedRole("no discrete upper bound is available")
    prof = profile if profile is not None else score_profile(fam, role, tol=tol)
    if not prof.monotonicity.strictly_monotone:
        return math.inf
    pair = exchanging_pair(fam)

    def integrand(x: float) -> float:
        w = fam.pdf(x)
        if w == 0.0:
            return 0.0
        hp = h.h_prime(x)
        return hp * hp / (-prof.phi_prime(x)) * pair.f_tilde(x) * w

    return integrate_detecting_divergence(integrand, fam.support, tol)


def discrete_lower_bound(
    fam: DiscreteFamily,
    h: TestFunction,
    *,
    tol: float = 1e-12,
    profile: ScoreProfile | None = None,
) -> float:
    """( sum_x D+h(x) f-tilde(x+1) g(x+1) )^2 / Fisher, by exact summation by parts."""
    pair = exchanging_pair(fam)  # verifies f-tilde * g = 0 at the support edges
    if abs(pair.f_tilde(0.0) * fam.pmf(0)) > 1e-12:
        raise BoundaryViolation("f-tilde * g does not vanish at the origin")
    prof = profile if profile is not None else score_profile(fam, tol=tol)
    theta0 = fam.role.theta0

    def term(x: int) -> float:
        return h.forward_difference(x) * pair.f_tilde(x + 1.0) * fam.pmf_fn(x + 1, theta0)

    if math.isfinite(fam.support_max):
        numerator = math.fsum(term(x) for x in range(int(fam.support_max)))
    else:
        numerator = sum_series(term, 0, None, min(tol, 1e-13))
    if math.isinf(prof.fisher):
        return 0.0
    return numerator * numerator / prof.fisher


# --------------------------------------------------------------------------
# Poincare constant.


def poincare_constant(fam: ContinuousFamily, *, grid: int = 2049) -> PoincareConstant:
    """eps = inf of -(log g0)'' over the support (grid scan plus golden-section
    polish around the minimizing bracket); d = 1/eps.

    Raises NotStronglyUnimodal when the infimum is not positive, e.g. for
    exp(-x^4/4) where the curvature vanishes at the origin.
    """
    if not isinstance(fam.role, Location):
        raise UnsupportedRole("the Poincare constant is computed for location families")
    curvature = fam.log_density_second_derivative
    if curvature is None:
        from .numerics import derivative

        L = fam.log_density_derivative
        curvature = lambda y: derivative(L, y)

    def neg_curv(y: float) -> float:
        return -curvature(y)

    # A wide margin pushes unbounded grids far out (|y| ~ 1e9), so families
    # whose curvature only decays toward an endpoint are still caught.
    xs = scan_grid(fam.base_support, grid, margin=1e-9)
    values = []
    for y in xs:
        try:
            v = neg_curv(y)
        except (ArithmeticError, ValueError):
            continue
        if math.isfinite(v):
            values.append((v, y))
    if not values:
        raise NotStronglyUnimodal(f"-(log g)'' not evaluable on the support of {fam.name}")
    _, y_best = min(values)
    idx = xs.index(y_best)
    lo = xs[max(idx - 1, 0)]
    hi = xs[min(idx + 1, len(xs) - 1)]
    if lo == hi:
        epsilon = neg_curv(y_best)
    else:
        _, epsilon = golden_section_minimize(neg_curv, lo, hi)
        epsilon = min(epsilon, neg_curv(y_best))
    if epsilon <= 1e-12:
        raise NotStronglyUnimodal(
            f"inf of -(log g)'' is {epsilon:.3e}; {fam.name} is not strongly unimodal"
        )
    return PoincareConstant(epsilon=epsilon, d=1.0 / epsilon)


# --------------------------------------------------------------------------
# Literature comparators.


def literature_bounds(fam: Family, h: TestFunction, *, tol: float = 1e-12) -> list[Comparator]:
    """Named classical bounds applicable to this family/role; divergent
    constituent integrals surface as +inf values, never as large floats."""
    if isinstance(fam, DiscreteFamily):
        raise NotApplicable(f"no comparator bounds catalogued for {fam.name}")
    name, role = fam.name, fam.role

    if name == "gaussian" and isinstance(role, Location):
        e_hp = _expect_or_inf(fam, lambda x: h.h_prime(x), tol)
        e_hp2 = _expect_or_inf(fam, lambda x: h.h_prime(x) ** 2, tol)
        return [
            Comparator("chernoff_lower", "lower", 0.0 if math.isinf(e_hp) else e_hp**2),
            Comparator("chernoff_upper", "upper", e_hp2),
        ]

    if name == "exponential" and isinstance(role, Scale):
        lam = role.sigma0
        e_hp2 = _expect_or_inf(fam, lambda x: h.h_prime(x) ** 2, tol)
        e_hp = _expect_or_inf(fam, lambda x: h.h_prime(x), tol)
        e_xhp2 = _expect_or_inf(fam, lambda x: x * h.h_prime(x) ** 2, tol)
        var_hp = math.inf if math.isinf(e_hp2) or math.isinf(e_hp) else e_hp2 - e_hp**2
        out = [
            Comparator("cacoullos_upper", "upper", var_hp / lam**2 + e_xhp2 / lam),
            Comparator("klaassen_exp_upper", "upper", 4.0 * e_hp2 / lam**2),
        ]
        if h.h_second is not None:
            e_cross = _expect_or_inf(fam, lambda x: x * h.h_prime(x) * h.h_second(x), tol)
            if math.isinf(e_hp2) or math.isinf(e_cross):
                rewrite = math.inf
            else:
                rewrite = (e_hp2 + 2.0 * e_cross) / lam**2
            out.append(Comparator("exp_rewrite_upper", "upper", rewrite))
        return out

    if name == "gamma":
        a = fam.structural_value("shape")
        b = role.sigma0 if isinstance(role, Scale) else 1.0
        e_hp = _expect_or_inf(fam, lambda x: h.h_prime(x), tol)
        e_xhp = _expect_or_inf(fam, lambda x: x * h.h_prime(x), tol)
        if math.isinf(e_hp) or math.isinf(e_xhp):
            value = math.inf
        else:
            value = max((a - 2.0) / b**2 * e_hp**2, e_xhp**2 / a)
        return [Comparator("klaassen_gamma_lower", "lower", value)]

    raise NotApplicable(f"no comparator bounds catalogued for {name} with a {role_kind(role)} role")


def _expect_or_inf(fam: ContinuousFamily, fn: RealFn, tol: float) -> float:
    def integrand(x: float) -> float:
        w = fam.pdf(x)
        if w == 0.0:
            return 0.0
        return fn(x) * w

    return integrate_detecting_divergence(integrand, fam.support, tol)


# --------------------------------------------------------------------------
# Report assembly.


def tightness_residual(
    fam: Family, h: TestFunction, prof: ScoreProfile, variance: float, *, tol: float = 1e-12
) -> float:
    """Normalized L2(g) distance of h from the affine span of the score.

    min over (alpha, beta) of E[(h - alpha*phi - beta)^2] / Var[h]; zero
    exactly when h is proportional to phi up to an additive constant, which
    is the equality case of both bounds.
    """
    if variance <= 1e-300:
        return 0.0
    if math.isinf(prof.fisher):
        return 1.0
    e_phi = expectation(fam, prof.phi, tol)
    e_phi2 = prof.fisher
    var_phi = e_phi2 - e_phi**2
    if var_phi <= 1e-300:
        return 1.0
    e_h_phi = expectation(fam, lambda x: h.h(x) * prof.phi(x), tol)
    e_h = expectation(fam, h.h, tol)
    cov = e_h_phi - e_h * e_phi
    residual = (variance - cov * cov / var_phi) / variance
    return max(residual, 0.0)


def bound_report(
    fam: Family,
    h: TestFunction,
    *,
    tol: float = 1e-12,
    variance_truth: float | None = None,
    with_comparators: bool = True,
) -> BoundReport:
    """Assemble lower / variance / upper plus comparators and flags for one
    (family, test function) pair."""
    flags: list[str] = []
    prof = score_profile(fam, tol=tol)

    if variance_truth is None:
        variance_truth = expectation(fam, lambda x: h.h(x) ** 2, tol) - expectation(fam, h.h, tol) ** 2

    lower = lower_bound(fam, h=h, tol=tol, profile=prof)
    if math.isinf(prof.fisher):
        flags.append("vacuous-lower")

    witness: float | None = None
    if isinstance(fam, DiscreteFamily):
        upper = math.inf
        flags.append("discrete-no-upper")
        if fam.name == "poisson":
            # The shifted summation-by-parts weights are used here; the
            # unshifted display sometimes quoted for this bound overshoots.
            flags.append("poisson-display-suspected-typo")
    else:
        upper = upper_bound(fam, h=h, tol=tol, profile=prof)
        if math.isinf(upper):
            if not prof.monotonicity.strictly_monotone:
                witness = prof.monotonicity.witness
                flags.append("upper-infinite")
                if witness is not None:
                    flags.append(f"score-not-monotone-witness={witness!r}")
            else:
                flags.append("upper-divergent")

    residual = tightness_residual(fam, h, prof, variance_truth, tol=tol)

    comparators: tuple[Comparator, ...] = ()
    if with_comparators:
        try:
            comparators = tuple(literature_bounds(fam, h, tol=tol))
        except NotApplicable:
            pass

    return BoundReport(
        lower=lower,
        variance_truth=variance_truth,
        upper=upper,
        tightness_residual=residual,
        comparators=comparators,
        flags=tuple(flags),
        upper_witness=witness,
    )
