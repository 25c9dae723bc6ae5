"""Parametric Stein operators for classical distributions, with certified
lower and upper variance bounds checked against quadrature ground truth."""

from .bounds import (
    BoundReport,
    Comparator,
    NotApplicable,
    NotStronglyUnimodal,
    PoincareConstant,
    bound_report,
    discrete_lower_bound,
    literature_bounds,
    lower_bound,
    poincare_constant,
    upper_bound,
)
from .families import (
    ContinuousFamily,
    DiscreteFamily,
    DiscreteTheta,
    InvalidParameter,
    Location,
    Scale,
    SkewSAS,
    TestFunction,
    binomial,
    density_at,
    expectation,
    exponential,
    gamma,
    gaussian,
    geometric,
    linear,
    make_family,
    pmf_at,
    poisson,
    polynomial,
    quartic,
    sas_gaussian,
    sas_transform,
    sqrt_fn,
    square,
)
from .harness import (
    DivergentMoment,
    IdentityCheck,
    Scenario,
    ScenarioResult,
    builtin_scenarios,
    check_identity,
    falsify_identity,
    ground_truth_variance,
    identity_suite,
    monte_carlo_variance,
    run_scenario,
)
from .numerics import (
    Interval,
    MonotonicityCertificate,
    NonConvergence,
    NonFinite,
    QuadResult,
    TruncationUnsafe,
    Verdict,
    derivative,
    integrate,
    monotonicity_scan,
    sum_series,
)
from .operators import (
    Atom,
    BoundaryViolation,
    ExchangingPair,
    ScoreProfile,
    SteinOperator,
    UnsupportedRole,
    discrete_operator,
    exchanging_pair,
    hermite,
    location_operator,
    scale_operator,
    score_profile,
    skew_operator_sas,
)

__version__ = "0.1.0"
