"""End-to-end verification: identity checks, falsification evidence, ground
truth variances, and scenario orchestration.

An identity check integrates T(f0) against the family's own law and passes
when the expectation vanishes to tolerance (1e-8 continuous, 1e-9 discrete).
Falsification checks evaluate the same operator under a perturbed law of the
same support and are expected to produce a clearly nonzero value: evidence
for, not a proof of, the converse characterization.

Built-in test functions are polynomials (degree <= 4) multiplied by a smooth
compact bump whose radius covers all but 1e-8 of the family's mass, plus
Hermite-weighted variants for the Gaussian location family.  Ground truth is
always quadrature or series summation; the seeded Monte Carlo check at the
bottom is a diagnostic, never an oracle.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Any, Callable

from . import config
from .bounds import BoundReport, bound_report
from .families import (
    ContinuousFamily,
    DiscreteFamily,
    Family,
    Location,
    Scale,
    TestFunction,
    binomial,
    bulk_radius,
    bump,
    expectation,
    exponential,
    gamma,
    gaussian,
    geometric,
    make_family,
    named_test_function,
    poisson,
    polynomial,
    product,
    role_kind,
    sas_gaussian,
)
from .numerics import TruncationUnsafe, integrate, integrate_detecting_divergence, sum_series
from .operators import SteinOperator, UnsupportedRole, hermite_test_function, make_operator

CONTINUOUS_IDENTITY_TOL = 1e-8
DISCRETE_IDENTITY_TOL = 1e-9


class DivergentMoment(Exception):
    """E[h^2] does not exist for this family/test function."""


@dataclass(frozen=True)
class IdentityCheck:
    family: str
    role: str
    test_function: str
    expectation_value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.expectation_value) <= self.tolerance


@dataclass(frozen=True)
class ScenarioResult:
    scenario_id: str
    report: BoundReport | None
    identity_checks: tuple[IdentityCheck, ...]
    wall_time: float           # diagnostics only; never serialized
    error: str | None = None


# --------------------------------------------------------------------------
# Operator expectations.


def operator_expectation(
    op: SteinOperator,
    *,
    law: Family | None = None,
    tol: float = 1e-12,
) -> float:
    """E[T(f0)(X)] under ``law`` (default: the operator's own family), with
    any Dirac atom folded in as coefficient * density(atom location)."""
    target = law if law is not None else op.family
    if isinstance(target, DiscreteFamily):
        if math.isfinite(target.support_max):
            value = math.fsum(op(x) * target.pmf(x) for x in range(int(target.support_max) + 1))
        else:
            value = sum_series(lambda x: op(x) * target.pmf(x), 0, None, min(tol, 1e-13))
        return value

    def integrand(x: float) -> float:
        w = target.pdf(x)
        if w == 0.0:
            return 0.0
        return op(x) * w

    value = integrate(integrand, target.support, tol).value
    if op.atom is not None:
        value += op.atom.coefficient * target.pdf(op.atom.location)
    return value


def check_identity(fam: Family, f0: TestFunction, *, tol: float | None = None) -> IdentityCheck:
    """E[T(f0)(X)] = 0 under the family's own law, to the stated tolerance."""
    op = make_operator(fam, f0)
    is_discrete = isinstance(fam, DiscreteFamily)
    tolerance = tol if tol is not None else (DISCRETE_IDENTITY_TOL if is_discrete else CONTINUOUS_IDENTITY_TOL)
    value = operator_expectation(op)
    return IdentityCheck(
        family=fam.name,
        role=role_kind(fam.role),
        test_function=f0.name,
        expectation_value=value,
        tolerance=tolerance,
    )


def falsify_identity(
    fam: Family,
    f0: TestFunction,
    wrong_law: Family,
    *,
    tol: float | None = None,
) -> IdentityCheck:
    """Evaluate the family's operator under a different law of the same
    support; a nonzero expectation is falsification evidence."""
    op = make_operator(fam, f0)
    is_discrete = isinstance(fam, DiscreteFamily)
    tolerance = tol if tol is not None else (DISCRETE_IDENTITY_TOL if is_discrete else CONTINUOUS_IDENTITY_TOL)
    value = operator_expectation(op, law=wrong_law)
    return IdentityCheck(
        family=f"{fam.name}|under:{wrong_law.name}",
        role=role_kind(fam.role),
        test_function=f0.name,
        expectation_value=value,
        tolerance=tolerance,
    )


def perturbed_law(fam: Family) -> Family:
    """A different law on the same support, used for falsification evidence."""
    if isinstance(fam, DiscreteFamily):
        th = fam.role.theta0
        if fam.name == "poisson":
            return poisson(th * 2.0)
        if fam.name == "geometric":
            return geometric(th / 2.0)
        if fam.name == "binomial":
            return binomial(int(fam.structural_value("n")), th / 2.0)
        raise UnsupportedRole(f"no perturbation registered for {fam.name}")
    if fam.name == "gaussian":
        return gaussian(fam.role, sigma=fam.structural_value("sigma") * math.sqrt(2.0))
    if fam.name == "sas-gaussian":
        return sas_gaussian(fam.role.delta0 + 0.7)
    if fam.name == "gamma":
        return gamma(fam.role, shape=fam.structural_value("shape") + 1.0)
    if fam.name == "exponential":
        if isinstance(fam.role, Scale):
            return exponential(Scale(fam.role.sigma0 * 2.0))
        if fam.role.mu0 == 0.0:
            return exponential(Scale(2.0))  # same half-line support, different density
        raise UnsupportedRole("no same-support perturbation for a shifted exponential")
    raise UnsupportedRole(f"no perturbation registered for {fam.name}")


# --------------------------------------------------------------------------
# Built-in test function family.


def builtin_test_functions(fam: Family) -> list[TestFunction]:
    """Polynomials x^k (k <= 4) times a smooth bump covering the family's
    bulk; the Gaussian location family adds Hermite-weighted variants.

    Operators evaluate f0 in base coordinates (x - mu0, sigma0 * x, or the
    skew image), so the bump is centered at the base origin and sized from
    the family's bulk radius.
    """
    radius = bulk_radius(fam)
    window = bump(radius + 2.0)
    out = [product(polynomial([0.0] * k + [1.0], name=f"x^{k}"), window) for k in range(5)]
    if isinstance(fam, ContinuousFamily) and fam.name == "gaussian" and isinstance(fam.role, Location):
        out.extend(product(hermite_test_function(n), window) for n in (1, 2, 3))
    return out


def identity_suite(fam: Family, *, tol: float | None = None) -> list[IdentityCheck]:
    return [check_identity(fam, f0, tol=tol) for f0 in builtin_test_functions(fam)]


# --------------------------------------------------------------------------
# Ground truth.


def ground_truth_variance(fam: Family, h: TestFunction, *, tol: float = 1e-12) -> float:
    """Var[h(X)] by quadrature/series; raises DivergentMoment when E[h^2] diverges."""
    if isinstance(fam, DiscreteFamily):
        try:
            second = expectation(fam, lambda x: h.h(x) ** 2, tol)
            first = expectation(fam, h.h, tol)
        except TruncationUnsafe as exc:
            raise DivergentMoment(str(exc)) from exc
        return second - first * first

    def weighted(fn: Callable[[float], float]) -> float:
        def integrand(x: float) -> float:
            w = fam.pdf(x)
            return 0.0 if w == 0.0 else fn(x) * w

        return integrate_detecting_divergence(integrand, fam.support, tol)

    second = weighted(lambda x: h.h(x) ** 2)
    if math.isinf(second):
        raise DivergentMoment(f"E[h^2] diverges for {fam.name} with h={h.name}")
    first = weighted(h.h)
    return second - first * first


# --------------------------------------------------------------------------
# Scenarios.


@dataclass(frozen=True)
class Scenario:
    """One (family, role, test function) cell of the verification matrix.

    law_value, when set, makes the identity checks evaluate the operator
    under the same family at that parameter instead of the operator's own:
    a deliberately wrong parameter that the checks are expected to expose.
    """

    scenario_id: str
    family: str
    kind: str
    value: float
    structural: tuple[tuple[str, float], ...] = ()
    test_function: str | tuple[float, ...] = "linear"
    identity_tol: float | None = None
    law_value: float | None = None

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Scenario":
        role = raw["role"]
        tf_spec = raw.get("test_function", {"name": "linear"})
        if "name" in tf_spec:
            tf: str | tuple[float, ...] = str(tf_spec["name"])
        else:
            tf = tuple(float(c) for c in tf_spec["coefficients"])
        known = {"id", "family", "role", "test_function", "tolerances", "law"}
        structural = tuple(
            sorted((k, float(v)) for k, v in raw.items() if k not in known)
        )
        tolerances = raw.get("tolerances", {})
        law = raw.get("law", {})
        return cls(
            scenario_id=str(raw["id"]),
            family=str(raw["family"]),
            kind=str(role["kind"]),
            value=float(role["value"]),
            structural=structural,
            test_function=tf,
            identity_tol=tolerances.get("identity"),
            law_value=float(law["value"]) if "value" in law else None,
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.scenario_id,
            "family": self.family,
            "role": {"kind": self.kind, "value": self.value},
        }
        for k, v in self.structural:
            out[k] = v
        if isinstance(self.test_function, str):
            out["test_function"] = {"name": self.test_function}
        else:
            out["test_function"] = {"coefficients": list(self.test_function)}
        if self.identity_tol is not None:
            out["tolerances"] = {"identity": self.identity_tol}
        if self.law_value is not None:
            out["law"] = {"value": self.law_value}
        return out

    def build_family(self) -> Family:
        return make_family(self.family, self.kind, self.value, **dict(self.structural))

    def build_law(self) -> Family | None:
        if self.law_value is None:
            return None
        return make_family(self.family, self.kind, self.law_value, **dict(self.structural))

    def build_test_function(self) -> TestFunction:
        if isinstance(self.test_function, str):
            return named_test_function(self.test_function)
        return polynomial(self.test_function)


def run_scenario(scenario: Scenario, *, tol: float = config.QUAD.request_tol) -> ScenarioResult:
    """Identity checks plus a bound report for one scenario; failures are
    recorded on the result rather than raised, so a matrix always completes."""
    started = time.perf_counter()
    try:
        fam = scenario.build_family()
        h = scenario.build_test_function()
        wrong_law = scenario.build_law()
        if wrong_law is None:
            checks = tuple(identity_suite(fam, tol=scenario.identity_tol))
        else:
            checks = tuple(
                falsify_identity(fam, f0, wrong_law, tol=scenario.identity_tol)
                for f0 in builtin_test_functions(fam)
            )
        try:
            variance = ground_truth_variance(fam, h, tol=tol)
        except DivergentMoment:
            variance = math.inf
        report = bound_report(fam, h, tol=tol, variance_truth=variance)
        return ScenarioResult(
            scenario_id=scenario.scenario_id,
            report=report,
            identity_checks=checks,
            wall_time=time.perf_counter() - started,
        )
    except (UnsupportedRole, DivergentMoment, ValueError, TruncationUnsafe) as exc:
        return ScenarioResult(
            scenario_id=scenario.scenario_id,
            report=None,
            identity_checks=(),
            wall_time=time.perf_counter() - started,
            error=f"{type(exc).__name__}: {exc}",
        )


def builtin_scenarios() -> list[Scenario]:
    """The default verification matrix used by the CLI and the test suite."""
    return [
        Scenario("gauss-loc-h-linear", "gaussian", "location", 0.0),
        Scenario("gauss-sca-h-square", "gaussian", "scale", 1.0, test_function="square"),
        Scenario("gauss-skew-h-linear", "sas-gaussian", "skew", 0.0),
        Scenario("exp-sca-h-linear", "exponential", "scale", 1.0),
        Scenario("exp-sca-h-sqrt", "exponential", "scale", 1.0, test_function="sqrt"),
        Scenario("gamma3-sca-h-linear", "gamma", "scale", 1.0, structural=(("shape", 3.0),)),
        Scenario("gamma3-loc-h-linear", "gamma", "location", 0.0, structural=(("shape", 3.0),)),
        Scenario("gamma1.5-loc-h-linear", "gamma", "location", 0.0, structural=(("shape", 1.5),)),
        Scenario("poisson2-h-linear", "poisson", "theta", 2.0),
        Scenario("poisson1-h-square", "poisson", "theta", 1.0, test_function="square"),
        Scenario("geometric-h-linear", "geometric", "theta", 0.25),
        Scenario("binomial4-h-linear", "binomial", "theta", 0.5, structural=(("n", 4.0),)),
    ]


# --------------------------------------------------------------------------
# Report serialization (schema shared with the CLI).


def _number(x: float) -> float | str:
    return "inf" if math.isinf(x) else x


def result_to_dict(result: ScenarioResult) -> dict[str, Any]:
    """Project a ScenarioResult onto the machine report schema.

    Deliberately excludes wall_time so that repeated runs are byte-identical.
    """
    if result.report is None:
        return {
            "scenario": result.scenario_id,
            "error": result.error,
            "identity_checks": [],
        }
    rep = result.report
    return {
        "scenario": result.scenario_id,
        "lower": _number(rep.lower),
        "variance": _number(rep.variance_truth),
        "upper": _number(rep.upper),
        "flags": list(rep.flags),
        "comparators": [
            {"name": c.name, "kind": c.kind, "value": _number(c.value)} for c in rep.comparators
        ],
        "identity_checks": [
            {"f0": c.test_function, "value": c.expectation_value, "pass": c.passed}
            for c in result.identity_checks
        ],
    }


def dict_to_result_fields(raw: dict[str, Any]) -> dict[str, Any]:
    """Parse a report dict back into plain numeric fields ("inf" -> inf)."""
    def num(v: Any) -> float:
        return math.inf if v == "inf" else float(v)

    out = dict(raw)
    for key in ("lower", "variance", "upper"):
        if key in out:
            out[key] = num(out[key])
    if "comparators" in out:
        out["comparators"] = [
            {**c, "value": num(c["value"])} for c in out["comparators"]
        ]
    return out


# --------------------------------------------------------------------------
# Seeded Monte Carlo diagnostics (never an oracle).


class Lcg:
    """Deterministic 64-bit linear congruential generator."""

    def __init__(self, seed: int = config.LCG.default_seed):
        self.state = seed % config.LCG.modulus

    def next_uniform(self) -> float:
        self.state = (config.LCG.multiplier * self.state + config.LCG.increment) % config.LCG.modulus
        return ((self.state >> 11) + 0.5) / 9007199254740992.0  # 2^53


def _sample(fam: Family, rng: Lcg) -> float:
    if isinstance(fam, DiscreteFamily):
        theta = fam.role.theta0
        if fam.name == "poisson":
            # Knuth's product-of-uniforms method
            limit = math.exp(-theta)
            k, prod = 0, rng.next_uniform()
            while prod > limit:
                k += 1
                prod *= rng.next_uniform()
            return float(k)
        if fam.name == "geometric":
            u = rng.next_uniform()
            return float(math.floor(math.log(u) / math.log1p(-theta)))
        n = int(fam.structural_value("n"))
        return float(sum(rng.next_uniform() < theta for _ in range(n)))

    def std_normal() -> float:
        u1, u2 = rng.next_uniform(), rng.next_uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    role = fam.role
    if fam.name == "gaussian":
        width = fam.structural_value("sigma")
        z = std_normal() * width
        if isinstance(role, Location):
            return z + role.mu0
        return z / role.sigma0
    if fam.name == "sas-gaussian":
        z = std_normal()
        return math.sinh(math.asinh(z) - role.delta0)
    if fam.name == "exponential":
        e = -math.log(rng.next_uniform())
        if isinstance(role, Location):
            return e + role.mu0
        return e / role.sigma0
    if fam.name == "gamma":
        a = fam.structural_value("shape")
        # Marsaglia-Tsang; the boost keeps it valid for a < 1.
        boost = 1.0
        if a < 1.0:
            boost = rng.next_uniform() ** (1.0 / a)
            a += 1.0
        d = a - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            z = std_normal()
            v = (1.0 + c * z) ** 3
            if v <= 0.0:
                continue
            u = rng.next_uniform()
            if math.log(u) < 0.5 * z * z + d - d * v + d * math.log(v):
                y = d * v * boost
                break
        if isinstance(role, Location):
            return y + role.mu0
        return y / role.sigma0
    raise UnsupportedRole(f"no sampler registered for {fam.name}")


def monte_carlo_variance(
    fam: Family,
    h: TestFunction,
    n: int = 1_000_000,
    seed: int = config.LCG.default_seed,
) -> float:
    """Sample estimate of Var[h(X)] from the fixed LCG; diagnostic only."""
    rng = Lcg(seed)
    total = 0.0
    total_sq = 0.0
    for _ in range(n):
        v = h.h(_sample(fam, rng))
        total += v
        total_sq += v * v
    mean = total / n
    return total_sq / n - mean * mean
