import json
import math

import pytest

from steinb.families import (
    Location,
    ONE,
    Scale,
    binomial,
    exponential,
    gamma,
    gaussian,
    geometric,
    linear,
    poisson,
    sas_gaussian,
    sqrt_fn,
    square,
)
from steinb.harness import (
    DivergentMoment,
    Scenario,
    builtin_scenarios,
    builtin_test_functions,
    check_identity,
    dict_to_result_fields,
    falsify_identity,
    ground_truth_variance,
    identity_suite,
    monte_carlo_variance,
    perturbed_law,
    result_to_dict,
    run_scenario,
)

ALL_FAMILIES = [
    gaussian(Location(0.0)),
    gaussian(Scale(1.0)),
    sas_gaussian(0.0),
    exponential(Location(0.0)),
    exponential(Scale(1.5)),
    gamma(Scale(1.0), shape=3.0),
    gamma(Location(0.0), shape=3.0),
    poisson(1.0),
    geometric(0.25),
    binomial(4, 0.5),
]


class TestCheckIdentity:
    def test_gaussian_location_linear(self):
        check = check_identity(gaussian(Location(0.0)), linear())
        assert abs(check.expectation_value) < 1e-10
        assert check.passed and check.tolerance == 1e-8

    def test_exponential_scale_constant(self):
        check = check_identity(exponential(Scale(1.0)), ONE)
        assert abs(check.expectation_value) < 1e-10

    def test_poisson_constant(self):
        check = check_identity(poisson(1.0), ONE)
        assert abs(check.expectation_value) < 1e-10
        assert check.tolerance == 1e-9

    def test_exponential_location_with_vanishing_atom(self):
        check = check_identity(exponential(Location(0.0)), linear())
        assert abs(check.expectation_value) < 1e-10

    def test_exponential_location_atom_contributes(self):
        # with f0 = 1 the atom carries weight -1; the identity only balances
        # because the expectation routine adds it back
        check = check_identity(exponential(Location(0.0)), ONE)
        assert abs(check.expectation_value) < 1e-10


@pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f"{f.name}-{f.role}")
def test_identity_suite_passes(fam):
    checks = identity_suite(fam)
    assert len(checks) >= 5
    for check in checks:
        assert check.passed, (check.test_function, check.expectation_value)


class TestFalsification:
    def test_gaussian_wrong_variance_detected(self):
        # the location operator of the standard normal, tested under a
        # variance-2 normal: E[-1 + X^2] = 1
        fam = gaussian(Location(0.0))
        check = falsify_identity(fam, linear(), perturbed_law(fam))
        assert check.expectation_value == pytest.approx(1.0, abs=1e-9)
        assert not check.passed

    def test_poisson_wrong_rate_detected(self):
        check = falsify_identity(poisson(1.0), ONE, poisson(2.0))
        assert check.expectation_value == pytest.approx(-math.e, abs=1e-10)

    def test_same_law_control(self):
        for fam in ALL_FAMILIES:
            f0 = builtin_test_functions(fam)[1]
            control = falsify_identity(fam, f0, fam)
            assert control.passed, fam.name

    @pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f"{f.name}-{f.role}")
    def test_perturbed_law_detected(self, fam):
        wrong = perturbed_law(fam)
        strongest = max(
            abs(falsify_identity(fam, f0, wrong).expectation_value)
            for f0 in builtin_test_functions(fam)
        )
        tolerance = 1e-9 if fam.is_discrete else 1e-8
        assert strongest > 10 * tolerance


class TestGroundTruth:
    def test_gaussian_linear(self):
        assert ground_truth_variance(gaussian(Location(0.0)), linear()) == pytest.approx(
            1.0, abs=1e-11
        )

    def test_exponential_sqrt(self):
        # oracle: Var = E[X] - E[sqrt(X)]^2 = 1 - pi/4
        value = ground_truth_variance(exponential(Scale(1.0)), sqrt_fn())
        assert value == pytest.approx(1.0 - math.pi / 4.0, abs=1e-11)

    def test_poisson_square(self):
        # oracle: independent truncated series with exact rational terms
        lam = 1.0
        pmf = lambda x: math.exp(-lam + x * math.log(lam) - math.lgamma(x + 1))
        e4 = sum(x**4 * pmf(x) for x in range(80))
        e2 = sum(x**2 * pmf(x) for x in range(80))
        expected = e4 - e2 * e2
        value = ground_truth_variance(poisson(1.0), square())
        assert value == pytest.approx(expected, abs=1e-10)
        assert value == pytest.approx(11.0, abs=1e-10)

    def test_divergent_moment(self):
        heavy = lambda x: x ** (-0.75) if x > 0 else 0.0
        from steinb.families import TestFunction

        h = TestFunction("x^-3/4", heavy, lambda x: -0.75 * x**-1.75 if x > 0 else 0.0)
        with pytest.raises(DivergentMoment):
            ground_truth_variance(exponential(Scale(1.0)), h)


class TestScenarios:
    def test_builtin_ids_unique(self):
        ids = [s.scenario_id for s in builtin_scenarios()]
        assert len(ids) == len(set(ids))

    def test_roundtrip_through_dict(self):
        for scenario in builtin_scenarios():
            clone = Scenario.from_dict(scenario.to_dict())
            assert clone == scenario

    def test_run_scenario_deterministic(self):
        scenario = builtin_scenarios()[4]  # exp-sca-h-sqrt
        first = json.dumps(result_to_dict(run_scenario(scenario)), sort_keys=True)
        second = json.dumps(result_to_dict(run_scenario(scenario)), sort_keys=True)
        assert first == second

    def test_tolerance_halving_stability(self):
        scenario = builtin_scenarios()[5]  # gamma3-sca-h-linear
        rep1 = run_scenario(scenario, tol=1e-10).report
        rep2 = run_scenario(scenario, tol=5e-11).report
        for a, b in [
            (rep1.lower, rep2.lower),
            (rep1.variance_truth, rep2.variance_truth),
            (rep1.upper, rep2.upper),
        ]:
            assert b == pytest.approx(a, rel=1e-8)

    def test_failure_recorded_not_raised(self):
        bad = Scenario("exp-loc", "exponential", "location", 0.0)
        result = run_scenario(bad)
        assert result.report is None
        assert "UnsupportedRole" in result.error

    def test_wall_time_not_serialized(self):
        result = run_scenario(builtin_scenarios()[0])
        assert result.wall_time > 0
        assert "wall_time" not in result_to_dict(result)

    def test_report_dict_schema(self):
        result = run_scenario(builtin_scenarios()[4])
        d = result_to_dict(result)
        assert set(d) == {"scenario", "lower", "variance", "upper", "flags",
                          "comparators", "identity_checks"}
        assert all(set(c) == {"name", "kind", "value"} for c in d["comparators"])
        assert all(set(c) == {"f0", "value", "pass"} for c in d["identity_checks"])

    def test_inf_encoding_roundtrip(self):
        result = run_scenario(Scenario("skew", "sas-gaussian", "skew", 0.0))
        d = result_to_dict(result)
        assert d["upper"] == "inf"
        parsed = dict_to_result_fields(json.loads(json.dumps(d)))
        assert math.isinf(parsed["upper"])
        assert parsed["lower"] == d["lower"]


class TestMonteCarloDiagnostic:
    def test_deterministic_given_seed(self):
        a = monte_carlo_variance(gaussian(Location(0.0)), linear(), n=2000, seed=7)
        b = monte_carlo_variance(gaussian(Location(0.0)), linear(), n=2000, seed=7)
        assert a == b

    @pytest.mark.parametrize(
        "fam,h,expected",
        [
            (gaussian(Location(0.0)), linear(), 1.0),
            (exponential(Scale(1.0)), linear(), 1.0),
            (gamma(Scale(1.0), shape=3.0), linear(), 3.0),
            (poisson(2.0), linear(), 2.0),
            (geometric(0.25), linear(), 12.0),
            (binomial(4, 0.5), linear(), 1.0),
            (sas_gaussian(0.5), linear(), None),  # cross-check against quadrature
        ],
    )
    def test_agrees_loosely_with_quadrature(self, fam, h, expected):
        if expected is None:
            expected = ground_truth_variance(fam, h)
        estimate = monte_carlo_variance(fam, h, n=60_000, seed=20130819)
        assert estimate == pytest.approx(expected, rel=0.08)
