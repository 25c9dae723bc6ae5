import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

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
    square,
)
from steinb.numerics import Verdict, derivative
from steinb.operators import (
    BoundaryViolation,
    UnsupportedRole,
    comparison_grid,
    discrete_operator,
    exchanging_pair,
    generic_operator_value,
    hermite,
    hermite_test_function,
    location_operator,
    make_operator,
    sas_lifted,
    scale_operator,
    score_profile,
    skew_operator_sas,
)

KAPPA = 3 - math.sqrt(math.e * math.pi / 2) * math.erfc(1 / math.sqrt(2))  # ~2.34432


class TestHermite:
    @pytest.mark.parametrize("n,x,expected", [(0, 7.3, 1.0), (2, 0.0, -1.0), (3, 2.0, 2.0)])
    def test_examples(self, n, x, expected):
        assert hermite(n, x) == pytest.approx(expected, abs=1e-12)

    def test_order_cap(self):
        with pytest.raises(ValueError):
            hermite(31, 0.0)

    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(0, 10), x=st.floats(-4, 4))
    def test_derivative_recursion(self, n, x):
        # H_{n+1} = -H_n' + x H_n.  Finite differences confirm the derivative
        # relation H_n' = n H_{n-1} (to the accuracy a difference quotient of
        # a polynomial of this size can reach); the recursion itself then
        # holds to 1e-9 relative to the polynomial magnitudes.
        analytic = n * hermite(n - 1, x) if n > 0 else 0.0
        fd = derivative(lambda t: hermite(n, t), x)
        fd_scale = max(1.0, abs(hermite(n, x)), abs(analytic))
        assert abs(fd - analytic) <= 1e-5 * fd_scale
        scale = max(1.0, abs(hermite(n + 1, x)))
        assert abs(-analytic + x * hermite(n, x) - hermite(n + 1, x)) <= 1e-9 * scale

    @pytest.mark.parametrize("n", range(4))
    @pytest.mark.parametrize("x", [-2.3, -0.9, 0.4, 1.1, 2.6])
    def test_derivative_recursion_low_order_absolute(self, n, x):
        # at low orders the difference quotient is clean enough for the
        # literal 1e-9
        hn_prime = derivative(lambda t: hermite(n, t), x)
        assert -hn_prime + x * hermite(n, x) == pytest.approx(hermite(n + 1, x), abs=1e-9)


class TestLocationOperator:
    def test_gaussian_constant(self):
        op = location_operator(gaussian(Location(0.0)), ONE)
        assert op(2.0) == pytest.approx(2.0)
        assert op.atom is None

    def test_gaussian_hermite_weight(self):
        # with f = H_1 * 1 the operator value at 0 is H_2(0) = -1
        op = location_operator(gaussian(Location(0.0)), hermite_test_function(1))
        assert op(0.0) == pytest.approx(-1.0)

    def test_exponential_atom(self):
        op = location_operator(exponential(Location(0.0)), linear())
        assert op(3.0) == pytest.approx(2.0)
        assert op.atom.location == 0.0 and op.atom.coefficient == 0.0
        op1 = location_operator(exponential(Location(0.0)), ONE)
        assert op1.atom.coefficient == -1.0

    def test_gamma_has_no_atom(self):
        assert location_operator(gamma(Location(0.0), shape=3), ONE).atom is None

    def test_role_mismatch(self):
        with pytest.raises(UnsupportedRole):
            location_operator(gaussian(Scale(1.0)), ONE)


class TestScaleOperator:
    @pytest.mark.parametrize(
        "fam,x,expected",
        [
            (gaussian(Scale(1.0)), 2.0, -3.0),
            (exponential(Scale(1.0)), 1.0, 0.0),
            (gamma(Scale(1.0), shape=3), 3.0, 0.0),
        ],
    )
    def test_unit_scale_closed_forms(self, fam, x, expected):
        assert scale_operator(fam, ONE)(x) == pytest.approx(expected, abs=1e-12)


class TestSkewOperator:
    def test_variant_form(self):
        fam = sas_gaussian(0.0)
        op = skew_operator_sas(fam, sas_lifted(ONE))
        assert op(1.0) == pytest.approx(0.0, abs=1e-12)
        assert op(2.0) == pytest.approx(-6.0, abs=1e-12)

    def test_plain_form(self):
        op = skew_operator_sas(sas_gaussian(0.0), ONE)
        assert op(1.0) == pytest.approx(-1 / math.sqrt(2), abs=1e-12)


class TestDiscreteOperator:
    def test_poisson(self):
        op = discrete_operator(poisson(1.0), ONE)
        assert op(2.0) == pytest.approx(-math.e, abs=1e-12)

    def test_geometric_sign_follows_defining_quotient(self):
        # The defining quotient fixes the sign as d/dp (1-p)^x < 0; the often
        # quoted form is its negative.
        op = discrete_operator(geometric(0.5), ONE)
        assert op(0.0) == pytest.approx(-2.0, abs=1e-12)
        assert op(0.0) == pytest.approx(generic_operator_value(geometric(0.5), ONE, 0.0), rel=1e-7)

    def test_binomial(self):
        op = discrete_operator(binomial(2, 0.5), ONE)
        assert op(2.0) == pytest.approx(-32.0, abs=1e-10)


ALL_NINE = [
    gaussian(Location(0.0)),
    gaussian(Scale(1.0)),
    sas_gaussian(0.0),
    exponential(Location(0.0)),
    exponential(Scale(1.0)),
    gamma(Scale(1.0), shape=3.0),
    poisson(1.0),
    geometric(0.25),
    binomial(4, 0.5),
]


@pytest.mark.parametrize("fam", ALL_NINE, ids=lambda f: f"{f.name}-{f.role}")
@pytest.mark.parametrize("f0", [ONE, linear(), square()], ids=lambda t: t.name)
def test_closed_form_matches_generic_quotient(fam, f0):
    op = make_operator(fam, f0)
    for x in comparison_grid(fam, 200):
        closed = op(x)
        generic = generic_operator_value(fam, f0, x)
        assert abs(closed - generic) <= 1e-6 * (1.0 + abs(closed))


class TestScoreProfile:
    def test_gaussian_location(self):
        prof = score_profile(gaussian(Location(0.0)))
        assert prof.fisher == pytest.approx(1.0, abs=1e-10)
        assert prof.phi(1.3) == pytest.approx(1.3)
        assert prof.monotonicity.verdict is Verdict.INCREASING
        assert abs(prof.zero_crossing) < 1e-9

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_gaussian_scale(self, s):
        prof = score_profile(gaussian(Scale(s)))
        assert prof.fisher == pytest.approx(2.0 / s**2, abs=1e-9)
        assert prof.phi(0.0) == pytest.approx(1.0 / s)
        assert prof.monotonicity.verdict is Verdict.NOT_MONOTONE

    def test_sas_kappa(self):
        prof = score_profile(sas_gaussian(0.0))
        # oracle: closed form quoted for E[X^6/(1+X^2)] under the standard normal
        assert prof.fisher == pytest.approx(KAPPA, abs=1e-9)
        assert prof.fisher == pytest.approx(2.34432, abs=1e-4)
        assert prof.phi(1.0) == pytest.approx(-1 / math.sqrt(2), abs=1e-12)
        assert prof.monotonicity.verdict is Verdict.NOT_MONOTONE
        assert prof.monotonicity.witness == 0.0

    @pytest.mark.parametrize("a,expected", [(3.0, 1.0), (5.0, 1.0 / 3.0)])
    def test_gamma_location(self, a, expected):
        prof = score_profile(gamma(Location(0.0), shape=a))
        assert prof.fisher == pytest.approx(expected, abs=1e-7)
        assert prof.phi(2.0) == pytest.approx((2.0 - (a - 1.0)) / 2.0)
        assert prof.monotonicity.verdict is Verdict.INCREASING

    def test_gamma_location_divergent_fisher(self):
        prof = score_profile(gamma(Location(0.0), shape=1.5))
        assert math.isinf(prof.fisher)

    def test_gamma_scale(self):
        prof = score_profile(gamma(Scale(2.0), shape=3.0))
        assert prof.fisher == pytest.approx(3.0 / 4.0, abs=1e-9)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_poisson(self, lam):
        prof = score_profile(poisson(lam))
        assert prof.fisher == pytest.approx(1.0 / lam, abs=1e-10)
        assert prof.phi(3.0) == pytest.approx(3.0 / lam - 1.0)
        assert prof.zero_crossing == pytest.approx(lam, abs=1e-9)

    def test_exponential_location_rejected(self):
        with pytest.raises(UnsupportedRole):
            score_profile(exponential(Location(0.0)))

    def test_exponential_scale(self):
        prof = score_profile(exponential(Scale(2.0)))
        assert prof.fisher == pytest.approx(0.25, abs=1e-10)
        assert prof.monotonicity.verdict is Verdict.DECREASING
        assert prof.zero_crossing == pytest.approx(0.5, abs=1e-9)

    def test_fisher_stable_under_tolerance_halving(self):
        for fam in (gaussian(Scale(1.0)), gamma(Location(0.0), shape=3.0), sas_gaussian(0.0)):
            coarse = score_profile(fam, tol=1e-10).fisher
            fine = score_profile(fam, tol=5e-11).fisher
            assert coarse > 0.0
            assert fine == pytest.approx(coarse, rel=1e-6)


class TestExchangingPair:
    def test_gaussian_location(self):
        pair = exchanging_pair(gaussian(Location(0.0)))
        assert pair.f_tilde(3.7) == -1.0
        assert pair.boundary_ok

    def test_exponential_scale(self):
        lam = 2.0
        pair = exchanging_pair(exponential(Scale(lam)))
        assert pair.f_tilde(3.0) == pytest.approx(3.0 / lam)
        assert pair.boundary_ok

    def test_poisson_exchange_identity_exact(self):
        lam = 2.0
        fam = poisson(lam)
        pair = exchanging_pair(fam)
        w = lambda j: pair.f_tilde(float(j)) * fam.pmf(j)
        for x in range(0, 61):
            lhs = fam.pmf(x) * (x / lam - 1.0)  # d/dlambda of the pmf
            assert abs(lhs - (w(x + 1) - w(x))) < 1e-9

    @pytest.mark.parametrize(
        "fam",
        [geometric(0.25), binomial(6, 0.3)],
        ids=lambda f: f.name,
    )
    def test_discrete_exchange_identity_generic(self, fam):
        theta = fam.role.theta0
        pair = exchanging_pair(fam)
        top = 40 if math.isinf(fam.support_max) else int(fam.support_max)
        w = lambda j: pair.f_tilde(float(j)) * fam.pmf_fn(j, theta) if j <= fam.support_max else 0.0
        for x in range(top + 1):
            step = 1e-7
            lhs = (fam.pmf_fn(x, theta + step) - fam.pmf_fn(x, theta - step)) / (2 * step)
            assert abs(lhs - (w(x + 1) - w(x))) < 1e-8

    @pytest.mark.parametrize(
        "fam",
        [gaussian(Location(0.0)), gaussian(Scale(1.0)), exponential(Scale(1.0)),
         sas_gaussian(0.0), gamma(Scale(1.0), shape=3.0)],
        ids=lambda f: f"{f.name}-{f.role}",
    )
    def test_continuous_exchange_identity(self, fam):
        from steinb.families import density_at, role_value

        pair = exchanging_pair(fam)
        theta0 = role_value(fam.role)
        for x in (0.3, 0.9, 1.7, 2.5):
            lhs = (density_at(fam, x, theta0 + 1e-6) - density_at(fam, x, theta0 - 1e-6)) / 2e-6
            rhs = derivative(lambda y: pair.f_tilde(y) * fam.pdf(y), x)
            assert abs(lhs - rhs) <= 1e-6

    def test_exponential_location_boundary_violation(self):
        with pytest.raises(BoundaryViolation):
            exchanging_pair(exponential(Location(0.0)), ONE)
        pair = exchanging_pair(exponential(Location(0.0)), ONE, strict=False)
        assert not pair.boundary_ok
        assert pair.boundary_values[0] == pytest.approx(-1.0)

    def test_exponential_location_vanishing_f0_passes(self):
        pair = exchanging_pair(exponential(Location(0.0)), linear())
        assert pair.boundary_ok
