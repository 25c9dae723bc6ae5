"""Catalogue of parametric families with analytic score ingredients.

Continuous families are stored as a base density g0 together with its
logarithmic derivative L = g0'/g0 (and L' where known); the parameter of
interest enters through the role:

    location   g(x; mu)    = g0(x - mu)
    scale      g(x; sigma) = sigma * g0(sigma * x)      (sigma is a rate)
    SAS skew   g(x; delta) = C_delta(x) (1+x^2)^{-1/2} g0(S_delta(x))

with S_delta(x) = sinh(asinh(x) + delta) and C_delta its cosh companion.
Discrete families live on {0, ..., N} with N independent of the parameter
and register the derivative of g(x; theta)/g(0; theta) in theta.

Note the scale convention: sigma multiplies the coordinate, so the
exponential family has rate lambda = sigma0 and the Gamma family rate
b = sigma0 (larger sigma0 means more concentrated mass).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Union

from .numerics import Interval, RealFn, integrate, sum_series

SQRT_2PI = math.sqrt(2.0 * math.pi)


class InvalidParameter(ValueError):
    """A parameter lies outside the family's admissible set."""


# --------------------------------------------------------------------------
# Parameter roles.


@dataclass(frozen=True)
class Location:
    mu0: float


@dataclass(frozen=True)
class Scale:
    sigma0: float

    def __post_init__(self) -> None:
        if not self.sigma0 > 0:
            raise InvalidParameter(f"scale parameter must be > 0, got {self.sigma0}")


@dataclass(frozen=True)
class SkewSAS:
    delta0: float


@dataclass(frozen=True)
class DiscreteTheta:
    theta0: float


ParamRole = Union[Location, Scale, SkewSAS, DiscreteTheta]


def role_kind(role: ParamRole) -> str:
    return {
        Location: "location",
        Scale: "scale",
        SkewSAS: "skew",
        DiscreteTheta: "theta",
    }[type(role)]


def role_value(role: ParamRole) -> float:
    if isinstance(role, Location):
        return role.mu0
    if isinstance(role, Scale):
        return role.sigma0
    if isinstance(role, SkewSAS):
        return role.delta0
    return role.theta0


# --------------------------------------------------------------------------
# Test functions.


@dataclass(frozen=True)
class TestFunction:
    """A function with analytic first (and optionally second) derivative."""

    name: str
    h: RealFn
    h_prime: RealFn
    h_second: RealFn | None = None
    _forward_difference: Callable[[int], float] | None = None

    def __call__(self, x: float) -> float:
        return self.h(x)

    def forward_difference(self, x: int) -> float:
        """h(x+1) - h(x); exact by construction unless a custom form was given."""
        if self._forward_difference is not None:
            return self._forward_difference(x)
        return self.h(x + 1) - self.h(x)


ONE = TestFunction("one", lambda x: 1.0, lambda x: 0.0, lambda x: 0.0)


def linear() -> TestFunction:
    return TestFunction("linear", lambda x: x, lambda x: 1.0, lambda x: 0.0)


def square() -> TestFunction:
    return TestFunction("square", lambda x: x * x, lambda x: 2.0 * x, lambda x: 2.0)


def sqrt_fn() -> TestFunction:
    """h(x) = sqrt(x) on x > 0 (extended by 0 to the left, never evaluated there)."""
    return TestFunction(
        "sqrt",
        lambda x: math.sqrt(x) if x > 0 else 0.0,
        lambda x: 0.5 / math.sqrt(x) if x > 0 else 0.0,
        lambda x: -0.25 * x**-1.5 if x > 0 else 0.0,
    )


def polynomial(coeffs: tuple[float, ...] | list[float], name: str | None = None) -> TestFunction:
    """c0 + c1 x + c2 x^2 + ... with exact derivatives."""
    cs = tuple(float(c) for c in coeffs)
    d1 = tuple(k * c for k, c in enumerate(cs))[1:]
    d2 = tuple(k * c for k, c in enumerate(d1))[1:]

    def horner(coeficients: tuple[float, ...], x: float) -> float:
        acc = 0.0
        for c in reversed(coeficients):
            acc = acc * x + c
        return acc

    return TestFunction(
        name or f"poly{cs}",
        lambda x: horner(cs, x),
        lambda x: horner(d1, x),
        lambda x: horner(d2, x),
    )


NAMED_TEST_FUNCTIONS: dict[str, Callable[[], TestFunction]] = {
    "one": lambda: ONE,
    "linear": linear,
    "square": square,
    "sqrt": sqrt_fn,
}


def named_test_function(name: str) -> TestFunction:
    try:
        return NAMED_TEST_FUNCTIONS[name]()
    except KeyError:
        raise KeyError(f"unknown test function {name!r}; known: {sorted(NAMED_TEST_FUNCTIONS)}")


def scaled(tf: TestFunction, c: float) -> TestFunction:
    return TestFunction(
        f"{c}*{tf.name}",
        lambda x: c * tf.h(x),
        lambda x: c * tf.h_prime(x),
        (lambda x: c * tf.h_second(x)) if tf.h_second is not None else None,
    )


def shifted(tf: TestFunction, c: float) -> TestFunction:
    return TestFunction(
        f"{tf.name}+{c}",
        lambda x: tf.h(x) + c,
        tf.h_prime,
        tf.h_second,
    )


def bump(radius: float) -> TestFunction:
    """Smooth compactly supported bump exp(1 - 1/(1 - (x/R)^2)) on |x| < R."""
    R = float(radius)

    def b(x: float) -> float:
        u = x / R
        w = 1.0 - u * u
        if w <= 1e-12:
            return 0.0
        return math.exp(1.0 - 1.0 / w)

    def bp(x: float) -> float:
        u = x / R
        w = 1.0 - u * u
        if w <= 1e-12:
            return 0.0
        return math.exp(1.0 - 1.0 / w) * (-2.0 * u / R) / (w * w)

    return TestFunction(f"bump(R={R:g})", b, bp)


def product(f: TestFunction, g: TestFunction, name: str | None = None) -> TestFunction:
    second = None
    if f.h_second is not None and g.h_second is not None:
        second = lambda x: (
            f.h_second(x) * g.h(x) + 2.0 * f.h_prime(x) * g.h_prime(x) + f.h(x) * g.h_second(x)
        )
    return TestFunction(
        name or f"{f.name}*{g.name}",
        lambda x: f.h(x) * g.h(x),
        lambda x: f.h_prime(x) * g.h(x) + f.h(x) * g.h_prime(x),
        second,
    )


# --------------------------------------------------------------------------
# SAS transform.


def sas_transform(x: float, delta: float) -> tuple[float, float]:
    """(S, C) = (sinh(asinh x + delta), cosh(asinh x + delta)); C^2 - S^2 = 1."""
    u = math.asinh(x) + delta
    return math.sinh(u), math.cosh(u)


# --------------------------------------------------------------------------
# Continuous families.


@dataclass(frozen=True)
class ContinuousFamily:
    name: str
    base_density: RealFn                       # g0, with its indicator built in
    log_density_derivative: RealFn             # L = g0'/g0 on the interior
    base_support: Interval
    role: ParamRole
    smooth_order: int = 2
    log_density_second_derivative: RealFn | None = None   # L' = (log g0)''
    structural: tuple[tuple[str, float], ...] = ()
    support_depends_on_parameter: bool = False

    @property
    def support(self) -> Interval:
        """Support of g(.; theta0) in x-space."""
        return _support_at(self, role_value(self.role))

    def pdf(self, x: float) -> float:
        return density_at(self, x, role_value(self.role))

    @property
    def is_discrete(self) -> bool:
        return False

    def structural_value(self, key: str) -> float:
        for k, v in self.structural:
            if k == key:
                return v
        raise KeyError(key)


def _support_at(fam: ContinuousFamily, theta: float) -> Interval:
    lo, hi = fam.base_support.lo, fam.base_support.hi
    if isinstance(fam.role, Location):
        return Interval(lo + theta, hi + theta)
    if isinstance(fam.role, Scale):
        return Interval(lo / theta if math.isfinite(lo) else lo,
                        hi / theta if math.isfinite(hi) else hi)
    return Interval(lo, hi)  # SAS skewing keeps the real line


def density_at(fam: ContinuousFamily, x: float, theta: float) -> float:
    """g(x; theta) under the family's parameter role; 0 outside the support."""
    if isinstance(fam.role, Location):
        return fam.base_density(x - theta)
    if isinstance(fam.role, Scale):
        if not theta > 0:
            raise InvalidParameter(f"scale parameter must be > 0, got {theta}")
        return theta * fam.base_density(theta * x)
    if isinstance(fam.role, SkewSAS):
        s, c = sas_transform(x, theta)
        return c / math.sqrt(1.0 + x * x) * fam.base_density(s)
    raise InvalidParameter(f"{fam.name} has no continuous role")


# --- factories ---


def _gaussian_base(width: float) -> tuple[RealFn, RealFn, RealFn]:
    s2 = width * width

    def g0(y: float) -> float:
        return math.exp(-y * y / (2.0 * s2)) / (width * SQRT_2PI)

    return g0, lambda y: -y / s2, lambda y: -1.0 / s2


def gaussian(role: ParamRole, *, sigma: float = 1.0) -> ContinuousFamily:
    """Normal base density of standard deviation ``sigma`` (default standard normal)."""
    if not sigma > 0:
        raise InvalidParameter(f"gaussian width must be > 0, got {sigma}")
    if isinstance(role, (DiscreteTheta,)):
        raise InvalidParameter("gaussian is a continuous family")
    g0, L, Lp = _gaussian_base(sigma)
    return ContinuousFamily(
        name="gaussian",
        base_density=g0,
        log_density_derivative=L,
        base_support=Interval.real_line(),
        role=role,
        log_density_second_derivative=Lp,
        structural=(("sigma", float(sigma)),),
    )


def exponential(role: ParamRole) -> ContinuousFamily:
    """Rate-1 exponential base e^{-y} on [0, inf).

    With the location role the support moves with the parameter and the
    density does not vanish at its left edge, so the variance-bound
    machinery rejects this family/role pair (the operator instead carries a
    Dirac atom at the edge).
    """
    if not isinstance(role, (Location, Scale)):
        raise InvalidParameter("exponential supports location or scale roles")

    def g0(y: float) -> float:
        return math.exp(-y) if y >= 0.0 else 0.0

    return ContinuousFamily(
        name="exponential",
        base_density=g0,
        log_density_derivative=lambda y: -1.0,
        base_support=Interval.half_line(0.0),
        role=role,
        log_density_second_derivative=lambda y: 0.0,
        support_depends_on_parameter=isinstance(role, Location),
    )


def gamma(role: ParamRole, *, shape: float) -> ContinuousFamily:
    """Gamma base y^{a-1} e^{-y} / Gamma(a) on (0, inf); shape is structural.

    The location role needs a > 1 (density vanishing at the edge); location
    Fisher information additionally diverges for a <= 2, which surfaces at
    bound time as an infinite value, not here.
    """
    a = float(shape)
    if not a > 0:
        raise InvalidParameter(f"gamma shape must be > 0, got {a}")
    if isinstance(role, Location) and not a > 1:
        raise InvalidParameter(f"gamma location role needs shape > 1, got {a}")
    if not isinstance(role, (Location, Scale)):
        raise InvalidParameter("gamma supports location or scale roles")
    lg = math.lgamma(a)

    def g0(y: float) -> float:
        if y <= 0.0:
            return 0.0
        return math.exp((a - 1.0) * math.log(y) - y - lg)

    return ContinuousFamily(
        name="gamma",
        base_density=g0,
        log_density_derivative=lambda y: (a - 1.0) / y - 1.0,
        base_support=Interval.half_line(0.0),
        role=role,
        log_density_second_derivative=lambda y: -(a - 1.0) / (y * y),
        structural=(("shape", a),),
    )


def sas_gaussian(delta0: float = 0.0) -> ContinuousFamily:
    """Sinh-arcsinh-skewed standard Gaussian; delta0 = 0 recovers the normal."""
    g0, L, Lp = _gaussian_base(1.0)
    return ContinuousFamily(
        name="sas-gaussian",
        base_density=g0,
        log_density_derivative=L,
        base_support=Interval.real_line(),
        role=SkewSAS(float(delta0)),
        log_density_second_derivative=Lp,
    )


def quartic(mu0: float = 0.0) -> ContinuousFamily:
    """Density proportional to exp(-x^4/4): unimodal but not *strongly* unimodal.

    (log g)'' = -3x^2 vanishes at the origin, so no Poincare constant of the
    form 1/eps exists; used to exercise that failure path.
    """
    z = 2.0 * math.exp(math.lgamma(1.25)) * 4.0**0.25

    def g0(y: float) -> float:
        return math.exp(-y**4 / 4.0) / z

    return ContinuousFamily(
        name="quartic",
        base_density=g0,
        log_density_derivative=lambda y: -y**3,
        base_support=Interval.real_line(),
        role=Location(float(mu0)),
        log_density_second_derivative=lambda y: -3.0 * y * y,
    )


# --------------------------------------------------------------------------
# Discrete families on {0, ..., N}.


@dataclass(frozen=True)
class DiscreteFamily:
    name: str
    role: DiscreteTheta
    support_max: float                                   # int or math.inf
    pmf_fn: Callable[[int, float], float]
    theta_ratio_derivative: Callable[[int, float], float]   # d/dtheta of g(x;theta)/g(0;theta)
    origin_log_derivative: Callable[[float], float]         # d/dtheta log g(0;theta)
    exchange_fn: RealFn                                  # f-tilde for f0 = 1, continuous in x
    score_fn: RealFn                                     # d/dtheta log g(x;theta0), continuous in x
    theta_domain: Interval = field(default=Interval(-math.inf, math.inf))
    structural: tuple[tuple[str, float], ...] = ()
    mass_tail_bound: Callable[[int], float | None] | None = None

    def pmf(self, x: int) -> float:
        return pmf_at(self, x, self.role.theta0)

    def score(self, x: float) -> float:
        """d/dtheta log g(x; theta) at theta0, extended smoothly off the integers."""
        return self.score_fn(x)

    @property
    def support(self) -> Interval:
        return Interval(0.0, self.support_max)

    @property
    def is_discrete(self) -> bool:
        return True

    def structural_value(self, key: str) -> float:
        for k, v in self.structural:
            if k == key:
                return v
        raise KeyError(key)


def pmf_at(fam: DiscreteFamily, x: int, theta: float) -> float:
    """g(x; theta), 0 off the support {0, ..., N}."""
    if not (fam.theta_domain.lo < theta < fam.theta_domain.hi):
        raise InvalidParameter(
            f"{fam.name} parameter {theta} outside ({fam.theta_domain.lo}, {fam.theta_domain.hi})"
        )
    if x < 0 or x > fam.support_max:
        return 0.0
    return fam.pmf_fn(int(x), theta)


def poisson(lam: float) -> DiscreteFamily:
    """Poisson(lambda) on the nonnegative integers."""
    if not lam > 0:
        raise InvalidParameter(f"poisson rate must be > 0, got {lam}")

    def pmf_fn(x: int, theta: float) -> float:
        return math.exp(-theta + x * math.log(theta) - math.lgamma(x + 1))

    def trd(x: int, theta: float) -> float:
        # d/dtheta of theta^x / x!  ==  theta^(x-1) / (x-1)!
        if x < 1:
            return 0.0
        return math.exp((x - 1) * math.log(theta) - math.lgamma(x))

    def tail(k: int, theta: float = lam) -> float | None:
        # Ratio bound: terms decay at least geometrically once k+2 > 2*theta.
        r = theta / (k + 2)
        if r >= 0.5:
            return None
        term = math.exp(-theta + (k + 1) * math.log(theta) - math.lgamma(k + 2))
        return term / (1.0 - r)

    return DiscreteFamily(
        name="poisson",
        role=DiscreteTheta(float(lam)),
        support_max=math.inf,
        pmf_fn=pmf_fn,
        theta_ratio_derivative=trd,
        origin_log_derivative=lambda theta: -1.0,
        exchange_fn=lambda x, theta=float(lam): -x / theta,
        score_fn=lambda x, theta=float(lam): x / theta - 1.0,
        theta_domain=Interval(0.0, math.inf),
        mass_tail_bound=tail,
    )


def geometric(p: float) -> DiscreteFamily:
    """Geometric(p) counting failures before the first success: g(x) = (1-p)^x p."""
    if not 0 < p < 1:
        raise InvalidParameter(f"geometric parameter must lie in (0, 1), got {p}")

    def pmf_fn(x: int, theta: float) -> float:
        return math.exp(x * math.log1p(-theta)) * theta

    def trd(x: int, theta: float) -> float:
        # d/dtheta of (1-theta)^x
        if x < 1:
            return 0.0
        return -x * math.exp((x - 1) * math.log1p(-theta))

    return DiscreteFamily(
        name="geometric",
        role=DiscreteTheta(float(p)),
        support_max=math.inf,
        pmf_fn=pmf_fn,
        theta_ratio_derivative=trd,
        origin_log_derivative=lambda theta: 1.0 / theta,
        exchange_fn=lambda x, theta=float(p): x / (theta * (1.0 - theta)),
        score_fn=lambda x, theta=float(p): 1.0 / theta - x / (1.0 - theta),
        theta_domain=Interval(0.0, 1.0),
        mass_tail_bound=lambda k, theta=float(p): (1.0 - theta) ** (k + 1),
    )


def binomial(n: int, p: float) -> DiscreteFamily:
    """Binomial(n, p) on {0, ..., n}; n is structural, p the parameter of interest."""
    if n < 1 or int(n) != n:
        raise InvalidParameter(f"binomial count must be a positive integer, got {n}")
    if not 0 < p < 1:
        raise InvalidParameter(f"binomial parameter must lie in (0, 1), got {p}")
    n = int(n)

    def pmf_fn(x: int, theta: float) -> float:
        if x < 0 or x > n:
            return 0.0
        return math.comb(n, x) * theta**x * (1.0 - theta) ** (n - x)

    def trd(x: int, theta: float) -> float:
        # d/dtheta of C(n,x) theta^x (1-theta)^{-x}
        if x < 1 or x > n:
            return 0.0
        return math.comb(n, x) * x * theta ** (x - 1) * (1.0 - theta) ** (-x - 1)

    return DiscreteFamily(
        name="binomial",
        role=DiscreteTheta(float(p)),
        support_max=float(n),
        pmf_fn=pmf_fn,
        theta_ratio_derivative=trd,
        origin_log_derivative=lambda theta: -n / (1.0 - theta),
        exchange_fn=lambda x, theta=float(p): -x / theta,
        score_fn=lambda x, theta=float(p): x / theta - (n - x) / (1.0 - theta),
        theta_domain=Interval(0.0, 1.0),
        structural=(("n", float(n)),),
        mass_tail_bound=lambda k: 0.0 if k >= n else None,
    )


Family = Union[ContinuousFamily, DiscreteFamily]

FAMILY_IDS = (
    "gaussian",
    "exponential",
    "gamma",
    "sas-gaussian",
    "poisson",
    "geometric",
    "binomial",
)


def make_family(name: str, kind: str, value: float, **structural: float) -> Family:
    """Construct a catalogue family from its string id, role kind, and parameter value."""
    if name == "gaussian":
        sigma = structural.pop("sigma", 1.0)
        _none(structural)
        return gaussian(_continuous_role(kind, value), sigma=sigma)
    if name == "exponential":
        _none(structural)
        return exponential(_continuous_role(kind, value))
    if name == "gamma":
        shape = structural.pop("shape", None)
        if shape is None:
            raise InvalidParameter("gamma requires a structural 'shape'")
        _none(structural)
        return gamma(_continuous_role(kind, value), shape=shape)
    if name == "sas-gaussian":
        if kind != "skew":
            raise InvalidParameter("sas-gaussian supports only the skew role")
        _none(structural)
        return sas_gaussian(value)
    if name == "poisson":
        _require_theta(kind)
        _none(structural)
        return poisson(value)
    if name == "geometric":
        _require_theta(kind)
        _none(structural)
        return geometric(value)
    if name == "binomial":
        _require_theta(kind)
        n = structural.pop("n", None)
        if n is None:
            raise InvalidParameter("binomial requires a structural 'n'")
        _none(structural)
        return binomial(int(n), value)
    raise InvalidParameter(f"unknown family {name!r}; known: {FAMILY_IDS}")


def _continuous_role(kind: str, value: float) -> ParamRole:
    if kind == "location":
        return Location(float(value))
    if kind == "scale":
        return Scale(float(value))
    if kind == "skew":
        return SkewSAS(float(value))
    raise InvalidParameter(f"unknown continuous role kind {kind!r}")


def _require_theta(kind: str) -> None:
    if kind != "theta":
        raise InvalidParameter("discrete families use the 'theta' role")


def _none(structural: dict) -> dict:
    if structural:
        raise InvalidParameter(f"unexpected structural constants: {sorted(structural)}")
    return {}


# --------------------------------------------------------------------------
# Expectations and bulk radii.


def expectation(fam: Family, fn: RealFn, tol: float = 1e-12) -> float:
    """E[fn(X)] by quadrature (continuous) or series (discrete)."""
    if isinstance(fam, DiscreteFamily):
        if math.isfinite(fam.support_max):
            return math.fsum(fn(x) * fam.pmf(x) for x in range(int(fam.support_max) + 1))
        return sum_series(lambda x: fn(x) * fam.pmf(x), 0, None, tol)

    def integrand(x: float) -> float:
        w = fam.pdf(x)
        if w == 0.0:
            return 0.0
        return fn(x) * w

    return integrate(integrand, fam.support, tol).value


@functools.lru_cache(maxsize=None)
def bulk_radius(fam: Family, eps: float = 1e-8) -> float:
    """Radius R with at most eps of the mass outside center +- R.

    The center is mu0 for location families and 0 otherwise; for families on
    a half-line the radius also covers the distance from the center to the
    finite endpoint, so a bump of this radius straddles the whole bulk.
    """
    if isinstance(fam, DiscreteFamily):
        total = 0.0
        x = 0
        cap = fam.support_max if math.isfinite(fam.support_max) else 10_000_000
        while x <= cap:
            total += fam.pmf(x)
            if total >= 1.0 - eps:
                return float(x + 1)
            x += 1
        return float(cap)

    center = fam.role.mu0 if isinstance(fam.role, Location) else 0.0
    support = fam.support

    probe_tol = max(eps * 1e-2, 1e-13)

    def tail_outside(r: float) -> float:
        mass = 0.0
        if support.hi > center + r:
            mass += integrate(fam.pdf, Interval(center + r, support.hi), probe_tol).value
        if support.lo < center - r:
            mass += integrate(fam.pdf, Interval(support.lo, center - r), probe_tol).value
        return mass

    r = 1.0
    while tail_outside(r) > eps:
        r *= 2.0
        if r > 1e9:
            raise InvalidParameter(f"could not locate the bulk of {fam.name}")
    lo_r, hi_r = r / 2.0, r
    for _ in range(30):
        mid = 0.5 * (lo_r + hi_r)
        if tail_outside(mid) > eps:
            lo_r = mid
        else:
            hi_r = mid
    return hi_r
