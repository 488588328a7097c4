"""Service-time and removal-time laws.

Every law exposes a closed-form survival function, an exact residual
sampler, and a vectorised sampler driven by an explicit
``numpy.random.Generator``. The heavy/light-everywhere classifier works on
closed-form survivals only, never on samples.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import ConditioningOnNullEvent, IntegrationDivergence, ParseError

HEAVY = "HeavyEverywhere"
LIGHT = "LightEverywhere"
BOTH = "Both"
NEITHER = "Neither"


class Distribution:
    """Base class; concrete laws are frozen dataclasses below."""

    def survival(self, x: float) -> float:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def _residual_draw(self, age: float, u: float) -> float:
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        """Points where the survival function is not smooth."""
        return []

    def min_of_n_mean_exact(self, n: int) -> float:
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError

    def residual_survival(self, age: float, x: float) -> float:
        s_age = self.survival(age)
        if s_age <= 0.0:
            raise ConditioningOnNullEvent(
                f"P(X > {age}) = 0 for {self.spec()}; residual law undefined"
            )
        return self.survival(age + x) / s_age

    def sample_residual(self, age: float, rng: np.random.Generator) -> float:
        if self.survival(age) <= 0.0:
            raise ConditioningOnNullEvent(
                f"P(X > {age}) = 0 for {self.spec()}; residual law undefined"
            )
        # 1 - random() lies in (0, 1], keeps logs finite
        return self._residual_draw(age, 1.0 - rng.random())

    def __str__(self) -> str:
        return self.spec()


def _check_positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


def _check_nonneg(name, value):
    if not (value >= 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a nonnegative finite number, got {value!r}")


def _fmt(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float

    def __post_init__(self):
        _check_positive("rate", self.rate)

    def survival(self, x):
        return 1.0 if x <= 0 else math.exp(-self.rate * x)

    def mean(self):
        return 1.0 / self.rate

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def _residual_draw(self, age, u):
        return -math.log(u) / self.rate

    def min_of_n_mean_exact(self, n):
        return 1.0 / (n * self.rate)

    def spec(self):
        return f"exp({_fmt(self.rate)})"


@dataclass(frozen=True)
class MixtureExponential(Distribution):
    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        comps = tuple((float(p), float(mu)) for p, mu in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        for p, mu in comps:
            if not 0.0 < p <= 1.0:
                raise ValueError(f"mixture weight {p} outside (0, 1]")
            _check_positive("mixture rate", mu)
        total = sum(p for p, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total}, expected 1")

    @property
    def weights(self):
        return np.array([p for p, _ in self.components])

    @property
    def rates(self):
        return np.array([mu for _, mu in self.components])

    def survival(self, x):
        if x <= 0:
            return 1.0
        return sum(p * math.exp(-mu * x) for p, mu in self.components)

    def mean(self):
        return sum(p / mu for p, mu in self.components)

    def sample(self, rng, size=None):
        idx = rng.choice(len(self.components), size=size, p=self.weights)
        scale = 1.0 / self.rates[idx]
        return rng.exponential(1.0, size) * scale

    def _residual_draw(self, age, u):
        # posterior component weights given survival past `age`, then memoryless
        w = [p * math.exp(-mu * age) for p, mu in self.components]
        total = sum(w)
        # split u into a component pick and a fresh uniform
        acc = 0.0
        for (p, mu), wi in zip(self.components, w):
            share = wi / total
            if u <= acc + share or (p, mu) == self.components[-1]:
                v = (u - acc) / share if share > 0 else 1.0
                v = min(max(v, 1e-300), 1.0)
                return -math.log(v) / mu
            acc += share
        raise AssertionError("unreachable")

    def min_of_n_mean_exact(self, n):
        # E[min] = int S(x)^n dx, expand the n-th power of the mixture survival
        L = len(self.components)
        total = 0.0
        for counts in _compositions(n, L):
            coef = math.factorial(n)
            rate = 0.0
            for (p, mu), c in zip(self.components, counts):
                coef = coef / math.factorial(c) * p**c
                rate += c * mu
            total += coef / rate
        return total

    def spec(self):
        body = ",".join(f"{_fmt(p)}:{_fmt(mu)}" for p, mu in self.components)
        return f"mixexp({body})"


def _compositions(n, parts):
    for cut in itertools.combinations(range(n + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cut:
            out.append(c - prev - 1)
            prev = c
        out.append(n + parts - 1 - prev - 1)
        yield out


@dataclass(frozen=True)
class ShiftedExponential(Distribution):
    shift: float
    rate: float

    def __post_init__(self):
        _check_nonneg("shift", self.shift)
        _check_positive("rate", self.rate)

    def survival(self, x):
        return 1.0 if x < self.shift else math.exp(-self.rate * (x - self.shift))

    def mean(self):
        return self.shift + 1.0 / self.rate

    def sample(self, rng, size=None):
        return self.shift + rng.exponential(1.0 / self.rate, size)

    def _residual_draw(self, age, u):
        return max(self.shift - age, 0.0) - math.log(u) / self.rate

    def breakpoints(self):
        return [self.shift]

    def min_of_n_mean_exact(self, n):
        return self.shift + 1.0 / (n * self.rate)

    def spec(self):
        return f"shiftexp({_fmt(self.shift)},{_fmt(self.rate)})"


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: float
    hi: float

    def __post_init__(self):
        _check_nonneg("lo", self.lo)
        if not self.hi > self.lo:
            raise ValueError(f"uniform needs hi > lo, got ({self.lo}, {self.hi})")

    def survival(self, x):
        if x < self.lo:
            return 1.0
        if x >= self.hi:
            return 0.0
        return (self.hi - x) / (self.hi - self.lo)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size)

    def _residual_draw(self, age, u):
        start = max(self.lo, age)
        return (start + (1.0 - u) * (self.hi - start)) - age

    def breakpoints(self):
        return [self.lo, self.hi]

    def min_of_n_mean_exact(self, n):
        return self.lo + (self.hi - self.lo) / (n + 1)

    def spec(self):
        return f"uniform({_fmt(self.lo)},{_fmt(self.hi)})"


@dataclass(frozen=True)
class Constant(Distribution):
    c: float

    def __post_init__(self):
        # c = 0 is allowed: it is the zero removal cost
        _check_nonneg("c", self.c)

    def survival(self, x):
        return 1.0 if x < self.c else 0.0

    def mean(self):
        return self.c

    def sample(self, rng, size=None):
        if size is None:
            return self.c
        return np.full(size, self.c, dtype=float)

    def _residual_draw(self, age, u):
        return self.c - age

    def breakpoints(self):
        return [self.c]

    def min_of_n_mean_exact(self, n):
        return self.c

    def spec(self):
        return f"const({_fmt(self.c)})"


@dataclass(frozen=True)
class TwoPoint(Distribution):
    """Mass ``1 - prob_c2`` at ``c1`` and ``prob_c2`` at ``c2``."""

    c1: float
    c2: float
    prob_c2: float

    def __post_init__(self):
        _check_nonneg("c1", self.c1)
        if not self.c2 > self.c1:
            raise ValueError(f"two-point law needs c2 > c1, got ({self.c1}, {self.c2})")
        if not 0.0 <= self.prob_c2 <= 1.0:
            raise ValueError(f"prob_c2 outside [0, 1]: {self.prob_c2}")

    @property
    def light_example(self) -> bool:
        return 2 * self.c1 > self.c2 > self.c1

    def survival(self, x):
        if x < self.c1:
            return 1.0
        if x < self.c2:
            return self.prob_c2
        return 0.0

    def mean(self):
        return (1.0 - self.prob_c2) * self.c1 + self.prob_c2 * self.c2

    def sample(self, rng, size=None):
        u = rng.random(size)
        return np.where(u < self.prob_c2, self.c2, self.c1) if size is not None else (
            self.c2 if u < self.prob_c2 else self.c1
        )

    def _residual_draw(self, age, u):
        if age < self.c1:
            return (self.c2 if u <= self.prob_c2 else self.c1) - age
        return self.c2 - age

    def breakpoints(self):
        return [self.c1, self.c2]

    def min_of_n_mean_exact(self, n):
        return self.c1 + (self.c2 - self.c1) * self.prob_c2**n

    def spec(self):
        return f"twopoint({_fmt(self.c1)},{_fmt(self.c2)},{_fmt(self.prob_c2)})"


@dataclass(frozen=True)
class Weibull(Distribution):
    shape: float
    scale: float

    def __post_init__(self):
        if not 0.0 < self.shape <= 1.0:
            raise ValueError(f"Weibull shape must lie in (0, 1], got {self.shape}")
        _check_positive("scale", self.scale)

    def survival(self, x):
        return 1.0 if x <= 0 else math.exp(-((x / self.scale) ** self.shape))

    def mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def sample(self, rng, size=None):
        return self.scale * rng.weibull(self.shape, size)

    def _residual_draw(self, age, u):
        t = self.scale * ((age / self.scale) ** self.shape - math.log(u)) ** (1.0 / self.shape)
        return max(t - age, 0.0)

    def min_of_n_mean_exact(self, n):
        return self.mean() * n ** (-1.0 / self.shape)

    def spec(self):
        return f"weibull({_fmt(self.shape)},{_fmt(self.scale)})"


# -- module-level operations -------------------------------------------------


def sample(dist: Distribution, rng: np.random.Generator) -> float:
    return float(dist.sample(rng))


def survival(dist: Distribution, x: float) -> float:
    return dist.survival(x)


def residual_survival(dist: Distribution, age: float, x: float) -> float:
    return dist.residual_survival(age, x)


def sample_residual(dist: Distribution, age: float, rng: np.random.Generator) -> float:
    return dist.sample_residual(age, rng)


def mean(dist: Distribution) -> float:
    return dist.mean()


@dataclass
class ClassReport:
    verdict: str
    # (a, b, lhs, rhs) where lhs = P(X>a+b | X>b), rhs = P(X>a)
    worst_heavy_violation: tuple | None
    worst_light_violation: tuple | None
    max_abs_gap: float
    grid: tuple = field(repr=False)
    tolerance: float = 1e-9
    checked_points: int = 0
    grid_based: bool = True

    @property
    def worst_violation(self):
        """The violation that decided the verdict, or None for Both."""
        if self.verdict == HEAVY:
            return self.worst_light_violation
        if self.verdict == LIGHT:
            return self.worst_heavy_violation
        if self.verdict == NEITHER:
            h, l = self.worst_heavy_violation, self.worst_light_violation
            return h if abs(h[2] - h[3]) >= abs(l[2] - l[3]) else l
        return None


def default_grid(dist: Distribution) -> list[tuple[float, float]]:
    m = dist.mean()
    if m <= 0:
        m = 1.0
    scales = [2.0**e * m for e in range(-6, 7)]
    return [(a, b) for a in scales for b in [0.0] + scales]


def classify_everywhere(
    dist: Distribution,
    grid: Iterable[tuple[float, float]] | None = None,
    tolerance: float = 1e-9,
) -> ClassReport:
    grid = tuple(default_grid(dist) if grid is None else grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    heavy_ok = light_ok = True
    worst_h = worst_l = None
    worst_h_gap = worst_l_gap = 0.0
    max_gap = 0.0
    checked = 0
    for a, b in grid:
        if a <= 0 or b < 0:
            raise ValueError(f"grid point ({a}, {b}) needs a > 0 and b >= 0")
        sb = dist.survival(b)
        if sb <= 0:
            continue
        checked += 1
        lhs = dist.survival(a + b) / sb
        rhs = dist.survival(a)
        gap = lhs - rhs
        max_gap = max(max_gap, abs(gap))
        if gap < -tolerance:
            heavy_ok = False
            if -gap > worst_h_gap:
                worst_h_gap, worst_h = -gap, (a, b, lhs, rhs)
        if gap > tolerance:
            light_ok = False
            if gap > worst_l_gap:
                worst_l_gap, worst_l = gap, (a, b, lhs, rhs)
    if heavy_ok and light_ok:
        verdict = BOTH
    elif heavy_ok:
        verdict = HEAVY
    elif light_ok:
        verdict = LIGHT
    else:
        verdict = NEITHER
    return ClassReport(verdict, worst_h, worst_l, max_gap, grid, tolerance, checked)


def min_of_n_mean(
    dist: Distribution,
    n: int,
    method: str = "analytic",
    *,
    rng: np.random.Generator | None = None,
    samples: int = 1_000_000,
    tolerance: float = 1e-9,
) -> float:
    """Expected minimum of ``n`` i.i.d. draws from ``dist``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "analytic":
        return dist.min_of_n_mean_exact(n)
    if method == "numeric-integration":
        return _integrate_min(dist, n, tolerance)
    if method == "monte-carlo":
        if samples < 1_000_000:
            raise ValueError("monte-carlo estimate needs at least 10^6 samples")
        rng = rng if rng is not None else np.random.default_rng(0)
        draws = np.asarray(dist.sample(rng, (samples, n)), dtype=float)
        return float(draws.min(axis=1).mean())
    raise ValueError(f"unknown method {method!r}")


def _integrate_min(dist, n, tolerance):
    f = lambda x: dist.survival(x) ** n
    # truncation point: first doubling where S(x)^n < 1e-12
    upper = max(dist.mean(), 1.0)
    while f(upper) >= 1e-12:
        upper *= 2.0
        if upper > 1e12:
            raise IntegrationDivergence("survival^n never drops below 1e-12")
    pts = sorted({p for p in dist.breakpoints() if 0 < p < upper})
    edges = [0.0] + pts + [upper]
    body = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
        body += val
    tail, _ = integrate.quad(f, upper, np.inf, limit=200)
    if tail > tolerance:
        raise IntegrationDivergence(
            f"tail truncation at x={upper} loses {tail:.3g} > {tolerance:.3g}"
        )
    return body


# -- spec strings --------------------------------------------------------------

_SPEC_RE = re.compile(r"^\s*([a-z]+)\s*\((.*)\)\s*$")


def parse_distribution(text: str) -> Distribution:
    """Parse ``exp(1)``, ``mixexp(0.2:0.1,0.8:1)``, ``shiftexp(1,1)`` and friends."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ParseError(f"not a distribution spec: {text!r}")
    name, body = m.group(1), m.group(2)
    try:
        if name == "mixexp":
            comps = []
            for part in body.split(","):
                p, r = part.split(":")
                comps.append((float(p), float(r)))
            return MixtureExponential(tuple(comps))
        args = [float(a) for a in body.split(",")] if body.strip() else []
        ctor = {
            "exp": (Exponential, 1),
            "shiftexp": (ShiftedExponential, 2),
            "uniform": (Uniform, 2),
            "const": (Constant, 1),
            "twopoint": (TwoPoint, 3),
            "weibull": (Weibull, 2),
        }.get(name)
        if ctor is None:
            raise ParseError(f"unknown distribution {name!r} in {text!r}")
        cls, arity = ctor
        if len(args) != arity:
            raise ParseError(f"{name} takes {arity} argument(s), got {len(args)} in {text!r}")
        return cls(*args)
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"{text!r}: {exc}") from None


def is_zero(dist: Distribution) -> bool:
    return isinstance(dist, Constant) and dist.c == 0.0


def sorted_by_rate_dominates(mix: MixtureExponential, xs: Sequence[float]) -> bool:
    """Mixture components sorted by rate have pointwise-ordered survivals."""
    rates = sorted(mu for _, mu in mix.components)
    for x in xs:
        s = [math.exp(-mu * x) for mu in rates]
        if any(s[i] < s[i + 1] for i in range(len(s) - 1)):
            return False
    return True
