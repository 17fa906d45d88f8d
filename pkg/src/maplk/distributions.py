"""Jump-size laws with exact moment generating functions.

Every law carries three capabilities that the rest of the package relies on:
sampling, an MGF that is exact on a declared open domain, and closure under
the two transformations that produce derived specs (negation for duals,
exponential tilting for the Wald-martingale change of measure).  Tilting a
law by gamma reweights its density by e^{gamma*u} and renormalises, so the
tilted MGF is always G(z + gamma) / G(gamma).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AnalyticOnlyComponent, DomainViolation

_INF = math.inf


def _check_mgf_domain(law, z):
    lo, hi = law.mgf_domain
    if not (lo < z < hi):
        raise DomainViolation(z, (lo, hi), what=f"{law.name} MGF argument")


@dataclass(frozen=True)
class DeterministicJump:
    """Point mass at ``value``: G(z) = e^{z*value}, finite for all z."""

    value: float

    name = "deterministic"

    @property
    def params(self):
        return (self.value,)

    @property
    def mgf_domain(self):
        return (-_INF, _INF)

    def mgf(self, z):
        return math.exp(z * self.value)

    def mean(self):
        return self.value

    def sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def negated(self):
        return DeterministicJump(-self.value)

    def tilted(self, gamma):
        return self


@dataclass(frozen=True)
class NormalJump:
    """Gaussian jump size: G(z) = exp(mu*z + sigma^2 z^2 / 2)."""

    mu: float
    sigma: float

    name = "normal"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive; use deterministic for sigma=0")

    @property
    def params(self):
        return (self.mu, self.sigma)

    @property
    def mgf_domain(self):
        return (-_INF, _INF)

    def mgf(self, z):
        return math.exp(self.mu * z + 0.5 * (self.sigma * z) ** 2)

    def mean(self):
        return self.mu

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma, size=size)

    def negated(self):
        return NormalJump(-self.mu, self.sigma)

    def tilted(self, gamma):
        # Reweighting a Gaussian density by e^{gamma*u} shifts the mean.
        return NormalJump(self.mu + gamma * self.sigma**2, self.sigma)


@dataclass(frozen=True)
class TwoSidedExponentialJump:
    """Asymmetric double-exponential jump (Kou-type).

    With probability ``p_up`` the jump is Exp(lam_pos) > 0, otherwise
    -Exp(lam_neg) < 0.  G(z) = p*lam_pos/(lam_pos-z) + (1-p)*lam_neg/(lam_neg+z)
    on (-lam_neg, lam_pos); one-sided cases p in {0, 1} extend the domain to
    the corresponding half line.
    """

    p_up: float
    lam_pos: float
    lam_neg: float

    name = "two-sided-exponential"

    def __post_init__(self):
        if not 0.0 <= self.p_up <= 1.0:
            raise ValueError("p_up must lie in [0, 1]")
        if self.lam_pos <= 0 or self.lam_neg <= 0:
            raise ValueError("rates must be positive")

    @property
    def params(self):
        return (self.p_up, self.lam_pos, self.lam_neg)

    @property
    def mgf_domain(self):
        lo = -self.lam_neg if self.p_up < 1.0 else -_INF
        hi = self.lam_pos if self.p_up > 0.0 else _INF
        return (lo, hi)

    def mgf(self, z):
        _check_mgf_domain(self, z)
        out = 0.0
        if self.p_up > 0.0:
            out += self.p_up * self.lam_pos / (self.lam_pos - z)
        if self.p_up < 1.0:
            out += (1.0 - self.p_up) * self.lam_neg / (self.lam_neg + z)
        return out

    def mean(self):
        return self.p_up / self.lam_pos - (1.0 - self.p_up) / self.lam_neg

    def sample(self, rng, size=None):
        if size is None:
            if rng.random() < self.p_up:
                return rng.exponential(1.0 / self.lam_pos)
            return -rng.exponential(1.0 / self.lam_neg)
        up = rng.random(size) < self.p_up
        out = np.where(
            up,
            rng.exponential(1.0 / self.lam_pos, size=size),
            -rng.exponential(1.0 / self.lam_neg, size=size),
        )
        return out

    def negated(self):
        return TwoSidedExponentialJump(1.0 - self.p_up, self.lam_neg, self.lam_pos)

    def tilted(self, gamma):
        _check_mgf_domain(self, gamma)
        # Each side stays exponential with shifted rate; the mixing weight
        # picks up the per-side MGF factor.
        w_up = self.p_up * self.lam_pos / (self.lam_pos - gamma) if self.p_up > 0 else 0.0
        w_dn = (
            (1.0 - self.p_up) * self.lam_neg / (self.lam_neg + gamma)
            if self.p_up < 1
            else 0.0
        )
        return TwoSidedExponentialJump(
            w_up / (w_up + w_dn),
            self.lam_pos - gamma if self.p_up > 0 else self.lam_pos,
            self.lam_neg + gamma if self.p_up < 1 else self.lam_neg,
        )


def _expm1_over(w):
    # (e^w - 1)/w, stable near w = 0.
    if w == 0.0:
        return 1.0
    return math.expm1(w) / w


@dataclass(frozen=True)
class UniformJump:
    """Uniform jump on [a, b], optionally carrying an exponential tilt.

    The tilted density is proportional to e^{tilt*u} on [a, b] (a truncated
    exponential), which is the closure of the uniform family under Esscher
    reweighting.  tilt = 0 is the plain uniform law.
    """

    a: float
    b: float
    tilt: float = 0.0

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need a < b")

    @property
    def name(self):
        return "uniform" if self.tilt == 0.0 else "tilted-uniform"

    @property
    def params(self):
        if self.tilt == 0.0:
            return (self.a, self.b)
        return (self.a, self.b, self.tilt)

    @property
    def mgf_domain(self):
        return (-_INF, _INF)

    def _base_mgf(self, z):
        # E[e^{zU}] for U ~ Uniform[a, b].
        return math.exp(z * self.a) * _expm1_over(z * (self.b - self.a))

    def mgf(self, z):
        if self.tilt == 0.0:
            return self._base_mgf(z)
        return self._base_mgf(z + self.tilt) / self._base_mgf(self.tilt)

    def mean(self):
        if self.tilt == 0.0:
            return 0.5 * (self.a + self.b)
        g, w = self.tilt, self.b - self.a
        # d/dz log base_mgf at z = tilt.
        return self.a + w * (math.exp(g * w) / math.expm1(g * w)) - 1.0 / g

    def sample(self, rng, size=None):
        u = rng.random(size)
        if self.tilt == 0.0:
            return self.a + (self.b - self.a) * u
        g, w = self.tilt, self.b - self.a
        return self.a + np.log1p(u * math.expm1(g * w)) / g

    def negated(self):
        return UniformJump(-self.b, -self.a, -self.tilt)

    def tilted(self, gamma):
        return UniformJump(self.a, self.b, self.tilt + gamma)


@dataclass(frozen=True)
class AnalyticMgf:
    """An MGF given in closed form with no sampling rule.

    Used by the closed-form example families, whose transitional jumps are
    known only through the matrix exponent.  Simulation refuses these.
    """

    fn: object
    domain: tuple
    label: str = "analytic"

    name = "analytic"

    @property
    def params(self):
        return ()

    @property
    def mgf_domain(self):
        return tuple(self.domain)

    def mgf(self, z):
        _check_mgf_domain(self, z)
        return float(self.fn(z))

    def mean(self):
        raise AnalyticOnlyComponent(f"{self.label}: no sampleable law attached")

    def sample(self, rng, size=None):
        raise AnalyticOnlyComponent(f"{self.label}: no sampleable law attached")

    def negated(self):
        fn = self.fn
        lo, hi = self.domain
        return AnalyticMgf(lambda z: fn(-z), (-hi, -lo), self.label + " (negated)")

    def tilted(self, gamma):
        fn = self.fn
        g0 = self.mgf(gamma)
        lo, hi = self.domain
        return AnalyticMgf(
            lambda z: fn(z + gamma) / g0, (lo - gamma, hi - gamma), self.label + " (tilted)"
        )


#: Serialization registry: name -> (class, arity of the parameter list).
NAMED_LAWS = {
    "deterministic": (DeterministicJump, 1),
    "normal": (NormalJump, 2),
    "two-sided-exponential": (TwoSidedExponentialJump, 3),
    "uniform": (UniformJump, 2),
    "tilted-uniform": (UniformJump, 3),
}


def law_from_name(name, params):
    """Build a jump law from its registry name and parameter list."""
    try:
        cls, arity = NAMED_LAWS[name]
    except KeyError:
        raise ValueError(f"unknown distribution name {name!r}") from None
    if len(params) != arity:
        raise ValueError(f"{name} expects {arity} parameters, got {len(params)}")
    return cls(*[float(p) for p in params])
