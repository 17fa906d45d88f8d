"""Two-phase Markov additive processes: specs and spectral machinery.

A MAP on R x {+1, -1} is described by five independent characteristics: two
(possibly killed) Lévy components, two transitional jump laws applied at
phase switches, and the 2x2 rate matrix of the modulating chain.  Its matrix
exponent

    F(z) = diag(psi_1(z), psi_-1(z)) + Q ∘ G(z),       G_ii = 1,

satisfies E_{0,i}[e^{z xi(t)}; J(t)=j] = (e^{F(z) t})_{ij}.  This module
evaluates F, its Perron eigenpair (kappa(z), v(z)) with the normalisation
pi·v(z) = 1, the dual and Esscher-tilted specs, and the Cramér number (the
root of kappa on (0, alpha)).

Matrix convention: row/column 0 is phase +1, row/column 1 is phase -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .distributions import DeterministicJump
from .errors import (
    ComplexSpectrum,
    DomainViolation,
    NoCramerNumber,
    NoPerronVector,
    ReducibleChain,
)

PHASES = (1, -1)


def phase_index(i: int) -> int:
    """Matrix index of a phase: +1 -> 0, -1 -> 1."""
    if i == 1:
        return 0
    if i == -1:
        return 1
    raise ValueError(f"phase must be +1 or -1, got {i!r}")


def phase_of(x: float) -> int:
    """[x] = sign(x), defined for nonzero reals."""
    if x > 0:
        return 1
    if x < 0:
        return -1
    raise ValueError("phase of 0 is undefined")


@dataclass(frozen=True)
class TransitionRateMatrix:
    """Rate matrix of the two-state modulating chain.

    Stored through its off-diagonal entries; diagonals are the negated row
    rates so rows sum to zero.  The chain is reducible when an off-diagonal
    rate vanishes (the spectrally negative family has q_{-1,1} = 0).
    """

    q_plus_minus: float
    q_minus_plus: float

    def __post_init__(self):
        if self.q_plus_minus < 0 or self.q_minus_plus < 0:
            raise ValueError("switch rates must be nonnegative")

    @classmethod
    def from_matrix(cls, q) -> "TransitionRateMatrix":
        q = np.asarray(q, dtype=float)
        if q.shape != (2, 2):
            raise ValueError("rate matrix must be 2x2")
        if not (np.allclose(q.sum(axis=1), 0.0, atol=1e-12)):
            raise ValueError("rows of a rate matrix must sum to zero")
        return cls(float(q[0, 1]), float(q[1, 0]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [-self.q_plus_minus, self.q_plus_minus],
                [self.q_minus_plus, -self.q_minus_plus],
            ]
        )

    @property
    def reducible(self) -> bool:
        return self.q_plus_minus == 0.0 or self.q_minus_plus == 0.0

    def rate_from(self, i: int) -> float:
        return self.q_plus_minus if i == 1 else self.q_minus_plus


@dataclass(frozen=True)
class LevyComponentSpec:
    """One phase's Lévy component.

    The composite Laplace exponent is

        psi(z) = drift*z + gaussian_variance*z^2/2
                 + jump_rate*(E[e^{zU}] - 1) - killing_rate,

    so psi(0) = -killing_rate <= 0.  If ``analytic_laplace_exponent`` is
    given it overrides the composite form entirely; such components support
    every analytic operation but refuse path simulation.
    """

    drift: float = 0.0
    gaussian_variance: float = 0.0
    jump_rate: float = 0.0
    jump_law: object = None
    killing_rate: float = 0.0
    analytic_laplace_exponent: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.gaussian_variance < 0:
            raise ValueError("gaussian_variance must be >= 0")
        if self.jump_rate < 0:
            raise ValueError("jump_rate must be >= 0")
        if self.killing_rate < 0:
            raise ValueError("killing_rate must be >= 0")
        if self.jump_rate > 0 and self.jump_law is None:
            raise ValueError("jump_rate > 0 requires a jump_law")

    @property
    def analytic_only(self) -> bool:
        return self.analytic_laplace_exponent is not None

    def laplace_exponent(self, z: float) -> float:
        if self.analytic_only:
            return float(self.analytic_laplace_exponent(z))
        out = self.drift * z + 0.5 * self.gaussian_variance * z * z - self.killing_rate
        if self.jump_rate > 0:
            out += self.jump_rate * (self.jump_law.mgf(z) - 1.0)
        return out

    def reflected(self) -> "LevyComponentSpec":
        """Component of the dual: psi_hat(z) = psi(-z)."""
        if self.analytic_only:
            psi = self.analytic_laplace_exponent
            return LevyComponentSpec(analytic_laplace_exponent=lambda z: psi(-z))
        return replace(
            self,
            drift=-self.drift,
            jump_law=None if self.jump_law is None else self.jump_law.negated(),
        )

    def tilted(self, gamma: float) -> "LevyComponentSpec":
        """Esscher-tilted component: exponent psi(z + gamma) - psi(gamma).

        The tilted MAP is conservative, so no killing remains; the killing
        constant of the original cancels in the difference.
        """
        if self.analytic_only:
            psi = self.analytic_laplace_exponent
            p0 = float(psi(gamma))
            return LevyComponentSpec(
                analytic_laplace_exponent=lambda z: psi(z + gamma) - p0
            )
        law = self.jump_law
        return LevyComponentSpec(
            drift=self.drift + self.gaussian_variance * gamma,
            gaussian_variance=self.gaussian_variance,
            jump_rate=self.jump_rate * law.mgf(gamma) if self.jump_rate > 0 else 0.0,
            jump_law=law.tilted(gamma) if self.jump_rate > 0 else None,
            killing_rate=0.0,
        )


_ZERO_JUMP = DeterministicJump(0.0)


@dataclass(frozen=True)
class MapSpec:
    """Full five-characteristic description of a two-phase MAP.

    ``f_domain`` is the user-declared open interval on which every component
    exponent and transitional MGF is finite; evaluations outside it fail
    hard (MGF domains are not computable from sampleable laws).  z = 0 is
    always admitted since psi(0) and G(0) exist for every spec.
    """

    xi_plus: LevyComponentSpec
    xi_minus: LevyComponentSpec
    u_plus_minus: object = _ZERO_JUMP
    u_minus_plus: object = _ZERO_JUMP
    rates: TransitionRateMatrix = TransitionRateMatrix(1.0, 1.0)
    f_domain: tuple = (-math.inf, math.inf)
    #: Optional closed-form z -> 2x2 matrix used verbatim by evaluate_F.
    #: Carried by the example families, whose exponents extend to formal
    #: parameter ranges the five-characteristic decomposition cannot reach.
    exponent_override: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        lo, hi = self.f_domain
        if not (lo < hi):
            raise ValueError("f_domain must be a nonempty open interval")
        if not (lo <= 0.0 <= hi):
            raise ValueError("0 must lie in the closure of f_domain")

    def component(self, i: int) -> LevyComponentSpec:
        return self.xi_plus if i == 1 else self.xi_minus

    def transitional(self, i: int):
        """Jump law applied when the chain switches out of phase i."""
        return self.u_plus_minus if i == 1 else self.u_minus_plus

    @property
    def simulatable(self) -> bool:
        return not (self.xi_plus.analytic_only or self.xi_minus.analytic_only)

    @property
    def unkilled(self) -> bool:
        if self.xi_plus.analytic_only or self.xi_minus.analytic_only:
            return abs(self.xi_plus.laplace_exponent(0.0)) < 1e-12 and abs(
                self.xi_minus.laplace_exponent(0.0)
            ) < 1e-12
        return self.xi_plus.killing_rate == 0.0 and self.xi_minus.killing_rate == 0.0

    def check_domain(self, z: float):
        lo, hi = self.f_domain
        if z == 0.0:
            return
        if not (lo < z < hi):
            raise DomainViolation(z, self.f_domain)


@dataclass(frozen=True)
class MatrixExponentValue:
    """F(z) as a 2x2 real matrix together with its argument."""

    m: np.ndarray
    arg: float


@dataclass(frozen=True)
class PerronPair:
    """Leading eigenvalue kappa and right eigenvector v with pi·v = 1."""

    kappa: float
    v: np.ndarray
    arg: float


@dataclass(frozen=True)
class CramerResult:
    """Outcome of the Cramér-number search on (0, min(alpha, z_hi)).

    ``theta`` is None when kappa has no root there; ``sign_profile`` then
    records what the scan saw ("negative" for kappa < 0 throughout, which is
    the jump-extension-only regime, or "positive_near_zero").
    """

    theta: Optional[float]
    v_theta: Optional[np.ndarray]
    kappa_at_theta: Optional[float] = None
    sign_profile: str = "root"
    eigenvector_signed: bool = False

    @property
    def found(self) -> bool:
        return self.theta is not None


@dataclass(frozen=True)
class EigenBoundCertificate:
    """Result of the 2x2 leading-eigenvalue bound check.

    ``certified`` means tr(A) <= 2 and det(I - A) >= 0 both hold, which
    forces lambda_2 <= 1; ``strict`` upgrades the conclusion to lambda_2 < 1
    when det(I - A) > 0.
    """

    lambda2: float
    trace_ok: bool
    det_ok: bool
    certified: bool
    strict: bool


# ----------------------------------------------------------------------
# Spectral operations
# ----------------------------------------------------------------------

def stationary_distribution(rates: TransitionRateMatrix) -> np.ndarray:
    """Invariant distribution pi of the two-state chain: pi Q = 0, sum 1."""
    if rates.reducible:
        absorbing = 1 if rates.q_plus_minus == 0.0 else -1
        raise ReducibleChain(absorbing)
    p, q = rates.q_minus_plus, rates.q_plus_minus
    return np.array([p / (p + q), q / (p + q)])


def evaluate_F(spec: MapSpec, z: float) -> MatrixExponentValue:
    """Matrix exponent F(z) = diag(psi_1, psi_-1) + Q ∘ G(z)."""
    spec.check_domain(z)
    if spec.exponent_override is not None:
        return MatrixExponentValue(np.asarray(spec.exponent_override(z), dtype=float), z)
    q = spec.rates
    g_pm = spec.u_plus_minus.mgf(z) if q.q_plus_minus > 0 else 1.0
    g_mp = spec.u_minus_plus.mgf(z) if q.q_minus_plus > 0 else 1.0
    m = np.array(
        [
            [
                spec.xi_plus.laplace_exponent(z) - q.q_plus_minus,
                q.q_plus_minus * g_pm,
            ],
            [
                q.q_minus_plus * g_mp,
                spec.xi_minus.laplace_exponent(z) - q.q_minus_plus,
            ],
        ]
    )
    return MatrixExponentValue(m, z)


def _leading_eigenvalue(m: np.ndarray) -> float:
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        raise ComplexSpectrum(f"discriminant {disc:g} < 0")
    return 0.5 * (tr + math.sqrt(disc))


def _leading_real_part(m: np.ndarray) -> float:
    # max Re(lambda); equals kappa when the spectrum is real, tr/2 otherwise.
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        return 0.5 * tr
    return 0.5 * (tr + math.sqrt(disc))


def kappa(spec: MapSpec, z: float) -> float:
    """Perron-Frobenius eigenvalue kappa(z) of F(z), via the explicit
    2x2 quadratic formula (never an iterative eigensolver)."""
    return _leading_eigenvalue(evaluate_F(spec, z).m)


def perron_pair(spec: MapSpec, z: float) -> PerronPair:
    """(kappa(z), v(z)) with v > 0 entrywise and pi·v(z) = 1."""
    m = evaluate_F(spec, z).m
    k = _leading_eigenvalue(m)
    v = _perron_vector(m, k)
    pi = stationary_distribution(spec.rates)
    scale = float(pi @ v)
    if scale <= 0:
        raise NoPerronVector("pi·v <= 0")
    return PerronPair(k, v / scale, z)


def _perron_vector(m: np.ndarray, k: float) -> np.ndarray:
    # Nullspace of (m - k I): candidate rows give v ∝ (m01, k - m00) or
    # (k - m11, m10); pick the better-conditioned one.
    c1 = np.array([m[0, 1], k - m[0, 0]])
    c2 = np.array([k - m[1, 1], m[1, 0]])
    cand = c1 if np.abs(c1).min() >= np.abs(c2).min() else c2
    if np.abs(cand).max() == 0.0:
        raise NoPerronVector("defective leading eigenvalue")
    if cand.max() <= 0:
        cand = -cand
    if cand.min() <= 0:
        raise NoPerronVector(f"eigenvector has a non-positive entry: {cand}")
    return cand


def dual_spec(spec: MapSpec) -> MapSpec:
    """The dual MAP, with matrix exponent F_hat(z) = Dpi^{-1} F(-z)^T Dpi.

    Components are reflected, rates become q_hat_{ij} = (pi_j/pi_i) q_{ji}
    (which for a two-state irreducible chain reproduces q_{ij}), and the
    transitional jump for i -> j is the negated law of U_{ji}.
    """
    pi = stationary_distribution(spec.rates)  # raises ReducibleChain
    q_hat_pm = pi[1] / pi[0] * spec.rates.q_minus_plus
    q_hat_mp = pi[0] / pi[1] * spec.rates.q_plus_minus
    lo, hi = spec.f_domain
    override = None
    if spec.exponent_override is not None:
        F = spec.exponent_override
        d = pi.copy()

        def override(z, _F=F, _d=d):
            m = np.asarray(_F(-z), dtype=float)
            return (m.T * _d[None, :]) / _d[:, None]

    return MapSpec(
        xi_plus=spec.xi_plus.reflected(),
        xi_minus=spec.xi_minus.reflected(),
        u_plus_minus=spec.u_minus_plus.negated(),
        u_minus_plus=spec.u_plus_minus.negated(),
        rates=TransitionRateMatrix(q_hat_pm, q_hat_mp),
        f_domain=(-hi, -lo),
        exponent_override=override,
    )


def esscher_tilt(spec: MapSpec, gamma: float) -> MapSpec:
    """The MAP under the Wald-martingale change of measure at gamma.

    The tilted spec has switch rates q~_{ij} = q_{ij} G_{ij}(gamma)
    v_j(gamma)/v_i(gamma), exponentially reweighted transitional laws, and
    Esscher-tilted Lévy components; its leading eigenvalue satisfies
    kappa~(z) = kappa(z + gamma) - kappa(gamma).
    """
    if gamma == 0.0:
        return spec
    spec.check_domain(gamma)
    pp = perron_pair(spec, gamma)
    v = pp.v
    q = spec.rates
    g_pm = spec.u_plus_minus.mgf(gamma) if q.q_plus_minus > 0 else 1.0
    g_mp = spec.u_minus_plus.mgf(gamma) if q.q_minus_plus > 0 else 1.0
    lo, hi = spec.f_domain
    new_lo, new_hi = lo - gamma, hi - gamma
    if not (new_lo < 0.0 < new_hi or new_lo <= 0.0 <= new_hi):
        raise DomainViolation(gamma, spec.f_domain, what="tilt parameter")
    override = None
    if spec.exponent_override is not None:
        F = spec.exponent_override
        k_g = pp.kappa
        w = v.copy()

        def override(z, _F=F, _w=w, _k=k_g, _g=gamma):
            m = np.asarray(_F(z + _g), dtype=float)
            return (m * _w[None, :]) / _w[:, None] - _k * np.eye(2)

    return MapSpec(
        xi_plus=spec.xi_plus.tilted(gamma),
        xi_minus=spec.xi_minus.tilted(gamma),
        u_plus_minus=spec.u_plus_minus.tilted(gamma) if q.q_plus_minus > 0 else spec.u_plus_minus,
        u_minus_plus=spec.u_minus_plus.tilted(gamma) if q.q_minus_plus > 0 else spec.u_minus_plus,
        rates=TransitionRateMatrix(
            q.q_plus_minus * g_pm * v[1] / v[0],
            q.q_minus_plus * g_mp * v[0] / v[1],
        ),
        f_domain=(new_lo, new_hi),
        exponent_override=override,
    )


def kappa_prime_at_zero(spec: MapSpec, h: float = 1e-6) -> float:
    """Numerical kappa'(0): the asymptotic drift rate of xi.

    Uses a central difference when both sides of 0 lie in f_domain, else a
    second-order one-sided difference.
    """
    lo, hi = spec.f_domain
    step = min(h, 0.25 * (hi - lo) if math.isfinite(hi - lo) else h)
    if lo < -step and hi > step:
        return (kappa(spec, step) - kappa(spec, -step)) / (2.0 * step)
    if hi > 2 * step:
        k0 = kappa(spec, 0.0)
        return (-3.0 * k0 + 4.0 * kappa(spec, step) - kappa(spec, 2 * step)) / (2.0 * step)
    raise DomainViolation(step, spec.f_domain, what="derivative step")


def cramer_number(
    spec: MapSpec,
    alpha: float,
    *,
    grid_points: int = 161,
    tol: float = 1e-12,
) -> CramerResult:
    """Search (0, min(alpha, z_hi)) for the Cramér number theta.

    kappa is convex with kappa(0) <= 0, so a sign change from <= 0 to > 0
    brackets the unique root; bracketing plus Brent refinement pins it to
    |kappa(theta)| < 1e-12 and bracket width < 1e-12.  Where the spectrum of
    F is complex (possible only for formal specs outside the admissible MAP
    range), the scan follows max Re(lambda), which agrees with kappa near
    any root.
    """
    from scipy.optimize import brentq

    if alpha <= 0:
        raise ValueError("alpha must be positive")
    hi = min(alpha, spec.f_domain[1])
    if hi <= 0:
        raise DomainViolation(alpha, spec.f_domain, what="search interval")
    edge = 1e-9 * hi
    zs = np.linspace(edge, hi - edge, grid_points)

    def g(z):
        return _leading_real_part(evaluate_F(spec, z).m)

    vals = np.array([g(z) for z in zs])
    sign_change = None
    for a, b, fa, fb in zip(zs[:-1], zs[1:], vals[:-1], vals[1:]):
        if fa <= 0.0 < fb:
            sign_change = (a, b)
            break
    if sign_change is None:
        if vals[0] > 0.0:
            profile = "positive_near_zero"
        elif np.all(vals < 0.0):
            profile = "negative"
        else:
            profile = "mixed"
        # A convex kappa can touch 0 without crossing; refine the grid
        # minimum of |g| and accept an honest zero.
        j = int(np.argmin(np.abs(vals)))
        if abs(vals[j]) < 1e-9:
            theta = _refine_touch(g, zs, j, tol)
            if theta is not None:
                return _finish_root(spec, theta, g(theta))
        return CramerResult(None, None, sign_profile=profile)

    theta = brentq(g, *sign_change, xtol=tol, rtol=4 * np.finfo(float).eps)
    return _finish_root(spec, float(theta), g(float(theta)))


def _refine_touch(g, zs, j, tol):
    a = zs[max(j - 1, 0)]
    b = zs[min(j + 1, len(zs) - 1)]
    for _ in range(200):
        if b - a < tol:
            break
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if g(m1) < g(m2):
            b = m2
        else:
            a = m1
    z = 0.5 * (a + b)
    return z if abs(g(z)) < 1e-10 else None


def _finish_root(spec, theta, k_at):
    m = evaluate_F(spec, theta).m
    signed = False
    v = None
    try:
        v = perron_pair(spec, theta).v
    except (NoPerronVector, ReducibleChain):
        try:
            v = _perron_vector(m, _leading_eigenvalue(m))
        except NoPerronVector:
            v = None
        signed = True
    except ComplexSpectrum:
        v = None
        signed = True
    if v is not None and np.any(v <= 0):
        signed = True
    return CramerResult(theta, v, kappa_at_theta=k_at, eigenvector_signed=signed)


def leading_eigen_bound(a) -> EigenBoundCertificate:
    """Certify lambda_2 <= 1 for a 2x2 matrix with real eigenvalues.

    Hypotheses: tr(A) <= 2 and det(I - A) >= 0; the strict determinant
    inequality upgrades the bound to lambda_2 < 1.
    """
    a = np.asarray(a, dtype=float)
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        raise ComplexSpectrum(f"discriminant {disc:g} < 0")
    lam2 = 0.5 * (tr + math.sqrt(disc))
    det_i_minus_a = (1 - a[0, 0]) * (1 - a[1, 1]) - a[0, 1] * a[1, 0]
    trace_ok = tr <= 2.0
    det_ok = det_i_minus_a >= 0.0
    return EigenBoundCertificate(
        lambda2=lam2,
        trace_ok=trace_ok,
        det_ok=det_ok,
        certified=trace_ok and det_ok,
        strict=trace_ok and det_i_minus_a > 0.0,
    )


def matrix_exp(a, t: float = 1.0) -> np.ndarray:
    """e^{At} for a 2x2 real matrix via the closed-form spectral formula.

    Near eigenvalue coalescence (gap < 1e-6 * ||A||) the spectral formula
    loses precision, so a 20-term scaled-and-squared Taylor series takes
    over; a complex conjugate pair uses the rotation form.
    """
    a = np.asarray(a, dtype=float)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return np.eye(2)
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = tr * tr - 4.0 * det
    norm = np.abs(a).sum(axis=1).max()
    if disc >= 0.0:
        gap = math.sqrt(disc)
        if gap < 1e-6 * max(norm, 1e-300):
            return _taylor_exp(a, t)
        l1 = 0.5 * (tr + gap)
        l2 = 0.5 * (tr - gap)
        eye = np.eye(2)
        return (math.exp(l1 * t) * (a - l2 * eye) - math.exp(l2 * t) * (a - l1 * eye)) / gap
    # Complex pair mu +/- i*omega.
    mu = 0.5 * tr
    omega = 0.5 * math.sqrt(-disc)
    eye = np.eye(2)
    return math.exp(mu * t) * (
        math.cos(omega * t) * eye + math.sin(omega * t) / omega * (a - mu * eye)
    )


def _taylor_exp(a, t):
    b = a * t
    norm = np.abs(b).sum(axis=1).max()
    s = max(0, int(math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0)
    b = b / (2.0**s)
    out = np.eye(2)
    term = np.eye(2)
    for k in range(1, 21):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def require_cramer(spec: MapSpec, alpha: float, theta: float) -> None:
    """Validate that theta is a Cramér number in (0, alpha) for spec."""
    if not (0.0 < theta < alpha):
        raise NoCramerNumber(f"theta={theta!r} not in (0, {alpha})")
    k = kappa(spec, theta)
    if abs(k) > 1e-6:
        raise NoCramerNumber(f"kappa(theta)={k:g} is not 0")
