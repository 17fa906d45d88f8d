"""Closed-form matrix exponents: stable, MAP-dual stable, conditioned stable,
and spectrally negative stable families.

All entries are products of Gamma factors; they are evaluated here in
reflection-rewritten form,

    Gamma(a) Gamma(1 - a) = pi / sin(pi a),

which turns every in-domain Gamma ratio into a sine factor and leaves poles
only at the domain endpoints.  For the stable process killed at its first
hitting time of 0 the matrix exponent is

    F(z) = (Gamma(alpha - z) Gamma(1 + z) / pi) *
           [[-sin(pi(alpha*rho_hat - z)),  sin(pi alpha rho_hat)],
            [ sin(pi alpha rho),          -sin(pi(alpha*rho - z))]]

for z in (-1, alpha), with rho the positivity parameter and rho_hat = 1-rho.
Its determinant is Gamma(alpha-z)Gamma(1+z) / (Gamma(-z)Gamma(1-alpha+z)),
vanishing at z = alpha - 1: the Cramér number of the stable MAP.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .core import LevyComponentSpec, MapSpec, TransitionRateMatrix
from .distributions import AnalyticMgf, DeterministicJump
from .errors import PoleHit

_POLE_TOL = 1e-12


@dataclass(frozen=True)
class StableParams:
    """Scaling index and positivity parameter of a stable process.

    rho_hat = 1 - rho.  The admissible stable range requires
    alpha*rho <= 1 and alpha*rho_hat <= 1; formula evaluation does not
    enforce it (the Gamma expressions extend beyond), so admissibility is
    exposed as a property instead.
    """

    alpha: float
    rho: float = 0.5
    rho_hat: float = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise ValueError("alpha must lie in (0, 2)")
        if not (0.0 < self.rho < 1.0):
            raise ValueError("rho must lie in (0, 1)")
        object.__setattr__(self, "rho_hat", 1.0 - self.rho)

    @property
    def is_admissible(self) -> bool:
        return self.alpha * self.rho <= 1.0 and self.alpha * self.rho_hat <= 1.0


def _gg(alpha: float, z: float) -> float:
    # Gamma(alpha - z) * Gamma(1 + z); poles at z = alpha and z = -1.
    return float(gamma_fn(alpha - z) * gamma_fn(1.0 + z))


def _check_open(z: float, lo: float, hi: float):
    if not (lo + _POLE_TOL < z < hi - _POLE_TOL):
        raise PoleHit(f"z={z!r} at or beyond a Gamma pole of the domain ({lo}, {hi})")


def stable_F(p: StableParams, z: float) -> np.ndarray:
    """Matrix exponent of the MAP of a stable process killed at 0."""
    _check_open(z, -1.0, p.alpha)
    pref = _gg(p.alpha, z) / math.pi
    arh = p.alpha * p.rho_hat
    ar = p.alpha * p.rho
    return pref * np.array(
        [
            [-math.sin(math.pi * (arh - z)), math.sin(math.pi * arh)],
            [math.sin(math.pi * ar), -math.sin(math.pi * (ar - z))],
        ]
    )


def stable_det(p: StableParams, z: float) -> float:
    """det F(z) = Gamma(alpha-z)Gamma(1+z) / (Gamma(-z)Gamma(1-alpha+z)).

    Evaluated as -(Gamma(alpha-z)Gamma(1+z)/pi)^2 sin(pi(alpha-z)) sin(pi z),
    the reflection form; zeros at z = alpha - 1 and at the integers.
    """
    _check_open(z, -1.0, p.alpha)
    if abs(z - round(z)) < _POLE_TOL:
        raise PoleHit(f"z={z!r} is an integer (Gamma pole of the closed form)")
    pref = _gg(p.alpha, z) / math.pi
    return -pref * pref * math.sin(math.pi * (p.alpha - z)) * math.sin(math.pi * z)


def dual_stable_pi(p: StableParams) -> np.ndarray:
    """Stationary distribution of the dual-stable modulating chain.

    pi_1 = k(alpha) Gamma(alpha rho_hat) Gamma(1 - alpha rho_hat) and
    pi_-1 likewise with rho; by reflection this is
    pi_1 = sin(pi alpha rho) / (sin(pi alpha rho) + sin(pi alpha rho_hat)).
    """
    if not (0.0 < p.alpha < 1.0):
        raise PoleHit("dual-stable family requires alpha in (0, 1)")
    s_r = math.sin(math.pi * p.alpha * p.rho)
    s_rh = math.sin(math.pi * p.alpha * p.rho_hat)
    return np.array([s_r, s_rh]) / (s_r + s_rh)


def dual_stable_F(p: StableParams, z: float) -> np.ndarray:
    """Matrix exponent of the MAP-dual stable process, alpha in (0, 1).

    Satisfies F_hat(z) = Dpi^{-1} F(-z)^T Dpi on z in (-alpha, 1), with
    det F_hat(z) = det F(-z) and Cramér number 1 - alpha.
    """
    if not (0.0 < p.alpha < 1.0):
        raise PoleHit("dual-stable family requires alpha in (0, 1)")
    _check_open(z, -p.alpha, 1.0)
    pref = _gg_dual(p.alpha, z) / math.pi
    arh = p.alpha * p.rho_hat
    ar = p.alpha * p.rho
    return pref * np.array(
        [
            [-math.sin(math.pi * (arh + z)), math.sin(math.pi * arh)],
            [math.sin(math.pi * ar), -math.sin(math.pi * (ar + z))],
        ]
    )


def _gg_dual(alpha: float, z: float) -> float:
    # Gamma(alpha + z) * Gamma(1 - z); poles at z = -alpha and z = 1.
    return float(gamma_fn(alpha + z) * gamma_fn(1.0 - z))


def conditioned_stable_F(p: StableParams, z: float) -> np.ndarray:
    """Matrix exponent of the stable process conditioned to be continuously
    absorbed at the origin: the dual-stable form with rho and rho_hat
    interchanged.  det F0(z) = det F_hat(z), so the Cramér number is again
    1 - alpha."""
    swapped = StableParams(p.alpha, p.rho_hat)
    return dual_stable_F(swapped, z)


def spectrally_negative_exponents(alpha: float, z: float) -> tuple:
    """(psi_1_dagger(z), psi_-1(z)) for the spectrally negative stable rssMp.

    psi_1_dagger(z) = (1/pi) Gamma(alpha-z) Gamma(1+z) sin(pi(z - alpha + 1))
    psi_-1(z)       = (1/pi) Gamma(alpha-z) Gamma(1+z) sin(pi(z - alpha))

    Both vanish at z = alpha - 1.
    """
    if not (1.0 < alpha < 2.0):
        raise PoleHit("spectrally negative family requires alpha in (1, 2)")
    if not (0.0 <= z < alpha - _POLE_TOL):
        raise PoleHit(f"z={z!r} outside [0, alpha)")
    pref = _gg(alpha, z) / math.pi
    psi_dag = pref * math.sin(math.pi * (z - alpha + 1.0))
    psi_minus = pref * math.sin(math.pi * (z - alpha))
    return psi_dag, psi_minus


# ----------------------------------------------------------------------
# MapSpec factories (analytic exponents only; simulation refuses them)
# ----------------------------------------------------------------------

def _spec_from_matrix_function(F, domain, *, snap=1e-11) -> MapSpec:
    """Wrap z -> F(z) as a MapSpec carrying the matrix as its exponent
    override, with a best-effort five-characteristic decomposition.

    Rates are read off F(0) (off-diagonals of an unkilled exponent equal the
    switch rates), component exponents are psi_i(z) = F_ii(z) + q_i, and
    transitional MGFs are F_ij(z)/q_ij.  Off-diagonal rates below ``snap``
    (in relative terms) are snapped to zero, flagging the chain reducible;
    a negative off-diagonal (possible only outside the admissible parameter
    range, where F is a formal object) is clamped the same way, so only the
    override is then faithful.
    """
    f0 = F(0.0)
    scale = np.abs(f0).max()
    q_pm = float(f0[0, 1])
    q_mp = float(f0[1, 0])
    if abs(q_pm) <= snap * scale or q_pm < 0:
        q_pm = 0.0
    if abs(q_mp) <= snap * scale or q_mp < 0:
        q_mp = 0.0

    def psi_plus(z, _F=F, _q=q_pm):
        return _F(z)[0, 0] + _q

    def psi_minus(z, _F=F, _q=q_mp):
        return _F(z)[1, 1] + _q

    u_pm = (
        AnalyticMgf(lambda z, _F=F, _q=q_pm: _F(z)[0, 1] / _q, domain, "U(+1,-1)")
        if q_pm > 0
        else DeterministicJump(0.0)
    )
    u_mp = (
        AnalyticMgf(lambda z, _F=F, _q=q_mp: _F(z)[1, 0] / _q, domain, "U(-1,+1)")
        if q_mp > 0
        else DeterministicJump(0.0)
    )
    return MapSpec(
        xi_plus=LevyComponentSpec(analytic_laplace_exponent=psi_plus),
        xi_minus=LevyComponentSpec(analytic_laplace_exponent=psi_minus),
        u_plus_minus=u_pm,
        u_minus_plus=u_mp,
        rates=TransitionRateMatrix(q_pm, q_mp),
        f_domain=domain,
        exponent_override=lambda z: np.asarray(F(z), dtype=float),
    )


def stable_spec(alpha: float, rho: float = 0.5) -> MapSpec:
    """MapSpec of the stable MAP (analytic only), f_domain (-1, alpha)."""
    p = StableParams(alpha, rho)
    return _spec_from_matrix_function(lambda z: stable_F(p, z), (-1.0, alpha))


def dual_stable_spec(alpha: float, rho: float = 0.5) -> MapSpec:
    """MapSpec of the MAP-dual stable process, f_domain (-alpha, 1)."""
    p = StableParams(alpha, rho)
    return _spec_from_matrix_function(lambda z: dual_stable_F(p, z), (-alpha, 1.0))


def conditioned_stable_spec(alpha: float, rho: float = 0.5) -> MapSpec:
    """MapSpec of the conditioned stable process (rho and rho_hat swapped)."""
    p = StableParams(alpha, rho)
    return _spec_from_matrix_function(lambda z: conditioned_stable_F(p, z), (-alpha, 1.0))


def spectrally_negative_stable_spec(alpha: float) -> MapSpec:
    """MapSpec of the spectrally negative stable rssMp.

    This is the stable family at rho = 1/alpha, where the lower-left entry
    of F vanishes identically (no switching out of the negative phase); the
    resulting triangular exponent has the genuine Cramér number alpha - 1.
    """
    if not (1.0 < alpha < 2.0):
        raise ValueError("spectrally negative stable requires alpha in (1, 2)")
    return stable_spec(alpha, 1.0 / alpha)


FAMILY_FACTORIES = {
    "stable": stable_spec,
    "dual_stable": dual_stable_spec,
    "conditioned_stable": conditioned_stable_spec,
    "spectrally_negative_stable": spectrally_negative_stable_spec,
}


def family_spec(name: str, alpha: float, rho: float = 0.5) -> MapSpec:
    """Build a named family spec; rho is ignored by the spectrally negative
    family (its positivity parameter is pinned at 1/alpha)."""
    try:
        factory = FAMILY_FACTORIES[name]
    except KeyError:
        raise ValueError(
            f"unknown family {name!r}; choose from {sorted(FAMILY_FACTORIES)}"
        ) from None
    if name == "spectrally_negative_stable":
        return factory(alpha)
    return factory(alpha, rho)
