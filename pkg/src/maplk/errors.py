"""Exception types shared across the package."""


class MaplkError(Exception):
    """Base class for all package errors."""


class ReducibleChain(MaplkError):
    """The modulating chain has an absorbing phase, so no two-sided
    stationary distribution exists.

    Attributes
    ----------
    absorbing_phase : int
        The phase (+1 or -1) with no outgoing rate.
    """

    def __init__(self, absorbing_phase):
        self.absorbing_phase = absorbing_phase
        super().__init__(f"chain is reducible; phase {absorbing_phase:+d} is absorbing")


class DomainViolation(MaplkError):
    """An argument lies outside the declared finite domain of an exponent or MGF."""

    def __init__(self, z, domain, what="argument"):
        self.z = z
        self.domain = tuple(domain)
        super().__init__(f"{what} z={z!r} outside domain ({domain[0]!r}, {domain[1]!r})")


class NoPerronVector(MaplkError):
    """No strictly positive Perron eigenvector exists (defective or reducible case)."""


class ComplexSpectrum(MaplkError):
    """The 2x2 matrix has a complex conjugate eigenvalue pair."""


class PoleHit(MaplkError):
    """A closed-form family was evaluated at (or too close to) a Gamma pole."""


class AnalyticOnlyComponent(MaplkError):
    """A component defined only through an analytic exponent cannot be path-simulated."""


class HorizonExhausted(MaplkError):
    """A path/clock budget ran out before the requested time or tolerance was reached."""


class NotFinite(MaplkError):
    """The exponential functional is almost surely infinite for this spec."""


class NotAbsorbed(MaplkError):
    """The driving MAP neither drifts to -infinity nor is killed, so T0 = infinity."""


class NoCramerNumber(MaplkError):
    """The requested operation needs a Cramér number in (0, alpha), and none exists."""


class PilotPoolTooSmall(MaplkError):
    """Effective sample size of the importance-resampling pool fell below the floor."""

    def __init__(self, ess, pool, floor):
        self.ess = ess
        self.pool = pool
        super().__init__(
            f"effective sample size {ess:.1f} of pilot pool {pool} below floor {floor:.0%}"
        )


class KappaNonNegative(MaplkError):
    """kappa(beta) >= 0: the jump-type extension with this beta does not exist."""


class SpecSchemaError(MaplkError):
    """A spec document failed schema validation."""
