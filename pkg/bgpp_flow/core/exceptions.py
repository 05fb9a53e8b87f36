class BGPPError(Exception):
    """Base class for every error raised by bgpp_flow."""


class DomainError(BGPPError):
    """Raised when an input lies outside the coordinate or parameter domain."""


class NegativeParameter(DomainError):
    """Raised when a metric parameter t_i is negative."""


class NonFinite(DomainError):
    """Raised on NaN or infinite inputs."""


class SingularPoint(DomainError):
    """Raised at a coordinate singularity of the Euler angles (sin theta ~ 0)."""


class NotEHLimit(DomainError):
    """Raised when the parameters are not an Eguchi-Hanson (two largest equal) pattern."""


class ModulusOutOfRange(DomainError):
    """Raised when an elliptic parameter k^2 is outside the real branch."""


class CharacteristicPole(DomainError):
    """Raised when 1 - n sin^2 vanishes on the integration path of Pi."""


class UnattainableLevel(DomainError):
    """Raised when n^2 lies outside [t_min m^2, t_max m^2]."""


class ZeroCasimir(DomainError):
    """Raised when the Casimir level m^2 is zero."""


class InconsistentInitialData(DomainError):
    """Raised when initial momenta do not reproduce the requested level set."""


class NotDegenerate(DomainError):
    """Raised when the double-root Eguchi-Hanson formula is used on generic levels."""


class BoundaryBolt(DomainError):
    """Raised when m3 = 0 puts a root of R on the bolt rho = gamma."""


class TurningPointCrossed(DomainError):
    """Raised when a quadrature interval crosses a zero of the radial polynomial."""


class DegenerateRoots(DomainError):
    """Raised when the radial cubic has a repeated root."""


class ComputationError(BGPPError):
    """Raised when a numerical procedure fails to deliver a result."""


class NoConvergence(ComputationError):
    """Raised when adaptive quadrature exhausts its refinement budget."""


class StepFailure(ComputationError):
    """Raised when the integrator step size underflows or max_steps is reached."""

    def __init__(self, message: str, lam: float):
        super().__init__(message)
        self.lam = lam


class DomainExit(ComputationError):
    """Raised when an integrated trajectory leaves the coordinate domain."""

    def __init__(self, message: str, lam: float):
        super().__init__(message)
        self.lam = lam
