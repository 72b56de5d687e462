"""Exception types raised across the package."""


class HardyFundsolError(Exception):
    """Base class for all package errors."""


# --- closed forms / parameters ---

class MuOutOfRange(HardyFundsolError):
    """Coupling mu outside the admissible interval."""


class NonpositiveRadius(HardyFundsolError):
    """Radius must be strictly positive."""


class RhoBelowOne(HardyFundsolError):
    """The interpolating potential family requires rho >= 1."""


class DegenerateMu(HardyFundsolError):
    """Operation not defined at the critical coupling mu = mu0."""


# --- radial engine ---

class SeriesNotApplicable(HardyFundsolError):
    """Requested series order unavailable for this potential."""


class RminTooLarge(HardyFundsolError):
    """Initialization radius outside the perturbative region."""


class StepFailure(HardyFundsolError):
    """Adaptive step control could not meet the local tolerance."""

    def __init__(self, message, s_last=None):
        super().__init__(message)
        self.s_last = s_last


class IntegrationOverflow(HardyFundsolError):
    """Solution magnitude exceeded the overflow guard."""

    def __init__(self, message, s_last=None):
        super().__init__(message)
        self.s_last = s_last


class RegularBranchVanishes(HardyFundsolError):
    """Shooting denominator degenerate: the regular branch vanishes at the boundary."""


class ScheduleTooShort(HardyFundsolError):
    """Radius schedule exhausted without reaching a verdict."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


# --- green operators ---

class TailDivergence(HardyFundsolError):
    """Far-field tail of the density decays too slowly to integrate."""


class OriginDivergence(HardyFundsolError):
    """Density is not integrable against the Newtonian weight at the origin."""


# --- analysis ---

class NonpositiveValues(HardyFundsolError):
    """Logarithmic fit requires strictly positive samples."""


class WindowTooSmall(HardyFundsolError):
    """Fit window contains too few grid nodes."""


class MuPrimeOutOfRange(HardyFundsolError):
    """Comparison coupling mu' outside (mu, mu0)."""


class NoAdmissibleMuPrime(HardyFundsolError):
    """No admissible mu' in the open interval (alpha*mu, mu0)."""


class CertificateFailed(HardyFundsolError):
    """Certificate residual check failed after the allowed retries."""


class EpsilonOutOfRange(HardyFundsolError):
    """Epsilon outside the open admissible interval (0, (beta-1)/(beta+1))."""


class RadiusOutOfRange(HardyFundsolError):
    """Barrier evaluated outside its admissible radius range."""


class BracketInvalid(HardyFundsolError):
    """Threshold bracket endpoints are degenerate or misclassified."""


# --- verifier ---

class SupportExceedsGrid(HardyFundsolError):
    """Test-function support not contained in the sampling grid."""


class NegativeU(HardyFundsolError):
    """Input function negative on the test-function support."""


# --- cli / io ---

class ConfigInvalid(HardyFundsolError):
    """Configuration failed schema validation."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
