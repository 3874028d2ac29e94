"""Exception hierarchy. Every error carries a stable ``code`` used by the CLI."""


class SGWaveError(Exception):
    code = "error"
    exit_code = 2


class DomainError(SGWaveError, ValueError):
    code = "domain_error"


class GammaOutOfRange(DomainError):
    code = "gamma_out_of_range"


class NoSingularPoints(DomainError):
    code = "no_singular_points"


class NegativeInitialEnergy(DomainError):
    code = "negative_initial_energy"


class SingularLaunchAtNonSaddle(DomainError):
    code = "singular_launch_at_non_saddle"


class ZeroEnergyInInterior(DomainError):
    code = "zero_energy_in_interior"


class DomainTooShort(DomainError):
    code = "domain_too_short"


class IntegrationFailure(SGWaveError, RuntimeError):
    code = "integration_failure"


class DegenerateIterate(DomainError):
    code = "degenerate_iterate"


class GridMismatch(DomainError):
    code = "grid_mismatch"


class NotContractive(SGWaveError):
    code = "not_contractive"
    exit_code = 3


class MaxIterExceeded(SGWaveError, RuntimeError):
    code = "max_iter_exceeded"


class BracketFailure(SGWaveError, RuntimeError):
    code = "bracket_failure"


class ZMNonPositive(DomainError):
    code = "zm_non_positive"


class MuNotBelowHatMu(DomainError):
    code = "mu_not_below_hat_mu"


class SpanTooShort(DomainError):
    code = "span_too_short"


class GammaNotAboveOne(DomainError):
    code = "gamma_not_above_one"


class ParamOutOfRange(DomainError):
    code = "param_out_of_range"


class MuInfinityRequiresGammaAboveOne(DomainError):
    code = "mu_infinity_requires_gamma_above_one"
    exit_code = 2


class AlphaZeroInverse(DomainError):
    code = "alpha_zero_inverse"


class OutOfProfileRange(DomainError):
    code = "out_of_profile_range"


class NotAnArray(DomainError):
    code = "not_an_array"


class GridOutOfRange(DomainError):
    code = "grid_out_of_range"


class CFLViolation(DomainError):
    code = "cfl_violation"
