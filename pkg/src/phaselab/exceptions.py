"""Exception types shared across the package."""


class PhaseLabError(Exception):
    """Base class for all phaselab errors."""


class ConfigError(PhaseLabError, ValueError):
    """Invalid configuration value (e.g. q < 1 or q = inf)."""


class DimensionMismatch(PhaseLabError, ValueError):
    """Operands have incompatible shapes."""


class InvalidDistribution(PhaseLabError, ValueError):
    """Entry distribution violates the ensemble admissibility conditions."""


class InvalidExponent(PhaseLabError, ValueError):
    """Lifting exponent outside [1/2, 1]."""


class NotSymmetric(PhaseLabError, ValueError):
    """Matrix argument is not symmetric (real) or Hermitian (complex)."""


class EigenFailure(PhaseLabError, RuntimeError):
    """Eigendecomposition did not converge."""


class NonFinite(PhaseLabError, RuntimeError):
    """Objective or iterate became NaN or infinite."""


class DegenerateSample(PhaseLabError, RuntimeError):
    """Sampler failed to produce a nonzero element after resampling."""


class DegenerateSet(PhaseLabError, RuntimeError):
    """All sampled pairs were equivalent; the set carries no usable geometry."""


class EquivalentTargets(PhaseLabError, ValueError):
    """The two targets are equal up to a unimodular phase."""


class ZeroPerturbation(PhaseLabError, ValueError):
    """Matrix perturbation has zero magnitude."""
