"""Exception types raised across the package.

Analysis routines raise these instead of returning sentinel values; the CLI
maps any of them to exit code 2 with the message on stderr.
"""


class CertificationError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CertificationError):
    """Malformed or inconsistent configuration input."""


class PoleOnEvaluationContour(CertificationError):
    """Frequency response requested at (or too near) a pole."""


class RootFindingFailure(CertificationError):
    """A root/threshold search did not converge or had no bracket."""


class ImproperTransferFunction(CertificationError):
    """Numerator degree exceeds denominator degree where properness is required."""


class UnstablePlant(CertificationError):
    """Operation requires a stable plant."""


class NotSuitable(CertificationError):
    """Gain bound requested for a multiplier that is not suitable."""


class NegativeDiscriminant(CertificationError):
    """Quadratic gain-bound equation has no real root at some frequency."""


class NonmonotoneNonlinearity(CertificationError):
    """Nonlinearity fails the monotone / slope-restricted requirement."""


class NoFeasibleMultiplier(CertificationError):
    """Multiplier search found no suitable candidate in the search box."""


class DegenerateIndexSet(CertificationError):
    """Phase-limitation LP index set violates its admissibility conditions."""


class NonfiniteState(CertificationError):
    """Simulation state diverged past the guard threshold or became non-finite."""


class WindowTooShort(CertificationError):
    """Trace window too short for the requested detection/decomposition."""


class LengthNotPowerOfTwo(CertificationError):
    """Spectrum input length must be a power of two."""


class NotSettled(CertificationError):
    """Trace tail has not settled enough for the requested estimator."""


class DegenerateSeparation(CertificationError):
    """Two-trajectory separation collapsed to zero; exponent undefined."""


class NotACounterexampleCandidate(CertificationError):
    """Counterexample construction requires an off-lattice nonnegative tap."""


class UnknownExperiment(CertificationError):
    """Requested experiment name is not in the registry."""


class EmptyRange(CertificationError):
    """Sweep range contains no points."""
