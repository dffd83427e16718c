"""Exception and warning types shared across the package."""


class PulseforgeError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(PulseforgeError):
    """Invalid user-supplied configuration (bad intervals, malformed JSON, ...)."""


class NumericError(PulseforgeError):
    """A numerical routine failed (singular system, non-convergent fit, ...)."""


class DegenerateProblemError(NumericError):
    """The optimization problem is singular or otherwise ill-posed."""


class CalibrationError(NumericError):
    """A simulated calibration experiment produced no usable signal."""


class FitError(NumericError):
    """A model fit did not converge or the data carry no signal."""


class PaddingWarning(UserWarning):
    """A waveform carries too little trailing zero padding for filter tails."""


class FallbackWarning(UserWarning):
    """A closed-form path was unavailable; a numerical fallback was used."""
