"""
Exception hierarchy for grouserlab.

Every error carries a stable ``code`` string and the process exit status the
CLI uses when the error escapes a command.
"""

from typing import Optional


class GrouserLabError(Exception):
    """Base class for all grouserlab errors."""

    code = "grouserlab-error"
    exit_code = 1

    def __init__(self, message: str, *, context: Optional[dict] = None):
        super().__init__(message)
        self.context = context or {}


class ConfigurationError(GrouserLabError):
    """A configuration document or argument set is invalid."""

    code = "config-error"
    exit_code = 2


class DomainError(GrouserLabError, ValueError):
    """An argument lies outside the mathematical domain of a formula."""

    code = "domain-error"


class RangeError(GrouserLabError, ValueError):
    """A query falls outside the span a table or profile covers."""

    code = "range-error"


class OffsetRangeError(RangeError):
    """A cam-wheel offset outside the physical slot span."""

    code = "offset-range-error"


class ExtrapolationError(RangeError):
    """A percentile query outside the span of a percent-passing curve."""

    code = "extrapolation-error"


class PhysicalValidityError(GrouserLabError, ValueError):
    """Inputs describe a physically impossible state."""

    code = "physical-validity-error"


class DataError(GrouserLabError, ValueError):
    """Input data are malformed (e.g. non-monotone sieve results)."""

    code = "data-error"


class FitError(GrouserLabError):
    """A regression cannot be carried out on the supplied points."""

    code = "fit-error"


class UndefinedSlipError(GrouserLabError, ZeroDivisionError):
    """Slip requested with a zero theoretical rim velocity."""

    code = "undefined-slip"


class IncompleteTrialError(GrouserLabError):
    """A metric was requested from a trial that did not finish the stroke."""

    code = "incomplete-trial"


class SimulationFault(GrouserLabError):
    """Fault raised while stepping the testbed or its controller."""

    code = "simulation-fault"
    exit_code = 3


class DesyncFault(SimulationFault):
    """Cam and wheel encoders disagree beyond the physical slot span."""

    code = "encoder-desync"


class ControllerFault(SimulationFault):
    """Non-finite input reached the height controller."""

    code = "controller-fault"


class TelemetryError(GrouserLabError):
    """Base class for wire-format and trial-log errors."""

    code = "telemetry-error"


class EncodeError(TelemetryError):
    """A frame field does not fit its wire representation."""

    code = "encode-error"


class CorruptFrameError(TelemetryError):
    """CRC mismatch on a received frame."""

    code = "corrupt-frame"


class FrameVersionError(TelemetryError):
    """Frame carries an unknown protocol version."""

    code = "frame-version"


class FrameRangeError(TelemetryError):
    """A decoded field is outside its valid range."""

    code = "frame-range"


class TrialLogError(TelemetryError):
    """A trial log could not be written or parsed."""

    code = "trial-log"


class ValidationToleranceError(GrouserLabError):
    """A reproduced figure deviates from its reference beyond tolerance."""

    code = "validation-tolerance"
    exit_code = 4
