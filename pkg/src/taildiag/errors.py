"""Shared exception types for the diagnostics toolkit."""


class ToolkitError(ValueError):
    """Base class for all toolkit-raised errors."""


class EmptyTraceError(ToolkitError):
    """A log or trace produced zero usable records."""


class MissingColumnError(ToolkitError):
    """A mapped column is absent from the input header."""


class EmptySequenceError(ToolkitError):
    """A statistic was requested on an empty sequence."""


class LengthMismatchError(ToolkitError):
    """Paired sequences have different lengths."""


class TooFewPointsError(ToolkitError):
    """Not enough points for the requested statistic."""


class RunTooShortError(ToolkitError):
    """Run duration is shorter than one window."""


class SplitOutOfRangeError(ToolkitError):
    """Phase split point falls outside the run."""


class EmptyPhaseError(ToolkitError):
    """A phase has no latency samples."""


class InvalidSpecError(ToolkitError):
    """A scenario, window, policy, or config declaration violates its
    constraints."""
