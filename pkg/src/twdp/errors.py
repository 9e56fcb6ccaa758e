"""Exception hierarchy.

Two families matter downstream: user-input problems (bad config values,
impossible requests) map to CLI exit code 1 and HTTP 400, while internal
consistency failures (negative information measures beyond tolerance,
non-PSD covariances) map to exit code 2 and HTTP 500.
"""


class TwdpError(Exception):
    """Base class for all package errors."""


class ValidationError(TwdpError):
    """User-supplied value or config violates a documented invariant."""


class ConfigurationError(ValidationError):
    """API misuse: unknown axis names, overlapping sets, size mismatches."""


class BudgetError(ValidationError):
    """Requested enumeration or simulation exceeds the configured budget."""


class DegenerateChannelError(ValidationError):
    """Channel parameters make the requested quantity undefined (zero denominators)."""


class UnboundedRateError(DegenerateChannelError):
    """Noise power is zero, so the capacity expression diverges."""


class InternalConsistencyError(TwdpError):
    """A computed quantity violates a mathematical invariant beyond tolerance."""


class DegenerateConditioningError(InternalConsistencyError):
    """Conditioning on an event of probability (or variance) zero."""
