"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid inputs: bad configuration, malformed files, out-of-range arguments."""


class DegeneracyError(RuntimeError):
    """Numeric degeneracy: zero means, non-terminating rejection loops, and similar."""


class SamplingTimeoutError(DegeneracyError):
    """A rejection-based sampling scheme exceeded its attempt cap."""
