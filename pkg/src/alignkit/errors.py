"""Exception taxonomy shared by the library, the CLI, and external clients.

Every error carries a stable machine-readable ``code`` so that callers
(shell pipelines, the TypeScript client) can branch on failure class
without parsing messages.
"""


class AlignkitError(Exception):
    """Base class for all library errors."""

    code = "error"


class DimensionMismatch(AlignkitError):
    """Two matrices disagree on a dimension that must match."""

    code = "dim_mismatch"


class LengthMismatch(AlignkitError):
    """Two vectors (or a vector and a frame axis) disagree in length."""

    code = "length_mismatch"


class NonFiniteInput(AlignkitError):
    """An input contains NaN or an unexpected infinity."""

    code = "non_finite_input"


class InvalidParameter(AlignkitError):
    """A scalar parameter is outside its documented domain."""

    code = "invalid_parameter"


class NoFeasiblePath(AlignkitError):
    """No monotone path exists (target shorter than source, or blocked)."""

    code = "no_feasible_path"


class InvalidPath(AlignkitError):
    """A hard alignment violates the monotone-path invariants."""

    code = "invalid_path"


class NegativeDuration(AlignkitError):
    """A duration value is negative."""

    code = "negative_duration"


class EmptyOutput(AlignkitError):
    """An operation would produce a zero-frame result."""

    code = "empty_output"


class EmptyInput(AlignkitError):
    """An operation received a zero-length input it cannot handle."""

    code = "empty_input"


class InsufficientVoicedFrames(AlignkitError):
    """Fewer than two frames are voiced in both contours."""

    code = "insufficient_voiced_frames"


class ZeroVariance(AlignkitError):
    """A correlation input is constant over the compared frames."""

    code = "zero_variance"


class MalformedHeader(AlignkitError):
    """An array file does not parse as NPY version 1.0."""

    code = "malformed_header"


class UnsupportedDtype(AlignkitError):
    """An array file uses a dtype outside {f32, f64, i64} little-endian."""

    code = "unsupported_dtype"


class UnsupportedRank(AlignkitError):
    """An array file stores anything other than a 1-D or 2-D array."""

    code = "unsupported_rank"


class FortranOrderUnsupported(AlignkitError):
    """An array file stores Fortran-ordered data."""

    code = "fortran_order_unsupported"


class IoFailure(AlignkitError):
    """Reading or writing a file failed at the OS level."""

    code = "io_error"
