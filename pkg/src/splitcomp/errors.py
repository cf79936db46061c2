"""Exception taxonomy shared across the toolkit.

Every error raised by the public API is a subclass of ``SplitcompError`` so
callers can catch one type at the boundary.  The subclasses map onto the
failure classes of each subsystem (shapes, parameters, wire formats, ...).
"""


class SplitcompError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SplitcompError, ValueError):
    """Array shapes are incompatible; the message names the offending axis."""


class ParameterError(SplitcompError, ValueError):
    """A scalar parameter is outside its valid domain (e.g. temperature <= 0)."""


class InputError(SplitcompError, ValueError):
    """Input data violates a precondition (non-finite values, empty input, ...)."""


class CapacityError(SplitcompError, ValueError):
    """A CDF table cannot represent the requested symbol range at this precision."""


class FormatError(SplitcompError, ValueError):
    """A serialized container (bitstream, frame, file) has an invalid layout."""


class ModelMismatchError(SplitcompError, ValueError):
    """An entropy-model id in a stream does not match the model supplied."""


class CorruptionError(SplitcompError, ValueError):
    """A payload is truncated or internally inconsistent."""


class TaskError(SplitcompError, ValueError):
    """An unknown task identifier was requested."""


class ConfigError(SplitcompError, ValueError):
    """A scenario/profile configuration is invalid or incomplete."""


class RangeError(SplitcompError, ValueError):
    """A value lies outside a documented range (e.g. iteration past schedule end)."""


class ProtocolError(SplitcompError, RuntimeError):
    """The remote peer answered with an error frame or malformed response."""


class TimeoutError(SplitcompError, RuntimeError):
    """A network operation did not complete within its deadline."""
