"""splitcomp: supervised-compression split computing toolkit.

A self-contained reference stack for splitting a multi-task vision model
between a weak local device and a strong server: a learned entropy model
over quantized latents, a range coder and bitstream container, loss
functions and schedules for training the compressor, analytic cost and
energy models for device/channel profiles, a benchmark harness that
emits scenario tables, and a framed TCP protocol for running the split
over a real socket.
"""

from .errors import (
    CapacityError,
    ConfigError,
    CorruptionError,
    DimensionError,
    FormatError,
    InputError,
    ModelMismatchError,
    ParameterError,
    ProtocolError,
    RangeError,
    SplitcompError,
    TaskError,
)
from .prng import Prng, mix64

__all__ = [
    "CapacityError",
    "ConfigError",
    "CorruptionError",
    "DimensionError",
    "FormatError",
    "InputError",
    "ModelMismatchError",
    "ParameterError",
    "ProtocolError",
    "Prng",
    "RangeError",
    "SplitcompError",
    "TaskError",
    "mix64",
]

__version__ = "0.1.0"
