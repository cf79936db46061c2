"""Networked split inference: wire protocol, rate shaping, server, and
client."""

from .client import TimingBreakdown, client_infer, echo_latent
from .server import SplitServer, serve
from .shaper import RateShaper
from .wire import Frame, pack_frame, read_frame

__all__ = [
    "Frame",
    "RateShaper",
    "SplitServer",
    "TimingBreakdown",
    "client_infer",
    "echo_latent",
    "pack_frame",
    "read_frame",
    "serve",
]
