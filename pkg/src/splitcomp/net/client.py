"""Client half of split inference: encode locally, shape the uplink,
send one request, and collect a timing breakdown."""

from __future__ import annotations

import socket
import time
from dataclasses import dataclass

import numpy as np

from ..codec import encode_latent
from ..codec.quantizer import hard_round
from ..errors import ProtocolError
from ..errors import TimeoutError as NetTimeoutError
from . import wire


@dataclass(frozen=True)
class TimingBreakdown:
    """Seconds spent encoding, in the shaped uplink, and end to end."""

    encode_s: float
    tx_s: float
    roundtrip_s: float


def _exchange(address, frame_bytes: bytes, timeout: float) -> wire.Frame:
    host, port = address
    try:
        with socket.create_connection((host, port), timeout=timeout) as sock:
            sock.sendall(frame_bytes)
            with sock.makefile("rb") as fh:
                return wire.read_frame(fh)
    except (socket.timeout, TimeoutError):
        raise NetTimeoutError(
            f"no response from {host}:{port} within {timeout} s")


def _check_response(frame: wire.Frame) -> wire.Frame:
    if frame.msg_type == wire.MSG_ERROR:
        code, message = wire.parse_error(frame.payload)
        raise ProtocolError(f"server error {code}: {message}")
    if frame.msg_type != wire.MSG_RESPONSE:
        raise ProtocolError(f"unexpected message type {frame.msg_type}")
    return frame


def client_infer(address, image, tasks, model, shaper=None,
                 timeout: float = 60.0, symbols=None,
                 include_downlink: bool = False):
    """Run split inference against a server.

    Returns (predictions, TimingBreakdown).  The uplink payload is the
    serialized Bitstream; when a shaper is given the payload drains
    through it before the socket send (the 10-byte frame header rides
    unshaped), and include_downlink also charges the response payload
    against the same shaper.  Pass pre-quantized integer symbols to
    skip the local encode.
    """
    t0 = time.perf_counter()
    if symbols is None:
        symbols = hard_round(model.encode(image))
    stream = encode_latent(np.asarray(symbols), model.entropy_model)
    payload = stream.to_bytes()
    mask = wire.mask_for_tasks(tasks)
    frame_bytes = wire.pack_frame(wire.Frame(wire.MSG_REQUEST, mask, payload))
    encode_s = time.perf_counter() - t0
    tx_s = shaper.shape(len(payload)) if shaper is not None else 0.0
    frame = _check_response(_exchange(address, frame_bytes, timeout))
    if include_downlink and shaper is not None:
        tx_s += shaper.shape(len(frame.payload))
    preds = wire.parse_predictions(frame.payload, frame.task_mask)
    return preds, TimingBreakdown(encode_s=encode_s, tx_s=tx_s,
                                  roundtrip_s=time.perf_counter() - t0)


def echo_latent(address, symbols, entropy_model, shaper=None,
                timeout: float = 60.0) -> np.ndarray:
    """Round-trip quantized symbols through the server's decoder and
    return what it decoded (debug echo mode)."""
    stream = encode_latent(np.asarray(symbols), entropy_model)
    payload = stream.to_bytes()
    frame_bytes = wire.pack_frame(
        wire.Frame(wire.MSG_REQUEST, wire.ECHO_BIT, payload))
    if shaper is not None:
        shaper.shape(len(payload))
    frame = _check_response(_exchange(address, frame_bytes, timeout))
    return wire.parse_symbols(frame.payload)
