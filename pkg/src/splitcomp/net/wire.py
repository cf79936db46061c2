"""Wire protocol: framing and payload layouts.

Frame layout (big-endian, byte-exact contract in docs/WIRE.md):

    offset  size  field
    0       4     magic "LDN1"
    4       1     message type: 0 request, 1 response, 2 error
    5       1     task bitmask: bit0 classify, bit1 detect, bit2 segment,
                  bit7 debug latent echo
    6       4     payload length (unsigned)
    10      -     payload

Request payloads carry a serialized Bitstream.  Response payloads carry
one section per requested task in (classify, detect, segment) order:

    classify  u16 class id, f32 score
    detect    u16 count, then count records of f32 x1,y1,x2,y2 and a
              u16 fixed-point score (value/65535)
    segment   u16 height, u16 width, u32 run count, then runs of
              u16 class id, u16 run length (row-major scan)

Echo responses carry the decoded symbol tensor: u16 channels, u16
height, u16 width, then channels*height*width i32 values.  Error
payloads carry a u16 code and a UTF-8 message.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import CorruptionError, FormatError, ParameterError, TaskError
from ..model import TASKS
from ..tensor import softmax

MAGIC = b"LDN1"
HEADER = struct.Struct(">4sBBI")

MSG_REQUEST = 0
MSG_RESPONSE = 1
MSG_ERROR = 2
_MSG_TYPES = (MSG_REQUEST, MSG_RESPONSE, MSG_ERROR)

TASK_BITS = {"classify": 0x01, "detect": 0x02, "segment": 0x04}
ECHO_BIT = 0x80
TASK_MASK_ALL = 0x07

MAX_PAYLOAD = 1 << 24

ERR_BAD_MAGIC = 1
ERR_BAD_TYPE = 2
ERR_BAD_LENGTH = 3
ERR_BAD_PAYLOAD = 4
ERR_BAD_MODEL = 5
ERR_BAD_TASKS = 6
ERR_INTERNAL = 7

_U16 = struct.Struct(">H")
_U32 = struct.Struct(">I")
_CLS = struct.Struct(">Hf")
_DET = struct.Struct(">4fH")
_SEG_HDR = struct.Struct(">HHI")
_RUN = struct.Struct(">HH")
_ERR = struct.Struct(">H")


@dataclass(frozen=True)
class Frame:
    msg_type: int
    task_mask: int
    payload: bytes


def pack_frame(frame: Frame) -> bytes:
    if frame.msg_type not in _MSG_TYPES:
        raise ParameterError(f"unknown message type {frame.msg_type}")
    if not 0 <= frame.task_mask <= 0xFF:
        raise ParameterError(f"task mask {frame.task_mask} out of range")
    if len(frame.payload) > MAX_PAYLOAD:
        raise ParameterError(f"payload of {len(frame.payload)} bytes "
                             f"exceeds the {MAX_PAYLOAD} limit")
    return HEADER.pack(MAGIC, frame.msg_type, frame.task_mask,
                       len(frame.payload)) + frame.payload


def read_exact(fh, n: int) -> bytes | None:
    """Read exactly n bytes from a blocking file object, None on EOF."""
    chunks = []
    remaining = n
    while remaining:
        chunk = fh.read(remaining)
        if not chunk:
            return None
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(fh) -> Frame:
    """Strict frame read for clients; any deviation is an error."""
    header = read_exact(fh, HEADER.size)
    if header is None:
        raise CorruptionError("connection closed mid-frame")
    magic, msg_type, mask, length = HEADER.unpack(header)
    if magic != MAGIC:
        raise FormatError(f"bad frame magic {magic!r}")
    if msg_type not in _MSG_TYPES:
        raise FormatError(f"unknown message type {msg_type}")
    if length > MAX_PAYLOAD:
        raise FormatError(f"frame length {length} exceeds limit")
    payload = read_exact(fh, length) if length else b""
    if payload is None:
        raise CorruptionError("connection closed mid-payload")
    return Frame(msg_type, mask, payload)


def mask_for_tasks(tasks, echo: bool = False) -> int:
    mask = ECHO_BIT if echo else 0
    for task in set(tasks):
        if task not in TASK_BITS:
            raise TaskError(f"unknown task {task!r}")
        mask |= TASK_BITS[task]
    if mask == 0:
        raise TaskError("empty task set")
    return mask


def tasks_for_mask(mask: int):
    return tuple(t for t in TASKS if mask & TASK_BITS[t])


def pack_error(code: int, message: str) -> bytes:
    return _ERR.pack(code) + message.encode()


def parse_error(payload: bytes):
    if len(payload) < _ERR.size:
        raise CorruptionError("error payload shorter than its code")
    (code,) = _ERR.unpack_from(payload)
    return code, payload[_ERR.size:].decode(errors="replace")


def _rle(classes: np.ndarray):
    flat = classes.ravel()
    if flat.size == 0:
        return
    edges = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], edges))
    ends = np.concatenate((edges, [flat.size]))
    for s, e in zip(starts, ends):
        value, run = int(flat[s]), int(e - s)
        while run > 0xFFFF:
            yield value, 0xFFFF
            run -= 0xFFFF
        yield value, run


def serialize_predictions(preds: dict) -> bytes:
    """Sections in canonical task order; deterministic bytes."""
    out = bytearray()
    for task in TASKS:
        if task not in preds:
            continue
        value = preds[task]
        if task == "classify":
            logits = np.asarray(value, dtype=np.float64)
            probs = softmax(logits)
            cls = int(logits.argmax())
            out += _CLS.pack(cls, float(probs[cls]))
        elif task == "detect":
            out += _U16.pack(len(value))
            for (x1, y1, x2, y2), score in value:
                out += _DET.pack(x1, y1, x2, y2,
                                 int(round(score * 0xFFFF)))
        else:
            classes = np.asarray(value)
            h, w = classes.shape
            runs = list(_rle(classes))
            out += _SEG_HDR.pack(h, w, len(runs))
            for value_, run in runs:
                out += _RUN.pack(value_, run)
    return bytes(out)


def parse_predictions(payload: bytes, mask: int) -> dict:
    """Inverse of serialize_predictions for the tasks named by mask."""
    preds = {}
    pos = 0
    for task in tasks_for_mask(mask):
        try:
            if task == "classify":
                cls, score = _CLS.unpack_from(payload, pos)
                pos += _CLS.size
                preds[task] = (cls, score)
            elif task == "detect":
                (count,) = _U16.unpack_from(payload, pos)
                pos += _U16.size
                records = []
                for _ in range(count):
                    x1, y1, x2, y2, q = _DET.unpack_from(payload, pos)
                    pos += _DET.size
                    records.append(((x1, y1, x2, y2), q / 0xFFFF))
                preds[task] = records
            else:
                h, w, nruns = _SEG_HDR.unpack_from(payload, pos)
                pos += _SEG_HDR.size
                flat = np.empty(h * w, dtype=np.int64)
                at = 0
                for _ in range(nruns):
                    value, run = _RUN.unpack_from(payload, pos)
                    pos += _RUN.size
                    if at + run > flat.size:
                        raise CorruptionError("segment runs overflow the map")
                    flat[at:at + run] = value
                    at += run
                if at != flat.size:
                    raise CorruptionError("segment runs underfill the map")
                preds[task] = flat.reshape(h, w)
        except struct.error:
            raise CorruptionError(f"response truncated in {task} section")
    if pos != len(payload):
        raise CorruptionError(f"{len(payload) - pos} trailing response bytes")
    return preds


def serialize_symbols(symbols: np.ndarray) -> bytes:
    z = np.asarray(symbols)
    if z.ndim != 3:
        raise ParameterError(f"symbols must be 3-D, got {z.ndim}-D")
    c, h, w = z.shape
    if max(c, h, w) > 0xFFFF:
        raise ParameterError(f"symbol tensor {z.shape} exceeds u16 axes")
    head = _U16.pack(c) + _U16.pack(h) + _U16.pack(w)
    return head + z.astype(">i4").tobytes()


def parse_symbols(payload: bytes) -> np.ndarray:
    if len(payload) < 6:
        raise CorruptionError("symbol payload shorter than its header")
    c = _U16.unpack_from(payload, 0)[0]
    h = _U16.unpack_from(payload, 2)[0]
    w = _U16.unpack_from(payload, 4)[0]
    body = payload[6:]
    if len(body) != 4 * c * h * w:
        raise CorruptionError(
            f"symbol payload carries {len(body)} bytes, "
            f"shape {(c, h, w)} needs {4 * c * h * w}")
    return np.frombuffer(body, dtype=">i4").astype(np.int64).reshape(c, h, w)
