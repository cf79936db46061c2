"""Bitstream container for coded latents.

Byte layout (big-endian, published in docs/FORMAT.md):

    offset  size  field
    0       4     magic "SCB1"
    4       1     version (currently 1)
    5       2     entropy model id
    7       6     latent shape C, H, W (three u16)
    13      4     payload length in bytes
    17      ...   range-coded payload
    ...     4     bypass count (number of escaped values)
    ...     4*n   bypass values, signed 32-bit each

The 17-byte header is followed by the payload and the length-prefixed
bypass section, so total size is 17 + payload + (4 + 4*escapes).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import (
    CorruptionError,
    DimensionError,
    FormatError,
    InputError,
    ModelMismatchError,
    RangeError,
)
from ..tensor import Tensor, as_tensor
from .entropy_model import EntropyModel
from .rangecoder import RangeDecoder, RangeEncoder

MAGIC = b"SCB1"
VERSION = 1
HEADER = struct.Struct(">4sBHHHHI")
U32 = struct.Struct(">I")
I32_MIN, I32_MAX = -(1 << 31), (1 << 31) - 1


@dataclass(frozen=True)
class Bitstream:
    """One coded latent: header fields plus payload and bypass bytes."""

    model_id: int
    shape: tuple
    payload: bytes
    bypass: tuple
    version: int = VERSION

    @property
    def total_bytes(self) -> int:
        return HEADER.size + len(self.payload) + 4 + 4 * len(self.bypass)

    def to_bytes(self) -> bytes:
        c, h, w = self.shape
        head = HEADER.pack(MAGIC, self.version, self.model_id, c, h, w,
                           len(self.payload))
        tail = U32.pack(len(self.bypass))
        if self.bypass:
            tail += np.asarray(self.bypass, dtype=">i4").tobytes()
        return head + self.payload + tail

    @classmethod
    def from_bytes(cls, buf: bytes) -> "Bitstream":
        if len(buf) < HEADER.size:
            raise CorruptionError(
                f"buffer of {len(buf)} bytes is shorter than the header")
        magic, version, model_id, c, h, w, plen = HEADER.unpack_from(buf, 0)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise FormatError(f"unsupported version {version}")
        pos = HEADER.size
        if len(buf) < pos + plen + 4:
            raise CorruptionError("payload truncated")
        payload = buf[pos:pos + plen]
        pos += plen
        (count,) = U32.unpack_from(buf, pos)
        pos += 4
        if len(buf) != pos + 4 * count:
            raise CorruptionError(
                f"bypass section: expected {4 * count} value bytes, "
                f"buffer leaves {len(buf) - pos}")
        vals = np.frombuffer(buf, dtype=">i4", count=count, offset=pos)
        return cls(model_id=model_id, shape=(c, h, w), payload=payload,
                   bypass=tuple(int(v) for v in vals), version=version)


def encode_latent(symbols: Tensor, model: EntropyModel) -> Bitstream:
    """Range-code an integral (C, H, W) latent under the model's tables.

    Out-of-range values are coded as the escape symbol and carried raw
    in the bypass section.
    """
    symbols = as_tensor(symbols)
    if symbols.ndim != 3:
        raise DimensionError(
            f"latent must be 3-D (C,H,W), got shape {symbols.shape}")
    if symbols.shape[0] != model.channels:
        raise ModelMismatchError(
            f"latent has {symbols.shape[0]} channels, "
            f"model expects {model.channels}")
    if any(d > 0xFFFF for d in symbols.shape):
        raise DimensionError(f"shape {symbols.shape} exceeds u16 fields")
    if not np.array_equal(symbols, np.round(symbols)):
        raise InputError("symbols must be integral")
    if symbols.size and (symbols.min() < I32_MIN or symbols.max() > I32_MAX):
        raise RangeError("symbol magnitude exceeds 32-bit bypass range")
    tables = model.build_cdf_tables()
    lo, hi = model.min_sym, model.max_sym
    escape_idx = model.num_symbols
    enc = RangeEncoder(model.precision)
    bypass = []
    ints = symbols.astype(np.int64)
    for c in range(model.channels):
        cdf = tables[c]
        for v in ints[c].ravel().tolist():
            if lo <= v <= hi:
                i = v - lo
            else:
                i = escape_idx
                bypass.append(v)
            enc.encode(cdf[i], cdf[i + 1] - cdf[i])
    return Bitstream(model_id=model.model_id, shape=symbols.shape,
                     payload=enc.finish(), bypass=tuple(bypass))


def decode_latent(stream: Bitstream, model: EntropyModel) -> Tensor:
    """Invert :func:`encode_latent`; lossless at the symbol level."""
    if stream.version != VERSION:
        raise FormatError(f"unsupported version {stream.version}")
    if stream.model_id != model.model_id:
        raise ModelMismatchError(
            f"stream coded with model {stream.model_id}, "
            f"decoder holds model {model.model_id}")
    c, h, w = stream.shape
    if c != model.channels:
        raise ModelMismatchError(
            f"stream shape has {c} channels, model expects {model.channels}")
    n = c * h * w
    if n == 0:
        if stream.payload or stream.bypass:
            raise CorruptionError("empty latent with non-empty payload")
        return np.zeros(stream.shape, dtype=np.float64)
    tables = model.build_cdf_tables()
    lo = model.min_sym
    escape_idx = model.num_symbols
    dec = RangeDecoder(stream.payload, model.precision)
    out = np.empty(n, dtype=np.float64)
    k = 0
    bp = 0
    per_chan = h * w
    for ch in range(c):
        cdf = tables[ch]
        for _ in range(per_chan):
            i = dec.decode(cdf)
            if i == escape_idx:
                if bp >= len(stream.bypass):
                    raise CorruptionError("escape symbol without bypass value")
                out[k] = stream.bypass[bp]
                bp += 1
            else:
                out[k] = lo + i
            k += 1
    if bp != len(stream.bypass):
        raise CorruptionError(
            f"{len(stream.bypass) - bp} unused bypass values")
    if not dec.exhausted:
        raise CorruptionError("payload has trailing bytes")
    return out.reshape(stream.shape)
