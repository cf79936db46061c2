"""Carry-propagating range coder with 64-bit state.

Encoder and decoder keep (low, range) as 64-bit integers.  One symbol
with cumulative count ``cum`` and count ``freq`` out of 2**precision
updates the state as

    r     = range // 2**precision
    low   = low + cum * r        (mod 2**64, carry walked into output)
    range = freq * r

followed by byte-wise renormalization: while range < 2**56, emit (or
consume) the top byte of low and shift both by 8 bits.  A carry out of
the 64-bit low increments the last emitted byte, rolling back through
any 0xFF bytes.  The flush picks the smallest multiple of 2**56 inside
the final [low, low + range) as the code value; its 56 low bits are
zero, so one emitted byte closes the stream and a coded payload is
always renorm bytes + 1 (empty for zero symbols).  The decoder supplies
the seven dropped zero bytes itself; needing more than those means the
payload was truncated, finishing without consuming them means it had
trailing bytes.

The byte-level walkthrough lives in docs/FORMAT.md; the hand-stepped
example there is frozen into the tests.
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Sequence

from ..errors import CorruptionError, ParameterError

MASK = (1 << 64) - 1
TOP = 1 << 56
TAIL_PAD = 7  # zero bytes the one-byte flush leaves for the decoder


class RangeEncoder:
    """Single-stream encoder; call encode() per symbol, then finish()."""

    def __init__(self, precision: int = 16):
        if not 2 <= precision <= 30:
            raise ParameterError(f"precision out of range: {precision}")
        self.precision = precision
        self._low = 0
        self._range = MASK
        self._out = bytearray()
        self._done = False
        self._count = 0

    def encode(self, cum: int, freq: int) -> None:
        """Append one symbol spanning [cum, cum + freq) of 2**precision."""
        if self._done:
            raise CorruptionError("encoder already finished")
        if freq <= 0 or cum < 0 or cum + freq > (1 << self.precision):
            raise ParameterError(
                f"bad symbol interval cum={cum} freq={freq} "
                f"at precision {self.precision}")
        r = self._range >> self.precision
        low = self._low + cum * r
        if low > MASK:
            self._carry()
            low &= MASK
        self._low = low
        self._range = freq * r
        while self._range < TOP:
            self._out.append((self._low >> 56) & 0xFF)
            self._low = (self._low << 8) & MASK
            self._range <<= 8
        self._count += 1

    def _carry(self) -> None:
        # bump the last emitted byte, rolling through 0xFF.  cannot
        # fall off the front: emitted bytes plus the 64-bit window
        # always bound the coded value (see docs/FORMAT.md)
        i = len(self._out) - 1
        while i >= 0 and self._out[i] == 0xFF:
            self._out[i] = 0
            i -= 1
        assert i >= 0, "carry past start of stream"
        self._out[i] += 1

    def finish(self) -> bytes:
        """Flush and return the payload; empty when no symbols coded.

        Renormalization keeps range >= 2**56, so [low, low + range)
        always contains a multiple of 2**56: that value's 56 low bits
        are zero and only its top byte needs emitting.
        """
        if not self._done:
            self._done = True
            if self._count:
                final = (self._low + TOP - 1) >> 56 << 56
                if final > MASK:
                    self._carry()
                    final &= MASK
                self._out.append(final >> 56)
        return bytes(self._out)


class RangeDecoder:
    """Mirror of RangeEncoder over a fixed payload."""

    def __init__(self, payload: bytes, precision: int = 16):
        if not 2 <= precision <= 30:
            raise ParameterError(f"precision out of range: {precision}")
        self.precision = precision
        self._payload = payload
        self._pos = 8
        code = int.from_bytes(payload[:8], "big")
        if len(payload) < 8:
            code <<= 8 * (8 - len(payload))
        self._code = code
        self._low = 0
        self._range = MASK

    def _next_byte(self) -> int:
        if self._pos >= len(self._payload) + TAIL_PAD:
            raise CorruptionError("payload truncated mid-stream")
        b = self._payload[self._pos] if self._pos < len(self._payload) else 0
        self._pos += 1
        return b

    @property
    def exhausted(self) -> bool:
        """True once the payload plus its implicit zero tail is consumed."""
        return self._pos >= len(self._payload) + TAIL_PAD

    def decode(self, cdf: Sequence[int]) -> int:
        """Return the next symbol index under a cumulative table.

        ``cdf`` is the per-channel cumulative count table: cdf[0] == 0,
        cdf[-1] == 2**precision, strictly increasing.
        """
        r = self._range >> self.precision
        target = ((self._code - self._low) & MASK) // r
        if target >= cdf[-1]:
            target = cdf[-1] - 1
        sym = bisect_right(cdf, target) - 1
        self._low = (self._low + cdf[sym] * r) & MASK
        self._range = (cdf[sym + 1] - cdf[sym]) * r
        while self._range < TOP:
            self._code = ((self._code << 8) | self._next_byte()) & MASK
            self._low = (self._low << 8) & MASK
            self._range <<= 8
        return sym
