"""Token-bucket rate shaper for emulating narrowband uplinks.

The bucket starts empty and refills continuously at the configured
rate, capped at a capacity worth 50 ms of line rate by default, so a
burst much larger than the bucket completes in about bytes*8/rate
seconds and long-run throughput never exceeds the rate by more than
the bucket's worth.  Clock and sleep are injectable for deterministic
tests.
"""

from __future__ import annotations

import time

from ..errors import ParameterError


class RateShaper:
    def __init__(self, rate_bps: float, capacity_bits: float | None = None,
                 clock=time.monotonic, sleep=time.sleep):
        if rate_bps <= 0:
            raise ParameterError(f"rate must be > 0 bps, got {rate_bps}")
        if capacity_bits is None:
            capacity_bits = max(rate_bps * 0.05, 8.0)
        if capacity_bits <= 0:
            raise ParameterError(
                f"bucket capacity must be > 0 bits, got {capacity_bits}")
        self.rate_bps = float(rate_bps)
        self.capacity_bits = float(capacity_bits)
        self._clock = clock
        self._sleep = sleep
        self._tokens = 0.0
        self._last = clock()

    def _refill(self, now: float) -> None:
        if now > self._last:
            self._tokens = min(self.capacity_bits,
                               self._tokens + (now - self._last)
                               * self.rate_bps)
        self._last = now

    def shape(self, nbytes: int) -> float:
        """Block until nbytes worth of tokens drained; returns elapsed
        seconds (0.0 for an empty send, without touching the clock)."""
        if nbytes < 0:
            raise ParameterError(f"cannot shape {nbytes} bytes")
        if nbytes == 0:
            return 0.0
        need = nbytes * 8.0
        start = self._clock()
        self._refill(start)
        while True:
            take = min(self._tokens, need)
            self._tokens -= take
            need -= take
            # sub-microbit residue from float refill math cannot buy a
            # sleep long enough to move any clock; call it drained
            if need <= 1e-6:
                break
            self._sleep(min(need, self.capacity_bits) / self.rate_bps)
            self._refill(self._clock())
        return self._clock() - start
