"""Analytic device, channel, and energy models.

Latency is GMAC work divided by a profiled throughput plus a fixed
per-inference overhead; transmission time is bytes over a profiled data
rate; energy integrates an affine power-vs-utilization trace with
composite Simpson's rule.  Everything is a pure function of immutable
profile records, so identical inputs always produce identical numbers.

Profile files are structured JSON documented in docs/PROFILES.md; the
shipped fixtures (jetson_nano, jetson_xavier_nx, laptop) carry plausible
placeholder magnitudes, since the source tables publish the device
roster but not numeric throughputs or power coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError, ParameterError

MODE_CPU = "cpu"
MODE_GPU = "gpu"

PLACEMENT_LOCAL = "local"
PLACEMENT_REMOTE = "remote"


@dataclass(frozen=True)
class DeviceProfile:
    """Compute device: GMAC/s per mode plus an affine power model."""

    name: str
    throughput: dict            # mode -> GMAC per second
    idle_power_w: float
    power_coef: float           # Watts per utilized GMAC/s
    overhead_s: float = 0.0
    memory_bytes: int = 0

    def __post_init__(self):
        for mode in (MODE_CPU, MODE_GPU):
            if self.throughput.get(mode, 0.0) <= 0:
                raise ParameterError(
                    f"{self.name}: throughput[{mode}] must be > 0")
        if self.idle_power_w <= 0 or self.power_coef <= 0:
            raise ParameterError(f"{self.name}: powers must be > 0")
        if self.overhead_s < 0:
            raise ParameterError(f"{self.name}: overhead must be >= 0")


@dataclass(frozen=True)
class ChannelProfile:
    """Fixed-rate link; overhead is charged in bytes per message."""

    rate_bps: float
    overhead_bytes: int = 0

    def __post_init__(self):
        if self.rate_bps <= 0:
            raise ParameterError(f"channel rate must be > 0: {self.rate_bps}")
        if self.overhead_bytes < 0:
            raise ParameterError("channel overhead must be >= 0")


@dataclass(frozen=True)
class StageProfile:
    """One pipeline stage: work, weights, activation output, placement."""

    name: str
    gmac: float
    param_bytes: int = 0
    output_bytes: int = 0
    placement: str = PLACEMENT_LOCAL

    def __post_init__(self):
        if min(self.gmac, self.param_bytes, self.output_bytes) < 0:
            raise ParameterError(f"{self.name}: negative stage numbers")
        if self.placement not in (PLACEMENT_LOCAL, PLACEMENT_REMOTE):
            raise ParameterError(f"{self.name}: bad placement {self.placement}")


@dataclass(frozen=True)
class PowerTrace:
    """Uniformly sampled instantaneous power."""

    times_s: tuple
    power_w: tuple

    def __post_init__(self):
        t = np.asarray(self.times_s, dtype=np.float64)
        p = np.asarray(self.power_w, dtype=np.float64)
        if t.shape != p.shape or t.ndim != 1:
            raise InputError("times and powers must be equal-length vectors")
        if t.size < 3:
            raise InputError(f"need at least 3 samples, got {t.size}")
        dt = np.diff(t)
        if dt.min() <= 0:
            raise InputError("sample times must be strictly increasing")
        if np.abs(dt - dt[0]).max() > 1e-9:
            raise InputError("sample spacing must be uniform within 1e-9")
        if p.min() < 0:
            raise InputError("power samples must be >= 0")


def stage_latency(stage: StageProfile, device: DeviceProfile,
                  mode: str = MODE_CPU) -> float:
    """Seconds to run one stage: gmac / throughput(mode) + overhead."""
    if mode not in device.throughput:
        raise ConfigError(f"device {device.name} has no mode {mode!r}")
    return stage.gmac / device.throughput[mode] + device.overhead_s


def tx_time(nbytes: int, ch: ChannelProfile) -> float:
    """Seconds to push one message: (bytes + overhead) * 8 / rate."""
    if nbytes < 0:
        raise ParameterError(f"byte count must be >= 0: {nbytes}")
    if nbytes == 0:
        return 0.0
    return (nbytes + ch.overhead_bytes) * 8.0 / ch.rate_bps


def simpson_energy(trace: PowerTrace) -> float:
    """Joules under the trace by composite Simpson's rule.

    With an odd interval count the final interval falls back to the
    trapezoid rule; the result is exact for polynomials up to degree 3
    over an even interval count.
    """
    t = np.asarray(trace.times_s)
    p = np.asarray(trace.power_w)
    h = float(t[1] - t[0])
    n = t.size - 1  # interval count
    pairs = n // 2
    total = 0.0
    if pairs:
        i = np.arange(pairs) * 2
        total += (h / 3.0) * float(
            (p[i] + 4.0 * p[i + 1] + p[i + 2]).sum())
    if n % 2:
        total += h * (p[-2] + p[-1]) / 2.0
    return total


def synth_power_trace(device: DeviceProfile, schedule, sample_hz: float = 1000.0
                      ) -> PowerTrace:
    """Sample the affine power model over a (duration, GMAC/s) schedule.

    p(t) = idle + coef * utilization(t), sampled at sample_hz from t = 0
    through the schedule's end (inclusive).
    """
    if sample_hz <= 0:
        raise ParameterError(f"sample_hz must be > 0: {sample_hz}")
    schedule = [(float(d), float(u)) for d, u in schedule]
    if not schedule:
        raise InputError("schedule is empty")
    if any(d <= 0 for d, _ in schedule):
        raise InputError("schedule durations must be > 0")
    if any(u < 0 for _, u in schedule):
        raise InputError("utilization must be >= 0")
    bounds = np.cumsum([d for d, _ in schedule])
    total = float(bounds[-1])
    n = max(int(np.floor(total * sample_hz)), 2)
    t = np.arange(n + 1) / sample_hz
    seg = np.searchsorted(bounds, t, side="right")
    seg = np.minimum(seg, len(schedule) - 1)
    util = np.asarray([u for _, u in schedule])[seg]
    power = device.idle_power_w + device.power_coef * util
    return PowerTrace(tuple(t.tolist()), tuple(power.tolist()))


def drop_warmup(schedule, k: int = 5):
    """Discard the first ``k`` scheduled inferences (warm-up runs)."""
    if k < 0:
        raise ParameterError(f"warm-up count must be >= 0: {k}")
    return tuple(schedule)[k:]


def load_device_profile(path) -> DeviceProfile:
    """Read a device profile JSON file (schema in docs/PROFILES.md)."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"profile {path} is not valid JSON: {e}")
    try:
        return DeviceProfile(
            name=raw["name"],
            throughput={MODE_CPU: float(raw["throughput_gmacps"]["cpu"]),
                        MODE_GPU: float(raw["throughput_gmacps"]["gpu"])},
            idle_power_w=float(raw["idle_power_w"]),
            power_coef=float(raw["power_coef_w_per_gmacps"]),
            overhead_s=float(raw.get("overhead_s", 0.0)),
            memory_bytes=int(raw.get("memory_bytes", 0)))
    except KeyError as e:
        raise ConfigError(f"profile {path} missing field {e}")


def parse_rate(text) -> float:
    """'100kbps' / '37.5kbps' / '2mbps' / plain bits-per-second -> bps."""
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        s = str(text).strip().lower()
        mult = 1.0
        for suffix, m in (("kbps", 1e3), ("mbps", 1e6), ("bps", 1.0)):
            if s.endswith(suffix):
                s = s[:-len(suffix)]
                mult = m
                break
        try:
            value = float(s) * mult
        except ValueError:
            raise ConfigError(f"cannot parse channel rate {text!r}")
    if value <= 0:
        raise ConfigError(f"channel rate must be > 0: {text!r}")
    return value
