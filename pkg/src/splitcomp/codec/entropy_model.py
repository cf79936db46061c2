"""Per-channel logistic prior over quantized latents.

Each latent channel c carries a logistic distribution with location
mu_c and scale s_c = exp(log_scale_c).  The mass assigned to integer
symbol k is the integral of the density over [k - 1/2, k + 1/2]:

    pmf(k) = sigmoid((k + 0.5 - mu)/s) - sigmoid((k - 0.5 - mu)/s)

which has a closed form and analytic gradients, so the same object
serves rate estimation, CDF-table construction for the range coder, and
a small gradient-descent fit to observed latent statistics.

Symbols outside [min_sym, max_sym] map to a reserved escape symbol and
travel as raw 32-bit values in the bitstream's bypass section.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np
from scipy.special import expit

from ..errors import (
    CapacityError,
    ConfigError,
    DimensionError,
    InputError,
    ParameterError,
)
from ..tensor import Tensor, as_tensor

# raw bits spent on one escaped value in the bypass section
ESCAPE_RAW_BITS = 32

# numerical floor for -log2(pmf) so rate estimates stay finite
_PMF_FLOOR = 2.0 ** -60


def _tail_stable_sigmoids(a, b):
    """sigmoid(a), sigmoid(b) evaluated so their difference keeps
    precision: in the right tail both saturate toward 1 and cancel, so
    flip signs there and use sigma(a) - sigma(b) == sigma(-b) - sigma(-a).
    Returns (|sa - sb|, sigma'(a), sigma'(b)); the derivative is even.
    """
    sgn = np.where(a + b > 0, -1.0, 1.0)
    sa = expit(sgn * a)
    sb = expit(sgn * b)
    return np.abs(sa - sb), sa * (1.0 - sa), sb * (1.0 - sb)


def logistic_mass(y, mu, s):
    """Mass of the unit interval centered on ``y`` (broadcasting)."""
    m, _, _ = _tail_stable_sigmoids((y + 0.5 - mu) / s, (y - 0.5 - mu) / s)
    return m


def _mass_and_grads(k, mu, s):
    """Mass plus its partials w.r.t. mu and log s (broadcasting)."""
    a = (k + 0.5 - mu) / s
    b = (k - 0.5 - mu) / s
    m, da, db = _tail_stable_sigmoids(a, b)
    d_mu = -(da - db) / s
    d_logs = -(a * da - b * db)
    return m, d_mu, d_logs


def quantize_pmf(probs: Sequence[float], total: int) -> np.ndarray:
    """Round probabilities to integer counts summing exactly to ``total``.

    Largest-remainder rounding with a one-count floor per symbol: take
    floor(p_i * total) clamped to >= 1, then settle the deficit by
    adding one to the largest fractional remainders (ties broken toward
    the lower index) or, when the floors overshoot, removing one from
    the largest counts still above 1.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise DimensionError("probability vector must be non-empty 1-D")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise InputError("probabilities must be finite and non-negative")
    if p.size > total:
        raise CapacityError(
            f"{p.size} symbols cannot each hold one count out of {total}")
    p = p / p.sum()
    ideal = p * total
    counts = np.maximum(np.floor(ideal).astype(np.int64), 1)
    deficit = total - int(counts.sum())
    if deficit > 0:
        rem = ideal - np.floor(ideal)
        # stable order: remainder descending, index ascending
        order = np.lexsort((np.arange(p.size), -rem))
        counts[order[:deficit]] += 1
    elif deficit < 0:
        order = np.argsort(-counts, kind="stable")
        i = 0
        while deficit < 0:
            j = order[i % p.size]
            if counts[j] > 1:
                counts[j] -= 1
                deficit += 1
            i += 1
    return counts


class EntropyModel:
    """Immutable logistic prior shared by rate estimation and coding."""

    def __init__(self, loc, log_scale, min_sym: int = -127, max_sym: int = 127,
                 precision: int = 16, tail_mass: float = 2.0 ** -9,
                 model_id: int = 0):
        loc = as_tensor(loc)
        log_scale = as_tensor(log_scale)
        if loc.ndim != 1 or loc.shape != log_scale.shape:
            raise DimensionError(
                f"loc and log_scale must be equal-length vectors, "
                f"got {loc.shape} and {log_scale.shape}")
        if min_sym > max_sym:
            raise ParameterError(f"empty symbol range [{min_sym}, {max_sym}]")
        if not 2 <= precision <= 30:
            raise ParameterError(f"cdf precision out of range: {precision}")
        if not 0.0 < tail_mass < 0.5:
            raise ParameterError(f"tail mass out of (0, 0.5): {tail_mass}")
        if not 0 <= model_id <= 0xFFFF:
            raise ParameterError(f"model id must fit 16 bits: {model_id}")
        self.loc = loc
        self.log_scale = log_scale
        self.min_sym = int(min_sym)
        self.max_sym = int(max_sym)
        self.precision = int(precision)
        self.tail_mass = float(tail_mass)
        self.model_id = int(model_id)
        self.loc.flags.writeable = False
        self.log_scale.flags.writeable = False
        self._tables = None

    @property
    def channels(self) -> int:
        return self.loc.shape[0]

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_scale)

    @property
    def num_symbols(self) -> int:
        """In-range symbol count, excluding the escape slot."""
        return self.max_sym - self.min_sym + 1

    def _check_channel(self, channel: int) -> int:
        if not 0 <= channel < self.channels:
            raise DimensionError(
                f"channel {channel} out of range for {self.channels} channels")
        return channel

    def pmf(self, channel: int, symbol: int) -> float:
        """Raw logistic mass of one in-range symbol."""
        c = self._check_channel(channel)
        return float(logistic_mass(symbol, self.loc[c], self.scale[c]))

    def pmf_table(self, channel: int) -> np.ndarray:
        """Raw masses over [min_sym, max_sym] for one channel."""
        c = self._check_channel(channel)
        ks = np.arange(self.min_sym, self.max_sym + 1, dtype=np.float64)
        return logistic_mass(ks, self.loc[c], self.scale[c])

    def escape_mass(self, channel: int) -> float:
        """Leftover mass outside the symbol range."""
        return max(1.0 - float(self.pmf_table(channel).sum()), 0.0)

    def rate_bits(self, symbols: Tensor) -> float:
        """Estimated coded size of an integral symbol tensor, in bits.

        In-range symbols cost -log2 pmf; each escape costs the tail-mass
        bits plus the 32 raw bypass bits.
        """
        symbols = as_tensor(symbols)
        if symbols.ndim < 1 or symbols.shape[0] != self.channels:
            raise DimensionError(
                f"symbol tensor must have {self.channels} leading channels, "
                f"got shape {symbols.shape}")
        if not np.array_equal(symbols, np.round(symbols)):
            raise InputError("symbols must be integral")
        escape_bits = -np.log2(self.tail_mass) + ESCAPE_RAW_BITS
        total = 0.0
        flat = symbols.reshape(self.channels, -1)
        for c in range(self.channels):
            row = flat[c]
            inr = (row >= self.min_sym) & (row <= self.max_sym)
            table = self.pmf_table(c)
            idx = (row[inr] - self.min_sym).astype(np.int64)
            p = np.maximum(table[idx], _PMF_FLOOR)
            total += float(-np.log2(p).sum())
            total += float((~inr).sum()) * escape_bits
        return total

    def build_cdf_tables(self) -> tuple:
        """Quantized cumulative tables, one per channel.

        Each table has num_symbols + 2 entries: cumulative counts from 0
        up to exactly 2**precision, the last slot before the endpoint
        being the escape symbol.  Tables are cached; the model is
        immutable so rebuilds are identical.
        """
        if self._tables is not None:
            return self._tables
        total = 1 << self.precision
        if self.num_symbols + 1 > total:
            raise CapacityError(
                f"{self.num_symbols + 1} symbols need more than "
                f"2**{self.precision} counts")
        tables = []
        for c in range(self.channels):
            raw = self.pmf_table(c)
            escape = max(self.escape_mass(c), self.tail_mass)
            counts = quantize_pmf(np.append(raw, escape), total)
            cdf = np.concatenate(([0], np.cumsum(counts)))
            tables.append(tuple(int(v) for v in cdf))
        self._tables = tuple(tables)
        return self._tables


def nll_and_grads(symbols: Tensor, mu, log_scale):
    """Mean negative log-likelihood (nats) of per-channel symbol rows.

    symbols: (channels, n) integral array.  Returns (nll, d_mu,
    d_log_scale) with gradients per channel; the analytic forms are what
    the finite-difference tests pin down.
    """
    symbols = as_tensor(symbols)
    mu = as_tensor(mu)
    log_scale = as_tensor(log_scale)
    if symbols.ndim != 2 or symbols.shape[0] != mu.shape[0]:
        raise DimensionError(
            f"expected (channels, n) symbols for {mu.shape[0]} channels, "
            f"got {symbols.shape}")
    s = np.exp(log_scale)
    m, d_mu, d_logs = _mass_and_grads(
        symbols, mu[:, None], s[:, None])
    m = np.maximum(m, 1e-300)
    n_total = symbols.size
    nll = float(-np.log(m).sum()) / n_total
    g_mu = (-d_mu / m).sum(axis=1) / n_total
    g_logs = (-d_logs / m).sum(axis=1) / n_total
    return nll, g_mu, g_logs


def fit_entropy_model(latents: Sequence[Tensor], channels: int | None = None,
                      steps: int = 200, lr: float = 0.1,
                      model_id: int = 0, **model_kwargs) -> EntropyModel:
    """Fit the logistic prior to hard-rounded latent samples.

    Plain gradient descent on the mean NLL with analytic gradients and a
    halve-on-regression step size, so the final NLL never exceeds the
    initial one.  ``latents`` is a sequence of (C, ...) tensors.
    """
    if not latents:
        raise InputError("need at least one latent sample")
    rows = [as_tensor(t).reshape(as_tensor(t).shape[0], -1) for t in latents]
    c = rows[0].shape[0]
    if channels is not None and channels != c:
        raise DimensionError(f"latents have {c} channels, expected {channels}")
    if any(r.shape[0] != c for r in rows):
        raise DimensionError("latent samples disagree on channel count")
    data = np.concatenate(rows, axis=1)
    if data.shape[1] == 0:
        raise InputError("latent samples are empty")
    symbols = np.copysign(np.floor(np.abs(data) + 0.5), data) + 0.0
    mu = symbols.mean(axis=1)
    log_s = np.log(np.maximum(symbols.std(axis=1), 0.05))
    nll, g_mu, g_logs = nll_and_grads(symbols, mu, log_s)
    step = float(lr)
    for _ in range(steps):
        cand_mu = mu - step * g_mu
        cand_logs = np.clip(log_s - step * g_logs, -6.0, 8.0)
        cand_nll, cand_g_mu, cand_g_logs = nll_and_grads(
            symbols, cand_mu, cand_logs)
        if cand_nll <= nll:
            mu, log_s = cand_mu, cand_logs
            nll, g_mu, g_logs = cand_nll, cand_g_mu, cand_g_logs
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return EntropyModel(mu, log_s, model_id=model_id, **model_kwargs)


def save_entropy_model(model: EntropyModel, path) -> None:
    """Write a model as JSON (schema in docs/MODEL.md)."""
    with open(path, "w") as fh:
        json.dump({"loc": model.loc.tolist(),
                   "log_scale": model.log_scale.tolist(),
                   "min_sym": model.min_sym, "max_sym": model.max_sym,
                   "precision": model.precision,
                   "tail_mass": model.tail_mass,
                   "model_id": model.model_id}, fh, indent=2)
        fh.write("\n")


def load_entropy_model(path) -> EntropyModel:
    """Read a model written by save_entropy_model."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"entropy model file is not valid JSON: {e}")
    try:
        return EntropyModel(
            np.asarray(raw["loc"], dtype=np.float64),
            np.asarray(raw["log_scale"], dtype=np.float64),
            min_sym=int(raw.get("min_sym", -127)),
            max_sym=int(raw.get("max_sym", 127)),
            precision=int(raw.get("precision", 16)),
            tail_mass=float(raw.get("tail_mass", 2.0 ** -9)),
            model_id=int(raw.get("model_id", 0)))
    except KeyError as e:
        raise ConfigError(f"entropy model file missing field {e}")
