"""Latent quantizers.

Two modes: hard rounding (inference path, ties away from zero) and the
additive uniform-noise surrogate used during training, where quantization
is replaced by x + eps with eps ~ Unif[-1/2, 1/2) so the objective stays
differentiable.
"""

from __future__ import annotations

import enum

import numpy as np

from ..errors import ParameterError
from ..prng import Prng
from ..tensor import Tensor, as_tensor


class Mode(enum.Enum):
    HARD_ROUND = "hard_round"
    NOISE_SURROGATE = "noise_surrogate"


class Quantizer:
    """Quantization policy for a latent tensor.

    HARD_ROUND needs no state.  NOISE_SURROGATE consumes the supplied
    generator's stream, so repeated calls perturb with fresh noise while
    two quantizers built from equal seeds replay identical noise.
    """

    def __init__(self, mode: Mode = Mode.HARD_ROUND, prng: Prng | None = None):
        if not isinstance(mode, Mode):
            raise ParameterError(f"unknown quantizer mode: {mode!r}")
        if mode is Mode.NOISE_SURROGATE and prng is None:
            raise ParameterError("noise surrogate mode requires a Prng")
        self.mode = mode
        self.prng = prng

    def __call__(self, x: Tensor) -> Tensor:
        return quantize(x, self)


def hard_round(x: Tensor) -> Tensor:
    """Nearest integer, ties away from zero (0.5 -> 1, -0.5 -> -1)."""
    x = as_tensor(x)
    return np.copysign(np.floor(np.abs(x) + 0.5), x) + 0.0


def quantize(x: Tensor, q: Quantizer) -> Tensor:
    """Apply ``q`` to ``x``; output stays within 0.5 of the input."""
    x = as_tensor(x)
    if q.mode is Mode.HARD_ROUND:
        return hard_round(x)
    eps = q.prng.uniform(x.size, -0.5, 0.5).reshape(x.shape)
    return x + eps
