"""Latent compression data path.

Quantizers (hard round, uniform-noise surrogate), the per-channel
logistic prior with quantized CDF tables, a carry-propagating range
coder, and the bitstream container that carries coded latents between
client and server.
"""

from .bitstream import Bitstream, decode_latent, encode_latent
from .entropy_model import (
    EntropyModel,
    fit_entropy_model,
    load_entropy_model,
    logistic_mass,
    nll_and_grads,
    quantize_pmf,
    save_entropy_model,
)
from .quantizer import Quantizer, quantize
from .rangecoder import RangeDecoder, RangeEncoder

__all__ = [
    "Bitstream",
    "EntropyModel",
    "Quantizer",
    "RangeDecoder",
    "RangeEncoder",
    "decode_latent",
    "encode_latent",
    "fit_entropy_model",
    "load_entropy_model",
    "logistic_mass",
    "nll_and_grads",
    "quantize",
    "quantize_pmf",
    "save_entropy_model",
]
