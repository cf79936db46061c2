"""Dense-tensor substrate: float64 numpy arrays plus the forward ops the
toy split model needs.

Tensors are plain ``numpy.ndarray`` values in row-major (C) order with
dtype float64.  ``as_tensor`` is the single validation gate: everything
downstream may assume finite float64 input.  All operations are pure; no
op mutates its arguments.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionError, InputError, ParameterError

Tensor = np.ndarray


def as_tensor(data, shape: Sequence[int] | None = None) -> Tensor:
    """Coerce to a finite, C-contiguous float64 array.

    Raises InputError on NaN/Inf, DimensionError when ``shape`` is given
    and does not match.
    """
    arr = np.ascontiguousarray(data, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InputError("tensor contains non-finite values")
    if shape is not None and tuple(arr.shape) != tuple(shape):
        raise DimensionError(f"expected shape {tuple(shape)}, got {arr.shape}")
    return arr


def conv2d(x: Tensor, weights: Tensor, bias: Tensor, stride: int = 1,
           padding: int = 0) -> Tensor:
    """2-D cross-correlation over a CHW input.

    x: (C, H, W); weights: (K, C, kh, kw); bias: (K,).  Output is
    (K, H', W') with H' = floor((H + 2*padding - kh)/stride) + 1.
    """
    x = as_tensor(x)
    weights = as_tensor(weights)
    bias = as_tensor(bias)
    if x.ndim != 3:
        raise DimensionError(f"input must be 3-D (C,H,W), got {x.ndim}-D")
    if weights.ndim != 4:
        raise DimensionError(f"weights must be 4-D (K,C,kh,kw), got {weights.ndim}-D")
    k, c_w, kh, kw = weights.shape
    c, h, w = x.shape
    if c_w != c:
        raise DimensionError(
            f"channel axis mismatch: input has {c} channels, weights expect {c_w}")
    if bias.shape != (k,):
        raise DimensionError(
            f"bias axis mismatch: expected ({k},), got {bias.shape}")
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ParameterError(f"padding must be >= 0, got {padding}")
    hp, wp = h + 2 * padding, w + 2 * padding
    if kh > hp:
        raise DimensionError(
            f"kernel height {kh} exceeds padded input height {hp}")
    if kw > wp:
        raise DimensionError(
            f"kernel width {kw} exceeds padded input width {wp}")
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    # windows: (C, H', W', kh, kw) -> contract C,kh,kw against weights
    win = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    win = win[:, ::stride, ::stride]
    out = np.einsum("chwij,kcij->khw", win, weights, optimize=True)
    out += bias[:, None, None]
    return np.ascontiguousarray(out)


def relu(x: Tensor) -> Tensor:
    return np.maximum(as_tensor(x), 0.0)


def softmax(logits: Tensor, temperature: float = 1.0) -> Tensor:
    """Temperature-softened softmax of a 1-D logit vector.

    Stabilized by max-subtraction; the result sums to 1 within 1e-12.
    """
    if temperature <= 0:
        raise ParameterError(f"temperature must be > 0, got {temperature}")
    v = as_tensor(logits)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"logits must be a non-empty 1-D vector, got shape {v.shape}")
    z = v / temperature
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def log_softmax(logits: Tensor, temperature: float = 1.0) -> Tensor:
    """Log of :func:`softmax`, computed without intermediate underflow."""
    if temperature <= 0:
        raise ParameterError(f"temperature must be > 0, got {temperature}")
    v = as_tensor(logits)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"logits must be a non-empty 1-D vector, got shape {v.shape}")
    z = v / temperature
    z = z - z.max()
    return z - np.log(np.exp(z).sum())


def global_avg_pool(x: Tensor) -> Tensor:
    """(C, H, W) -> (C,) mean over the spatial axes."""
    x = as_tensor(x)
    if x.ndim != 3:
        raise DimensionError(f"input must be 3-D (C,H,W), got {x.ndim}-D")
    return x.mean(axis=(1, 2))


def upsample_nearest(x: Tensor, factor: int) -> Tensor:
    """Nearest-neighbor spatial upsampling of a CHW tensor."""
    x = as_tensor(x)
    if x.ndim != 3:
        raise DimensionError(f"input must be 3-D (C,H,W), got {x.ndim}-D")
    if factor < 1:
        raise ParameterError(f"factor must be >= 1, got {factor}")
    return np.ascontiguousarray(np.repeat(np.repeat(x, factor, axis=1), factor, axis=2))


def linear(x: Tensor, weights: Tensor, bias: Tensor) -> Tensor:
    """(n,) @ (m, n).T + (m,) fully-connected layer."""
    x = as_tensor(x)
    weights = as_tensor(weights)
    bias = as_tensor(bias)
    if x.ndim != 1:
        raise DimensionError(f"input must be 1-D, got {x.ndim}-D")
    if weights.ndim != 2 or weights.shape[1] != x.shape[0]:
        raise DimensionError(
            f"weight axis mismatch: expected (m, {x.shape[0]}), got {weights.shape}")
    if bias.shape != (weights.shape[0],):
        raise DimensionError(
            f"bias axis mismatch: expected ({weights.shape[0]},), got {bias.shape}")
    return weights @ x + bias
