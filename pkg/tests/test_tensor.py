"""Forward-op tests with hand-computed references."""

import numpy as np
import pytest

from splitcomp import DimensionError, InputError, ParameterError
from splitcomp.tensor import (
    as_tensor,
    conv2d,
    global_avg_pool,
    linear,
    log_softmax,
    relu,
    softmax,
    upsample_nearest,
)


def test_as_tensor_validates():
    t = as_tensor([[1, 2], [3, 4]])
    assert t.dtype == np.float64 and t.flags["C_CONTIGUOUS"]
    with pytest.raises(InputError):
        as_tensor([1.0, np.nan])
    with pytest.raises(InputError):
        as_tensor([np.inf])
    with pytest.raises(DimensionError):
        as_tensor([1.0, 2.0], shape=(3,))


def test_conv2d_ramp_oracle():
    # 4x4 ramp 0..15, single channel, 2x2 ones kernel, stride 2:
    # windows sum to [[0+1+4+5, 2+3+6+7], [8+9+12+13, 10+11+14+15]]
    x = np.arange(16, dtype=float).reshape(1, 4, 4)
    w = np.ones((1, 1, 2, 2))
    out = conv2d(x, w, np.zeros(1), stride=2)
    assert out.shape == (1, 2, 2)
    np.testing.assert_array_equal(out[0], [[10.0, 18.0], [42.0, 50.0]])


def test_conv2d_identity_kernel():
    x = np.arange(2 * 3 * 3, dtype=float).reshape(2, 3, 3)
    w = np.zeros((2, 2, 1, 1))
    w[0, 0, 0, 0] = 1.0
    w[1, 1, 0, 0] = 1.0
    out = conv2d(x, w, np.zeros(2))
    np.testing.assert_array_equal(out, x)


def test_conv2d_bias_and_padding():
    x = np.zeros((1, 2, 2))
    w = np.ones((3, 1, 3, 3))
    out = conv2d(x, w, np.array([1.0, -2.0, 0.5]), stride=1, padding=1)
    assert out.shape == (3, 2, 2)
    np.testing.assert_array_equal(out[1], np.full((2, 2), -2.0))


def test_conv2d_output_shape_formula():
    x = np.zeros((3, 11, 7))
    w = np.zeros((5, 3, 3, 3))
    out = conv2d(x, w, np.zeros(5), stride=2, padding=1)
    # H' = floor((11 + 2 - 3)/2) + 1 = 6, W' = floor((7 + 2 - 3)/2) + 1 = 4
    assert out.shape == (5, 6, 4)


def test_conv2d_dimension_errors_name_axis():
    x = np.zeros((3, 4, 4))
    with pytest.raises(DimensionError, match="channel"):
        conv2d(x, np.zeros((1, 2, 2, 2)), np.zeros(1))
    with pytest.raises(DimensionError, match="bias"):
        conv2d(x, np.zeros((1, 3, 2, 2)), np.zeros(2))
    with pytest.raises(DimensionError, match="height"):
        conv2d(np.zeros((1, 2, 8)), np.zeros((1, 1, 3, 3)), np.zeros(1))
    with pytest.raises(ParameterError):
        conv2d(x, np.zeros((1, 3, 2, 2)), np.zeros(1), stride=0)


def test_relu():
    np.testing.assert_array_equal(relu([-1.0, 0.0, 2.5]), [0.0, 0.0, 2.5])


def test_softmax_two_logit_oracle():
    # softmax([2,0], tau=2) = softmax([1,0]) = [e/(e+1), 1/(e+1)]
    p = softmax([2.0, 0.0], temperature=2.0)
    np.testing.assert_allclose(
        p, [0.7310585786300049, 0.2689414213699951], rtol=0, atol=1e-15)


def test_softmax_properties():
    p = softmax([1000.0, 1000.0, 1000.0])
    np.testing.assert_allclose(p, [1 / 3] * 3, atol=1e-15)
    q = softmax([-1e4, 0.0, 1e4])
    assert q.sum() == pytest.approx(1.0, abs=1e-12) and np.all(q >= 0)
    assert q.argmax() == 2
    with pytest.raises(ParameterError):
        softmax([1.0], temperature=0.0)
    with pytest.raises(DimensionError):
        softmax([[1.0, 2.0]])


def test_log_softmax_consistent():
    logits = [0.3, -1.2, 4.0, 0.0]
    np.testing.assert_allclose(
        log_softmax(logits, 1.7), np.log(softmax(logits, 1.7)), atol=1e-12)


def test_global_avg_pool():
    x = np.arange(8, dtype=float).reshape(2, 2, 2)
    np.testing.assert_array_equal(global_avg_pool(x), [1.5, 5.5])


def test_upsample_nearest():
    x = np.array([[[1.0, 2.0], [3.0, 4.0]]])
    up = upsample_nearest(x, 2)
    np.testing.assert_array_equal(
        up[0],
        [[1, 1, 2, 2], [1, 1, 2, 2], [3, 3, 4, 4], [3, 3, 4, 4]])
    np.testing.assert_array_equal(upsample_nearest(x, 1), x)
    with pytest.raises(ParameterError):
        upsample_nearest(x, 0)


def test_linear():
    w = np.array([[1.0, 2.0], [0.0, -1.0], [3.0, 0.5]])
    out = linear([2.0, 4.0], w, [0.0, 1.0, -1.0])
    np.testing.assert_array_equal(out, [10.0, -3.0, 7.0])
    with pytest.raises(DimensionError, match="weight"):
        linear([1.0, 2.0, 3.0], w, np.zeros(3))
