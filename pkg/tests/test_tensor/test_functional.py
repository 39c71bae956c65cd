"""
Tests for src/tensor/functional.py - Differentiable primitives.

Tests:
- Softmax normalization, shift invariance and finiteness guard
- conv2d against a double-loop reference
- pixel_shuffle index law and inverse
- Broadcast gradients
"""

import numpy as np
import pytest

from src.core.guardrails import NonFiniteError
from src.tensor import (
    Parameter,
    ShapeError,
    Tensor,
    add,
    backward,
    conv2d,
    global_avg_pool,
    narrow,
    pixel_shuffle,
    pixel_unshuffle,
    reduce_sum,
    relu,
    softmax,
)
from tests.oracles import conv_same


class TestSoftmax:
    """Tests for softmax over one or several axes."""

    def test_sums_to_one_over_spatial_axes(self, rng):
        """Softmax over (H, W) sums to 1 for every map."""
        x = Tensor(rng.normal(size=(2, 3, 5, 4)))
        out = softmax(x, (2, 3)).data
        np.testing.assert_allclose(out.sum(axis=(2, 3)), 1.0, atol=1e-12)
        assert (out > 0).all()

    def test_shift_invariance_is_exact(self):
        """Adding an exactly representable constant leaves the result bit-identical."""
        v = np.array([0.25, -1.5, 3.0, 0.125]).reshape(1, 4, 1, 1)
        base = softmax(Tensor(v), 1).data
        shifted = softmax(Tensor(v + 1024.0), 1).data
        np.testing.assert_array_equal(base, shifted)

    def test_large_logits_stay_finite(self):
        """Max-subtraction keeps huge logits finite."""
        v = Tensor(np.array([1000.0, 1001.0]).reshape(1, 2, 1, 1))
        out = softmax(v, 1).data.reshape(-1)
        np.testing.assert_allclose(out, [1 / (1 + np.e), np.e / (1 + np.e)])

    def test_non_finite_input_rejected(self):
        """NaN logits raise NonFiniteError."""
        with pytest.raises(NonFiniteError):
            softmax(Tensor(np.array([0.0, np.nan]).reshape(1, 2, 1, 1)), 1)

    def test_gradient_rows_sum_to_zero(self, rng):
        """Softmax outputs sum to a constant, so input grads sum to 0."""
        v = Parameter("v", rng.normal(size=(1, 5, 1, 1)))
        weights = Tensor(rng.normal(size=(1, 5, 1, 1)))
        backward(reduce_sum(softmax(v, 1) * weights))
        assert abs(v.grad.sum()) < 1e-12


class TestConv2d:
    """Tests for same-padded cross-correlation."""

    @pytest.mark.parametrize("k", [1, 3])
    def test_matches_double_loop(self, rng, k):
        """Vectorised conv equals the element-by-element reference."""
        x = rng.normal(size=(1, 3, 5, 6))
        w = rng.normal(size=(2, 3, k, k))
        b = rng.normal(size=2)
        out = conv2d(Tensor(x), Tensor(w), Tensor(b)).data
        np.testing.assert_allclose(out[0], conv_same(x[0], w, b), atol=1e-12)

    def test_no_kernel_flip(self):
        """A single off-centre tap shifts the image (correlation, not convolution)."""
        x = np.zeros((1, 1, 3, 3))
        x[0, 0, 1, 2] = 1.0
        w = np.zeros((1, 1, 3, 3))
        w[0, 0, 1, 2] = 1.0
        out = conv2d(Tensor(x), Tensor(w)).data
        assert out[0, 0, 1, 1] == 1.0

    def test_channel_mismatch(self):
        """Weight input channels must match the input."""
        with pytest.raises(ShapeError):
            conv2d(Tensor(np.zeros((1, 2, 4, 4))), Tensor(np.zeros((1, 3, 3, 3))))

    def test_even_kernel_rejected(self):
        """Even kernels have no centre."""
        with pytest.raises(ShapeError):
            conv2d(Tensor(np.zeros((1, 1, 4, 4))), Tensor(np.zeros((1, 1, 2, 2))))

    def test_one_pixel_input(self):
        """A 1x1 input sees only the kernel centre."""
        w = np.arange(9.0).reshape(1, 1, 3, 3)
        out = conv2d(Tensor(np.full((1, 1, 1, 1), 2.0)), Tensor(w)).data
        assert out.item() == pytest.approx(8.0)


class TestPixelShuffle:
    """Tests for pixel_shuffle / pixel_unshuffle."""

    def test_index_law(self):
        """out[b, c, h*r+i, w*r+j] == x[b, c*r^2 + i*r + j, h, w]."""
        r = 2
        x = np.arange(2 * 8 * 3 * 2, dtype=float).reshape(2, 8, 3, 2)
        out = pixel_shuffle(Tensor(x), r).data
        assert out.shape == (2, 2, 6, 4)
        for c in range(2):
            for i in range(r):
                for j in range(r):
                    np.testing.assert_array_equal(out[:, c, i::r, j::r], x[:, c * r * r + i * r + j])

    def test_unshuffle_inverts(self, rng):
        """unshuffle(shuffle(x)) == x."""
        x = rng.normal(size=(1, 9, 2, 3))
        np.testing.assert_array_equal(pixel_unshuffle(pixel_shuffle(Tensor(x), 3), 3).data, x)

    def test_indivisible_channels(self):
        """Channels must be divisible by r^2."""
        with pytest.raises(ShapeError):
            pixel_shuffle(Tensor(np.zeros((1, 6, 2, 2))), 2)


class TestGradients:
    """Tests for broadcast and selection gradients."""

    def test_broadcast_add_reduces_grad(self):
        """A [1,C,1,1] operand added to [B,C,H,W] receives summed grads."""
        x = Tensor(np.zeros((2, 3, 4, 5)))
        b = Parameter("b", np.zeros((1, 3, 1, 1)))
        backward(reduce_sum(add(x, b)))
        np.testing.assert_array_equal(b.grad, np.full((1, 3, 1, 1), 40.0))

    def test_relu_zero_has_zero_grad(self):
        """The ReLU subgradient at exactly 0 is 0."""
        x = Parameter("x", np.array([-1.0, 0.0, 2.0]).reshape(1, 3, 1, 1))
        backward(reduce_sum(relu(x)))
        np.testing.assert_array_equal(x.grad.reshape(-1), [0.0, 0.0, 1.0])

    def test_global_avg_pool_grad(self):
        """Each position receives 1/(H*W)."""
        x = Parameter("x", np.ones((1, 2, 2, 4)))
        backward(reduce_sum(global_avg_pool(x)))
        np.testing.assert_allclose(x.grad, 1.0 / 8.0)

    def test_narrow_grad_is_one_hot(self):
        """narrow routes the gradient to the selected slice only."""
        x = Parameter("x", np.ones((1, 3, 1, 1)))
        backward(reduce_sum(narrow(x, 1, 1)))
        np.testing.assert_array_equal(x.grad.reshape(-1), [0.0, 1.0, 0.0])
