"""
Differentiable primitives for A-CubeNet.

Every equation of the network is composed from the ops below. Each op
computes its forward result with numpy and, when an input tracks
gradients, records the closure that maps the output gradient to input
gradients.

Conventions:
- conv2d is cross-correlation (no kernel flip), stride 1, zero "same"
  padding, odd square kernels.
- softmax subtracts the max along the reduced axes before exponentiating,
  so softmax(v + c) == softmax(v) whenever v + c is exact.
- relu has subgradient 0 at exactly 0.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.core.guardrails import check_finite
from src.tensor.tensor import (
    DTYPE,
    SCALAR_SHAPE,
    ShapeError,
    Tensor,
    as_tensor,
    make_result,
)

Axis = Union[int, Tuple[int, ...]]
Operand = Union[Tensor, np.ndarray, float, int]


# ============================================================================
# BROADCAST HELPERS
# ============================================================================

def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to an operand's shape."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for dim, extent in enumerate(shape):
        if extent == 1 and grad.shape[dim] != 1:
            grad = grad.sum(axis=dim, keepdims=True)
    return grad.reshape(shape)


def _normalize_axes(axis: Axis, ndim: int) -> Tuple[int, ...]:
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    if not axes:
        raise ShapeError("At least one axis is required")
    normalized = []
    for a in axes:
        if not -ndim <= a < ndim:
            raise ShapeError(f"Axis {a} out of range for {ndim}-D tensor")
        normalized.append(a % ndim)
    return tuple(sorted(set(normalized)))


# ============================================================================
# ELEMENTWISE ARITHMETIC
# ============================================================================

def add(a: Operand, b: Operand) -> Tensor:
    """Broadcasting elementwise sum."""
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return make_result("add", out, (a, b), backward)


def sub(a: Operand, b: Operand) -> Tensor:
    """Broadcasting elementwise difference."""
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return make_result("sub", out, (a, b), backward)


def mul(a: Operand, b: Operand) -> Tensor:
    """Broadcasting elementwise product."""
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def backward(grad):
        return _unbroadcast(grad * b.data, a.shape), _unbroadcast(grad * a.data, b.shape)

    return make_result("mul", out, (a, b), backward)


def square(x: Tensor) -> Tensor:
    """Elementwise x**2."""
    out = x.data * x.data

    def backward(grad):
        return (2.0 * x.data * grad,)

    return make_result("square", out, (x,), backward)


def abs_(x: Tensor) -> Tensor:
    """Elementwise |x| with subgradient 0 at exactly 0."""
    out = np.abs(x.data)

    def backward(grad):
        return (np.sign(x.data) * grad,)

    return make_result("abs", out, (x,), backward)


def relu(x: Tensor) -> Tensor:
    """
    Elementwise max(0, x).

    Gradient is 1 where x > 0 and 0 elsewhere (0 at exactly 0).
    """
    mask = x.data > 0
    out = np.where(mask, x.data, 0.0)

    def backward(grad):
        return (grad * mask,)

    return make_result("relu", out, (x,), backward)


# ============================================================================
# REDUCTIONS
# ============================================================================

def reduce_sum(x: Tensor, axis: Optional[Axis] = None) -> Tensor:
    """
    Sum over the given axes (kept with extent 1).

    With axis=None the result is the [1, 1, 1, 1] scalar used as a loss.
    """
    if axis is None:
        out = np.full(SCALAR_SHAPE, x.data.sum(), dtype=DTYPE)

        def backward(grad):
            return (np.broadcast_to(grad.reshape(()), x.shape).copy(),)

        return make_result("sum", out, (x,), backward)

    axes = _normalize_axes(axis, x.ndim)
    out = x.data.sum(axis=axes, keepdims=True)

    def backward(grad):
        return (np.broadcast_to(grad, x.shape).copy(),)

    return make_result("sum", out, (x,), backward)


def mean(x: Tensor) -> Tensor:
    """Mean over all elements as a [1, 1, 1, 1] scalar."""
    count = x.size
    if count == 0:
        raise ShapeError("mean() of an empty tensor")
    out = np.full(SCALAR_SHAPE, x.data.sum() / count, dtype=DTYPE)

    def backward(grad):
        return (np.full(x.shape, grad.reshape(()) / count, dtype=DTYPE),)

    return make_result("mean", out, (x,), backward)


def global_avg_pool(x: Tensor) -> Tensor:
    """
    Mean over the H x W positions of every map: [B, C, H, W] -> [B, C, 1, 1].

    Raises:
        ShapeError: If x is not 4-D or has an empty spatial extent.
    """
    _require_4d("global_avg_pool", x)
    _, _, height, width = x.shape
    if height < 1 or width < 1:
        raise ShapeError(f"global_avg_pool needs H, W >= 1, got {x.shape}")
    count = height * width
    out = x.data.mean(axis=(2, 3), keepdims=True)

    def backward(grad):
        return (np.broadcast_to(grad / count, x.shape).copy(),)

    return make_result("global_avg_pool", out, (x,), backward)


# ============================================================================
# SOFTMAX
# ============================================================================

def softmax(v: Tensor, axis: Axis) -> Tensor:
    """
    Softmax jointly over one or more axes, evaluated with max-subtraction.

    Args:
        v: Input tensor (all entries finite).
        axis: Axis or tuple of axes treated as one flattened set of logits,
            e.g. (2, 3) for a softmax over all H*W positions.

    Raises:
        ShapeError: If a reduced axis has extent 0.
        NonFiniteError: If v contains NaN or Inf.
    """
    axes = _normalize_axes(axis, v.ndim)
    if any(v.shape[a] < 1 for a in axes):
        raise ShapeError(f"softmax over empty axis of shape {v.shape}")
    check_finite("softmax input", v.data)

    shifted = v.data - v.data.max(axis=axes, keepdims=True)
    exps = np.exp(shifted)
    out = exps / exps.sum(axis=axes, keepdims=True)

    def backward(grad):
        dot = (grad * out).sum(axis=axes, keepdims=True)
        return (out * (grad - dot),)

    return make_result("softmax", out, (v,), backward)


# ============================================================================
# CONVOLUTION
# ============================================================================

def _correlate_same(x: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Zero-padded 'same' cross-correlation of [B,Ci,H,W] with [Co,Ci,k,k]."""
    k = weight.shape[2]
    if k == 1:
        out = np.tensordot(x, weight[:, :, 0, 0], axes=([1], [1]))
        return out.transpose(0, 3, 1, 2)

    pad = k // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(padded, (k, k), axis=(2, 3))  # [B,Ci,H,W,k,k]
    out = np.tensordot(windows, weight, axes=([1, 4, 5], [1, 2, 3]))  # [B,H,W,Co]
    return out.transpose(0, 3, 1, 2)


def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    2-D convolution, stride 1, zero "same" padding.

    Args:
        x: Input [B, Ci, H, W].
        weight: Kernel [Co, Ci, k, k] with odd k.
        bias: Optional [Co].

    Returns:
        [B, Co, H, W]; out[b,o,h,w] = bias[o] + sum_{i,y,x'} weight[o,i,y,x'] *
        xpad[b, i, h+y, w+x'].

    Raises:
        ShapeError: On channel mismatch, non-square/even kernels or an empty
            spatial extent.
    """
    _require_4d("conv2d", x)
    if weight.ndim != 4:
        raise ShapeError(f"conv2d weight must be 4-D, got {weight.shape}")
    batch, in_channels, height, width = x.shape
    out_channels, w_in, k_h, k_w = weight.shape
    if w_in != in_channels:
        raise ShapeError(f"conv2d channel mismatch: input has {in_channels}, weight expects {w_in}")
    if k_h != k_w or k_h % 2 == 0:
        raise ShapeError(f"conv2d needs an odd square kernel, got {k_h}x{k_w}")
    if height < 1 or width < 1:
        raise ShapeError(f"conv2d needs a non-empty spatial extent, got {x.shape}")
    if bias is not None and bias.shape != (out_channels,):
        raise ShapeError(f"conv2d bias must have shape ({out_channels},), got {bias.shape}")

    out = _correlate_same(x.data, weight.data)
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def backward(grad):
        k = k_h
        pad = k // 2
        if k == 1:
            grad_w = np.tensordot(grad, x.data, axes=([0, 2, 3], [0, 2, 3]))[:, :, None, None]
        else:
            padded = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
            windows = sliding_window_view(padded, (k, k), axis=(2, 3))
            grad_w = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))
        # Transposed, flipped kernel turns the input gradient into another same-correlation
        flipped = weight.data[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
        grad_x = _correlate_same(grad, flipped)
        grads = [grad_x, grad_w]
        if bias is not None:
            grads.append(grad.sum(axis=(0, 2, 3)))
        return tuple(grads)

    parents = (x, weight) if bias is None else (x, weight, bias)
    return make_result("conv2d", out, parents, backward)


# ============================================================================
# PIXEL SHUFFLE
# ============================================================================

def _shuffle(data: np.ndarray, r: int) -> np.ndarray:
    batch, channels, height, width = data.shape
    c_out = channels // (r * r)
    view = data.reshape(batch, c_out, r, r, height, width)
    return view.transpose(0, 1, 4, 2, 5, 3).reshape(batch, c_out, height * r, width * r)


def _unshuffle(data: np.ndarray, r: int) -> np.ndarray:
    batch, channels, height, width = data.shape
    h_out, w_out = height // r, width // r
    view = data.reshape(batch, channels, h_out, r, w_out, r)
    return view.transpose(0, 1, 3, 5, 2, 4).reshape(batch, channels * r * r, h_out, w_out)


def pixel_shuffle(x: Tensor, r: int) -> Tensor:
    """
    Rearrange [B, C*r^2, H, W] into [B, C, H*r, W*r].

    out[b, c, h*r+i, w*r+j] = x[b, c*r^2 + i*r + j, h, w].

    Raises:
        ShapeError: If the channel extent is not divisible by r^2.
    """
    _require_4d("pixel_shuffle", x)
    if r < 1:
        raise ShapeError(f"pixel_shuffle factor must be >= 1, got {r}")
    if x.shape[1] % (r * r) != 0:
        raise ShapeError(f"pixel_shuffle: {x.shape[1]} channels not divisible by r^2={r * r}")
    out = _shuffle(x.data, r)

    def backward(grad):
        return (_unshuffle(grad, r),)

    return make_result("pixel_shuffle", out, (x,), backward)


def pixel_unshuffle(x: Tensor, r: int) -> Tensor:
    """
    Inverse of pixel_shuffle: [B, C, H*r, W*r] -> [B, C*r^2, H, W].

    Raises:
        ShapeError: If H or W is not divisible by r.
    """
    _require_4d("pixel_unshuffle", x)
    if r < 1:
        raise ShapeError(f"pixel_unshuffle factor must be >= 1, got {r}")
    if x.shape[2] % r or x.shape[3] % r:
        raise ShapeError(f"pixel_unshuffle: spatial extent {x.shape[2:]} not divisible by {r}")
    out = _unshuffle(x.data, r)

    def backward(grad):
        return (_shuffle(grad, r),)

    return make_result("pixel_unshuffle", out, (x,), backward)


# ============================================================================
# STRUCTURAL
# ============================================================================

def concat(tensors: Sequence[Tensor], axis: int) -> Tensor:
    """Concatenate along one axis."""
    if not tensors:
        raise ShapeError("concat() of an empty sequence")
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    bounds = np.cumsum([0] + [t.shape[axis] for t in tensors])

    def backward(grad):
        return tuple(
            np.take(grad, np.arange(bounds[i], bounds[i + 1]), axis=axis)
            for i in range(len(tensors))
        )

    return make_result("concat", out, tuple(tensors), backward)


def narrow(x: Tensor, index: int, axis: int) -> Tensor:
    """Select one slice along an axis, keeping it with extent 1."""
    if not 0 <= index < x.shape[axis]:
        raise ShapeError(f"narrow index {index} out of range for axis {axis} of {x.shape}")
    out = np.take(x.data, [index], axis=axis)

    def backward(grad):
        full = np.zeros_like(x.data)
        slicer = [slice(None)] * x.ndim
        slicer[axis] = slice(index, index + 1)
        full[tuple(slicer)] = grad
        return (full,)

    return make_result("narrow", out, (x,), backward)


def _require_4d(op: str, x: Tensor) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{op} expects a 4-D [B, C, H, W] tensor, got shape {x.shape}")


__all__ = [
    "add",
    "sub",
    "mul",
    "square",
    "abs_",
    "relu",
    "reduce_sum",
    "mean",
    "global_avg_pool",
    "softmax",
    "conv2d",
    "pixel_shuffle",
    "pixel_unshuffle",
    "concat",
    "narrow",
]
