"""
Bicubic resizing with MATLAB imresize semantics.

- Kernel: cubic convolution with a = -0.5 (support 4).
- Output extent: ceil(in * scale).
- Output pixel x (1-based) samples source coordinate
  u = x / scale + 0.5 * (1 - 1 / scale).
- Downscaling with antialias stretches the kernel by 1/scale (support 4/scale).
- Weights are normalised per output pixel; taps outside the image are
  mirrored symmetrically (edge pixel repeated).

Resizing is separable: one weight matrix per axis, applied as a matmul.
"""

import math
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from src.imaging.image_io import DegradationError, ImageBuffer

CUBIC_A = -0.5
KERNEL_WIDTH = 4.0

# Accepted scale factors; 1 is the identity
SUPPORTED_SCALES = tuple(Fraction(1, n) for n in (4, 3, 2)) + (Fraction(1),) + tuple(
    Fraction(n) for n in (2, 3, 4)
)

Scale = Union[int, float, Fraction]


def cubic(x: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    absx = np.abs(x)
    absx2 = absx * absx
    absx3 = absx2 * absx
    near = ((a + 2) * absx3 - (a + 3) * absx2 + 1) * (absx <= 1)
    far = (a * absx3 - 5 * a * absx2 + 8 * a * absx - 4 * a) * ((absx > 1) & (absx <= 2))
    return near + far


def _as_fraction(scale: Scale) -> Fraction:
    fraction = Fraction(scale).limit_denominator(16)
    if fraction not in SUPPORTED_SCALES:
        raise DegradationError(f"Unsupported resize scale {scale} (use 1/4, 1/3, 1/2, 1, 2, 3 or 4)")
    return fraction


@lru_cache(maxsize=64)
def _weight_matrix(in_len: int, out_len: int, scale: Fraction, antialias: bool) -> np.ndarray:
    """[out_len, in_len] matrix mapping an input line to an output line."""
    s = float(scale)
    if s < 1 and antialias:
        width = KERNEL_WIDTH / s

        def kernel(x):
            return s * cubic(s * x)
    else:
        width = KERNEL_WIDTH
        kernel = cubic

    x = np.arange(1, out_len + 1, dtype=np.float64)
    u = x / s + 0.5 * (1 - 1 / s)
    left = np.floor(u - width / 2)
    taps = int(math.ceil(width)) + 2
    indices = left[:, np.newaxis] + np.arange(taps)[np.newaxis, :]      # 1-based
    weights = kernel(u[:, np.newaxis] - indices)
    weights = weights / weights.sum(axis=1, keepdims=True)

    # Symmetric mirror of out-of-range taps
    mirror = np.concatenate([np.arange(in_len), np.arange(in_len - 1, -1, -1)])
    columns = mirror[np.mod(indices.astype(np.int64) - 1, 2 * in_len)]

    matrix = np.zeros((out_len, in_len), dtype=np.float64)
    rows = np.repeat(np.arange(out_len), taps)
    np.add.at(matrix, (rows, columns.reshape(-1)), weights.reshape(-1))
    return matrix


def resize_array(data: np.ndarray, scale: Scale, antialias: bool = True) -> np.ndarray:
    """
    Resize the last two axes of an array.

    Raises:
        DegradationError: On an unsupported scale or an empty result.
    """
    fraction = _as_fraction(scale)
    if fraction == 1:
        return np.array(data, dtype=np.float64, copy=True)

    in_h, in_w = data.shape[-2:]
    out_h = math.ceil(in_h * fraction)
    out_w = math.ceil(in_w * fraction)
    if out_h < 1 or out_w < 1:
        raise DegradationError(f"Resizing {in_h}x{in_w} by {fraction} gives an empty image")

    rows = _weight_matrix(in_h, out_h, fraction, antialias)
    cols = _weight_matrix(in_w, out_w, fraction, antialias)
    out = np.einsum("ij,...jk->...ik", rows, data)
    return np.einsum("...ik,lk->...il", out, cols)


def bicubic_resize(img: ImageBuffer, scale: Scale, antialias: bool = True) -> ImageBuffer:
    """
    Resize an image by 1/4, 1/3, 1/2, 1, 2, 3 or 4.

    Example:
        >>> lq = bicubic_resize(hq, Fraction(1, 2))
    """
    return img.with_data(resize_array(img.data, scale, antialias))


__all__ = ["bicubic_resize", "resize_array", "cubic", "SUPPORTED_SCALES"]
