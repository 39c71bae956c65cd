"""
Degradation generators: bicubic downscale, AWGN and JPEG-style compression.

All three are deterministic given (input, spec, seed, counters). AWGN is
added unclipped; clipping happens only at metric or save time.

The JPEG codec is a self-contained 8x8 block DCT with the standard
luminance quantisation table:
- pixels are level-shifted to v = 255 * x - 128
- orthonormal DCT-II per block (scipy.fft.dctn)
- table scaled by s = 5000 / q (q < 50) or 200 - 2q (q >= 50):
  T_q = clamp(floor((T * s + 50) / 100), 1, 255)
- coefficients rounded to multiples of T_q, inverse DCT, clip to [0, 1]
- partial edge blocks are padded by edge replication and cropped back
"""

import logging
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.fft import dctn, idctn

from src.core.rng import Stream, stream
from src.core.settings import DegradationSpec
from src.imaging.image_io import DegradationError, ImageBuffer
from src.imaging.resize import bicubic_resize

logger = logging.getLogger(__name__)

BLOCK = 8

# ITU-T T.81 Annex K.1 luminance table
LUMINANCE_TABLE = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.float64)


# ============================================================================
# AWGN
# ============================================================================

def add_awgn(img: ImageBuffer, sigma_255: float, seed: int,
             counters: Sequence[int] = (), stream_id: int = Stream.NOISE) -> ImageBuffer:
    """
    Add i.i.d. zero-mean Gaussian noise of std sigma_255 / 255 (unclipped).

    Args:
        img: Clean image.
        sigma_255: Noise level on the 0-255 scale.
        seed: Run seed.
        counters: Extra stream key words (image index, iteration, ...).
        stream_id: NOISE for whole images, PATCH_NOISE for training patches.

    Raises:
        DegradationError: If sigma_255 is not positive.
    """
    if not sigma_255 > 0:
        raise DegradationError(f"AWGN sigma must be > 0, got {sigma_255}")
    rng = stream(seed, stream_id, *counters)
    noise = rng.standard_normal(img.data.shape) * (sigma_255 / 255.0)
    return img.with_data(img.data + noise)


# ============================================================================
# JPEG
# ============================================================================

def quality_table(quality: int) -> np.ndarray:
    """Luminance quantisation table at a quality factor in [1, 100]."""
    if not 1 <= quality <= 100:
        raise DegradationError(f"JPEG quality must be in [1, 100], got {quality}")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    table = np.floor((LUMINANCE_TABLE * scale + 50) / 100)
    return np.clip(table, 1, 255)


def jpeg_degrade(img: ImageBuffer, quality: int) -> ImageBuffer:
    """
    Compress and decompress a single-channel image.

    Raises:
        DegradationError: On colour input or a quality outside [1, 100].
    """
    if img.channels != 1:
        raise DegradationError("jpeg_degrade works on single-channel (gray or Y) images")
    table = quality_table(quality)

    plane = img.data[0]
    height, width = plane.shape
    pad_h = -height % BLOCK
    pad_w = -width % BLOCK
    padded = np.pad(plane * 255.0 - 128.0, ((0, pad_h), (0, pad_w)), mode="edge")

    rows, cols = padded.shape[0] // BLOCK, padded.shape[1] // BLOCK
    blocks = padded.reshape(rows, BLOCK, cols, BLOCK).transpose(0, 2, 1, 3)

    coefficients = dctn(blocks, type=2, norm="ortho", axes=(-2, -1))
    quantized = np.round(coefficients / table) * table
    restored = idctn(quantized, type=2, norm="ortho", axes=(-2, -1))

    plane_out = restored.transpose(0, 2, 1, 3).reshape(padded.shape)[:height, :width]
    out = np.clip((plane_out + 128.0) / 255.0, 0.0, 1.0)
    return img.with_data(out[np.newaxis])


# ============================================================================
# DISPATCH
# ============================================================================

def modcrop(img: ImageBuffer, scale: int) -> ImageBuffer:
    """Crop bottom/right so both extents are multiples of scale."""
    height = img.height - img.height % scale
    width = img.width - img.width % scale
    if height < 1 or width < 1:
        raise DegradationError(f"Image {img.width}x{img.height} is smaller than scale {scale}")
    return img.with_data(img.data[:, :height, :width])


def apply_degradation(hq: ImageBuffer, spec: DegradationSpec, counters: Sequence[int] = (),
                      stream_id: int = Stream.NOISE) -> ImageBuffer:
    """
    Produce the low-quality counterpart of an HQ image.

    For bicubic_down the HQ extents must be multiples of the scale
    (see modcrop). `counters` extend the noise stream key so distinct
    images and iterations draw independent noise; `stream_id` separates
    whole-image noise from per-patch training noise.

    Raises:
        DegradationError: If the image cannot be degraded as requested.
    """
    if spec.kind == "bicubic_down":
        if hq.height % spec.scale or hq.width % spec.scale:
            raise DegradationError(
                f"bicubic_down x{spec.scale} needs extents divisible by the scale, "
                f"got {hq.width}x{hq.height}"
            )
        return bicubic_resize(hq, Fraction(1, spec.scale))
    if spec.kind == "awgn":
        return add_awgn(hq, spec.sigma, spec.seed, counters, stream_id)
    return jpeg_degrade(hq, spec.quality)


__all__ = [
    "add_awgn",
    "jpeg_degrade",
    "quality_table",
    "modcrop",
    "apply_degradation",
    "LUMINANCE_TABLE",
]
