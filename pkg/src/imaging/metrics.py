"""
Quality metrics: PSNR and SSIM on [0, 1] images.

Both clip their inputs to [0, 1] first. PSNR of identical images is
+inf (PSNR_IDENTICAL) and is printed as "inf". SSIM uses an 11x11
Gaussian window (sigma 1.5) over the valid region, K1 = 0.01,
K2 = 0.03, data range 1; multi-channel inputs average the per-channel
scores.
"""

import math
from typing import Union

import numpy as np
from scipy.ndimage import correlate1d

from src.imaging.color import rgb_array_to_y
from src.imaging.image_io import ImageBuffer

PSNR_IDENTICAL = float("inf")

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

ImageLike = Union[ImageBuffer, np.ndarray]


def _as_planes(img: ImageLike) -> np.ndarray:
    data = img.data if isinstance(img, ImageBuffer) else np.asarray(img, dtype=np.float64)
    if data.ndim == 2:
        data = data[np.newaxis]
    if data.ndim != 3:
        raise ValueError(f"Expected [H, W] or [C, H, W] pixels, got shape {data.shape}")
    return np.clip(data, 0.0, 1.0)


def _shaved(data: np.ndarray, shave: int) -> np.ndarray:
    if shave < 0:
        raise ValueError(f"shave must be >= 0, got {shave}")
    if shave == 0:
        return data
    out = data[:, shave:-shave, shave:-shave]
    if out.size == 0:
        raise ValueError(f"Shaving {shave} pixels leaves nothing of a {data.shape[1:]} image")
    return out


def _pair(a: ImageLike, b: ImageLike, shave: int):
    x, y = _as_planes(a), _as_planes(b)
    if x.shape != y.shape:
        raise ValueError(f"Metric inputs differ in shape: {x.shape} vs {y.shape}")
    return _shaved(x, shave), _shaved(y, shave)


def psnr(a: ImageLike, b: ImageLike, shave: int = 0) -> float:
    """
    10 * log10(1 / MSE) in dB over the shaved region.

    Returns:
        PSNR_IDENTICAL (+inf) when the clipped images are identical.
    """
    x, y = _pair(a, b, shave)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return PSNR_IDENTICAL
    return 10.0 * math.log10(1.0 / mse)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalised 1-D Gaussian taps."""
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    taps = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    return taps / taps.sum()


def _filter_valid(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    half = len(taps) // 2
    out = correlate1d(plane, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    return out[half:plane.shape[0] - half, half:plane.shape[1] - half]


def _ssim_plane(x: np.ndarray, y: np.ndarray, taps: np.ndarray) -> float:
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    mu_x = _filter_valid(x, taps)
    mu_y = _filter_valid(y, taps)
    var_x = _filter_valid(x * x, taps) - mu_x ** 2
    var_y = _filter_valid(y * y, taps) - mu_y ** 2
    cov = _filter_valid(x * y, taps) - mu_x * mu_y
    numerator = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    denominator = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
    return float(np.mean(numerator / denominator))


def ssim(a: ImageLike, b: ImageLike, shave: int = 0) -> float:
    """
    Mean structural similarity.

    Raises:
        ValueError: If the shaved images are smaller than the 11x11 window.
    """
    x, y = _pair(a, b, shave)
    if x.shape[1] < SSIM_WINDOW or x.shape[2] < SSIM_WINDOW:
        raise ValueError(f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {x.shape[1:]}")
    taps = gaussian_window()
    return float(np.mean([_ssim_plane(x[c], y[c], taps) for c in range(x.shape[0])]))


def measure_pair(restored: ImageBuffer, reference: ImageBuffer, shave: int = 0,
                 y_channel: bool = False, with_ssim: bool = True) -> dict:
    """
    PSNR and SSIM of a restored image against its reference.

    With y_channel=True, RGB inputs are compared on BT.601 luma.
    with_ssim=False skips SSIM (images below the 11x11 window).
    """
    a, b = restored.data, reference.data
    if y_channel and restored.colorspace == "rgb":
        a = rgb_array_to_y(np.clip(a, 0.0, 1.0))
        b = rgb_array_to_y(np.clip(b, 0.0, 1.0))
    scores = {"psnr": psnr(a, b, shave)}
    if with_ssim:
        scores["ssim"] = ssim(a, b, shave)
    return scores


def format_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


__all__ = [
    "PSNR_IDENTICAL",
    "psnr",
    "ssim",
    "gaussian_window",
    "measure_pair",
    "format_db",
]
