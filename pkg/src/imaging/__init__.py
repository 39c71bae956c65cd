"""
Imaging for A-CubeNet: file I/O, colour conversion, resizing,
degradations, quality metrics and training patch sampling.
"""

from src.imaging.image_io import (
    ImageBuffer,
    ImageFormatError,
    DegradationError,
    load_image,
    save_image,
)
from src.imaging.color import rgb_to_y, luminance
from src.imaging.resize import bicubic_resize
from src.imaging.degrade import add_awgn, jpeg_degrade, apply_degradation, modcrop
from src.imaging.metrics import PSNR_IDENTICAL, psnr, ssim, measure_pair, format_db
from src.imaging.patches import PatchSampler, sample_batch, apply_transform, invert_transform

__all__ = [
    "ImageBuffer",
    "ImageFormatError",
    "DegradationError",
    "load_image",
    "save_image",
    "rgb_to_y",
    "luminance",
    "bicubic_resize",
    "add_awgn",
    "jpeg_degrade",
    "apply_degradation",
    "modcrop",
    "PSNR_IDENTICAL",
    "psnr",
    "ssim",
    "measure_pair",
    "format_db",
    "PatchSampler",
    "sample_batch",
    "apply_transform",
    "invert_transform",
]
