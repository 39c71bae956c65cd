"""
Colour conversion: RGB -> Y of YCbCr (ITU-R BT.601, studio swing).

    Y = (65.481 R + 128.553 G + 24.966 B + 16) / 255,  R, G, B in [0, 1]

so white maps to 235/255 and black to 16/255.
"""

import numpy as np

from src.imaging.image_io import ImageBuffer, ImageFormatError

BT601_Y_WEIGHTS = np.array([65.481, 128.553, 24.966])
BT601_Y_OFFSET = 16.0


def rgb_array_to_y(rgb: np.ndarray) -> np.ndarray:
    """[3, H, W] in [0, 1] -> [H, W] luma in [16/255, 235/255]."""
    if rgb.ndim != 3 or rgb.shape[0] != 3:
        raise ImageFormatError(f"rgb_array_to_y expects [3, H, W], got {rgb.shape}")
    return (np.tensordot(BT601_Y_WEIGHTS, rgb, axes=(0, 0)) + BT601_Y_OFFSET) / 255.0


def rgb_to_y(img: ImageBuffer) -> ImageBuffer:
    """
    Luma channel of an RGB image.

    Raises:
        ImageFormatError: If the image is not RGB.
    """
    if img.colorspace != "rgb":
        raise ImageFormatError(f"rgb_to_y needs an rgb image, got {img.colorspace}")
    return ImageBuffer(rgb_array_to_y(img.data), "y_of_ycbcr")


def luminance(img: ImageBuffer) -> ImageBuffer:
    """Y for RGB input; single-channel images pass through unchanged."""
    return rgb_to_y(img) if img.colorspace == "rgb" else img


__all__ = ["rgb_to_y", "rgb_array_to_y", "luminance", "BT601_Y_WEIGHTS"]
