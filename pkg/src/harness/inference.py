"""
Whole-image inference.

The model runs on the full image (no tiling); any extent works because
every layer is stride-1 and same-padded. Outputs stay unclamped until
save_image quantizes them.

Channel matching between a file and a model:
- 3-channel model, gray file: the plane is replicated to RGB, and the
  RGB output is averaged back to gray so a graymap stays a graymap.
- 1-channel model, RGB file: the model sees the BT.601 luma (Y).
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from src.imaging.color import luminance
from src.imaging.image_io import ImageBuffer, ImageFormatError, load_image, save_image
from src.imaging.patches import NUM_TRANSFORMS, apply_transform, invert_transform
from src.model.network import Model, model_forward
from src.tensor import Tensor, no_grad

logger = logging.getLogger(__name__)


def match_channels(img: ImageBuffer, channels: int) -> ImageBuffer:
    """
    Convert an image to the channel count a model consumes.

    Raises:
        ImageFormatError: If no conversion exists.
    """
    if img.channels == channels:
        return img
    if channels == 1:
        return luminance(img)
    if channels == 3 and img.channels == 1:
        return ImageBuffer(np.repeat(img.data, 3, axis=0), "rgb")
    raise ImageFormatError(f"Cannot feed a {img.channels}-channel image to a {channels}-channel model")


def _forward(model: Model, data: np.ndarray) -> np.ndarray:
    with no_grad():
        return model_forward(model, Tensor(data[np.newaxis])).data[0]


def restore(model: Model, img: ImageBuffer, self_ensemble: bool = False) -> ImageBuffer:
    """
    Run the model on one image already matched to its input channels.

    Args:
        model: Built network.
        img: Input with model.config.in_channels channels.
        self_ensemble: Average the outputs of the 8 dihedral transforms
            of the input, each mapped back before averaging.

    Returns:
        Unclamped restored image (sH x sW for super-resolution).
    """
    if not self_ensemble:
        out = _forward(model, img.data)
    else:
        out = np.zeros(())
        for k in range(NUM_TRANSFORMS):
            out = out + invert_transform(_forward(model, apply_transform(img.data, k)), k)
        out = out / NUM_TRANSFORMS

    if out.shape[0] == 3:
        colorspace = "rgb"
    else:
        colorspace = img.colorspace if img.colorspace != "rgb" else "gray"
    return ImageBuffer(out, colorspace)


def infer(model: Model, in_path: Union[str, Path], out_path: Union[str, Path],
          self_ensemble: bool = False) -> Path:
    """
    Restore one image file and write the result.

    Raises:
        FileNotFoundError: If the input is missing.
        ImageFormatError: If the input cannot be decoded or the output
            container cannot hold the result.
    """
    source = load_image(in_path)
    restored = restore(model, match_channels(source, model.config.in_channels), self_ensemble)
    if source.channels == 1 and restored.channels == 3:
        restored = ImageBuffer(restored.data.mean(axis=0, keepdims=True), "gray")

    target = save_image(restored, out_path)
    logger.info(f"Restored {Path(in_path).name} ({source.width}x{source.height}) -> "
                f"{target.name} ({restored.width}x{restored.height})"
                f"{' with self-ensemble' if self_ensemble else ''}")
    return target


__all__ = ["match_channels", "restore", "infer"]
