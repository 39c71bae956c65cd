"""
Image I/O for A-CubeNet.

Images live in memory as ImageBuffer: float64 values, channel-major
[channels, height, width], nominally in [0, 1]. Files are 8-bit:
binary PGM/PPM (bit-exact round trip) and baseline PNG, decoded and
encoded with Pillow. Writes go through FileManager so a half-written
image never appears on disk.
"""

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.core.file_manager import FileManager
from src.core.guardrails import ACubeNetError
from src.tensor import Tensor

logger = logging.getLogger(__name__)

Colorspace = Literal["gray", "rgb", "y_of_ycbcr"]

# Pillow modes accepted on load, and the mode each is converted to
_LOAD_MODES = {"L": "L", "1": "L", "LA": "L", "RGB": "RGB", "P": "RGB", "RGBA": "RGB"}

# suffix -> (Pillow format, allowed channel counts)
_SAVE_FORMATS = {
    ".pgm": ("PPM", (1,)),
    ".ppm": ("PPM", (3,)),
    ".pnm": ("PPM", (1, 3)),
    ".png": ("PNG", (1, 3)),
}


class ImageFormatError(ACubeNetError, ValueError):
    """Raised for unsupported, malformed or truncated image files."""
    pass


class DegradationError(ACubeNetError, ValueError):
    """Raised when a degradation or resize cannot be applied to an image."""
    pass


# ============================================================================
# IMAGE BUFFER
# ============================================================================

@dataclass
class ImageBuffer:
    """
    In-memory image.

    Attributes:
        data: float64 array [channels, height, width]; channels is 1 or 3.
        colorspace: gray / rgb / y_of_ycbcr (Y channel of a colour image).
    """
    data: np.ndarray
    colorspace: Colorspace = "gray"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim == 2:
            self.data = self.data[np.newaxis]
        if self.data.ndim != 3 or self.data.shape[0] not in (1, 3):
            raise ImageFormatError(f"ImageBuffer needs [1 or 3, H, W] data, got {self.data.shape}")
        expected = 3 if self.colorspace == "rgb" else 1
        if self.data.shape[0] != expected:
            raise ImageFormatError(
                f"{self.colorspace} image needs {expected} channel(s), got {self.data.shape[0]}"
            )

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def with_data(self, data: np.ndarray) -> "ImageBuffer":
        """Same colorspace, new pixels."""
        return ImageBuffer(data, self.colorspace)

    def to_tensor(self) -> Tensor:
        """[1, C, H, W] tensor for model input."""
        return Tensor(self.data[np.newaxis])

    @classmethod
    def from_tensor(cls, tensor: Tensor, colorspace: Colorspace = "gray") -> "ImageBuffer":
        """Take sample 0 of a [B, C, H, W] tensor."""
        if tensor.ndim != 4:
            raise ImageFormatError(f"Expected a [B, C, H, W] tensor, got {tensor.shape}")
        return cls(tensor.data[0].copy(), colorspace)

    def quantized(self) -> np.ndarray:
        """Clamp to [0, 1] and round to 8-bit, [H, W] or [H, W, 3] uint8."""
        pixels = np.rint(np.clip(self.data, 0.0, 1.0) * 255.0).astype(np.uint8)
        return pixels[0] if self.channels == 1 else np.transpose(pixels, (1, 2, 0))


# ============================================================================
# LOAD / SAVE
# ============================================================================

def load_image(path: Union[str, Path]) -> ImageBuffer:
    """
    Decode an 8-bit PGM/PPM/PNG file into [0, 1] floats.

    Raises:
        FileNotFoundError: If the file does not exist.
        ImageFormatError: On unsupported modes, malformed headers or truncated data.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Image not found: {path}")

    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode not in _LOAD_MODES:
                raise ImageFormatError(f"{path.name}: unsupported pixel mode '{mode}' (8-bit gray/RGB only)")
            pixels = np.asarray(img.convert(_LOAD_MODES[mode]), dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise ImageFormatError(f"{path.name}: not a recognised image file") from e
    except (OSError, SyntaxError, ValueError) as e:
        if isinstance(e, ImageFormatError):
            raise
        raise ImageFormatError(f"{path.name}: malformed or truncated image: {e}") from e

    data = pixels.astype(np.float64) / 255.0
    if data.ndim == 2:
        buffer = ImageBuffer(data, "gray")
    else:
        buffer = ImageBuffer(np.transpose(data, (2, 0, 1)), "rgb")
    logger.debug(f"Loaded {path.name}: {buffer.colorspace} {buffer.width}x{buffer.height}")
    return buffer


def encode_image(img: ImageBuffer, suffix: str) -> bytes:
    """
    Encode to file bytes for a container suffix (.pgm/.ppm/.pnm/.png).

    Raises:
        ImageFormatError: On an unknown suffix or a channel count the container cannot hold.
    """
    suffix = suffix.lower()
    if suffix not in _SAVE_FORMATS:
        raise ImageFormatError(f"Unsupported output format '{suffix}' (use {', '.join(_SAVE_FORMATS)})")
    fmt, allowed = _SAVE_FORMATS[suffix]
    if img.channels not in allowed:
        raise ImageFormatError(f"{suffix} cannot store a {img.channels}-channel image")

    out = io.BytesIO()
    Image.fromarray(img.quantized()).save(out, format=fmt)
    return out.getvalue()


def save_image(img: ImageBuffer, path: Union[str, Path]) -> Path:
    """
    Clamp, quantize to 8 bits and write atomically.

    Returns:
        The written path.
    """
    path = Path(path)
    payload = encode_image(img, path.suffix)
    target = FileManager(path.parent).write_bytes(path.name, payload)
    logger.debug(f"Saved {target.name} ({len(payload)} bytes)")
    return target


__all__ = [
    "ImageBuffer",
    "ImageFormatError",
    "DegradationError",
    "load_image",
    "save_image",
    "encode_image",
]
