"""
Tests for src/imaging/image_io.py and src/imaging/color.py.

Tests:
- Bit-exact PGM/PPM/PNG round trips of 8-bit data
- Malformed, truncated and unsupported files
- BT.601 luma
"""

import numpy as np
import pytest

from src.imaging.color import luminance, rgb_to_y
from src.imaging.image_io import ImageBuffer, ImageFormatError, load_image, save_image


def _eight_bit(rng, shape):
    return rng.integers(0, 256, size=shape) / 255.0


class TestRoundTrip:
    """8-bit images survive save/load unchanged."""

    @pytest.mark.parametrize("suffix", [".pgm", ".png", ".pnm"])
    def test_gray(self, tmp_path, rng, suffix):
        """Gray containers."""
        img = ImageBuffer(_eight_bit(rng, (1, 7, 5)), "gray")
        loaded = load_image(save_image(img, tmp_path / f"g{suffix}"))
        assert loaded.colorspace == "gray"
        np.testing.assert_array_equal(loaded.data, img.data)

    @pytest.mark.parametrize("suffix", [".ppm", ".png"])
    def test_rgb(self, tmp_path, rng, suffix):
        """Colour containers keep channel order."""
        img = ImageBuffer(_eight_bit(rng, (3, 4, 6)), "rgb")
        loaded = load_image(save_image(img, tmp_path / f"c{suffix}"))
        assert loaded.colorspace == "rgb"
        np.testing.assert_array_equal(loaded.data, img.data)

    def test_save_clamps_and_rounds(self, tmp_path):
        """Out-of-range values are clipped before quantisation."""
        img = ImageBuffer(np.array([[-0.3, 0.5, 1.7]]), "gray")
        loaded = load_image(save_image(img, tmp_path / "c.pgm"))
        np.testing.assert_array_equal(loaded.data[0, 0], [0.0, 128 / 255, 1.0])

    def test_pgm_header(self, tmp_path):
        """Binary P5 output."""
        path = save_image(ImageBuffer(np.zeros((1, 2, 3)), "gray"), tmp_path / "z.pgm")
        assert path.read_bytes().startswith(b"P5")


class TestBadFiles:
    """Decoding failures are reported as ImageFormatError."""

    def test_missing_file(self, tmp_path):
        """Missing paths raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.pgm")

    def test_not_an_image(self, tmp_path):
        """Arbitrary bytes are rejected."""
        path = tmp_path / "junk.pgm"
        path.write_bytes(b"hello world, not a picture")
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_truncated_pgm(self, tmp_path):
        """A header promising more pixels than present."""
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(5))
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_rgb_into_pgm(self, tmp_path):
        """PGM cannot hold three channels."""
        with pytest.raises(ImageFormatError):
            save_image(ImageBuffer(np.zeros((3, 2, 2)), "rgb"), tmp_path / "x.pgm")

    def test_unknown_suffix(self, tmp_path):
        """Only pgm/ppm/pnm/png are written."""
        with pytest.raises(ImageFormatError):
            save_image(ImageBuffer(np.zeros((1, 2, 2))), tmp_path / "x.bmp")

    def test_buffer_shape_checked(self):
        """rgb needs three channels."""
        with pytest.raises(ImageFormatError):
            ImageBuffer(np.zeros((1, 2, 2)), "rgb")


class TestColor:
    """BT.601 studio-swing luma."""

    def test_white_and_black(self):
        """White -> 235/255, black -> 16/255."""
        data = np.zeros((3, 1, 2))
        data[:, 0, 0] = 1.0
        y = rgb_to_y(ImageBuffer(data, "rgb"))
        assert y.colorspace == "y_of_ycbcr"
        np.testing.assert_allclose(y.data[0, 0], [235 / 255, 16 / 255], atol=1e-12)

    def test_luminance_passes_gray_through(self, smooth_gray):
        """Single-channel images are returned unchanged."""
        assert luminance(smooth_gray) is smooth_gray

    def test_rgb_to_y_rejects_gray(self, smooth_gray):
        """Gray input is not RGB."""
        with pytest.raises(ImageFormatError):
            rgb_to_y(smooth_gray)
