"""
A-CubeNet: adaptive attention and aggregation network for image
restoration (super-resolution, denoising, JPEG deblocking) on a small
numpy autodiff engine.
"""

from src.__version__ import __version__

__all__ = ["__version__"]
