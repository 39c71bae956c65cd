"""
Pytest Configuration and Shared Fixtures for A-CubeNet.

Provides common fixtures for:
- Seeded random generators
- Small model and training configurations
- Synthetic images and on-disk datasets
- Paths to the shipped configs and the golden corpus
"""

from pathlib import Path

import numpy as np
import pytest

from src.core.settings import ModelConfig, TrainConfig
from src.imaging.image_io import ImageBuffer, save_image
from src.model.network import Model, build_model

REPO_ROOT = Path(__file__).resolve().parent.parent


# ============================================================================
# RANDOMNESS
# ============================================================================

@pytest.fixture
def rng():
    """
    Seeded numpy generator for test data.

    Returns:
        np.random.Generator
    """
    return np.random.default_rng(1234)


# ============================================================================
# CONFIG FIXTURES
# ============================================================================

@pytest.fixture
def tiny_model_config():
    """
    G=2, U=2, C=8, r=4 gray denoiser with group tail convs.

    Returns:
        ModelConfig
    """
    return ModelConfig(task="denoise", trunk_channels=8, num_groups=2, units_per_group=2,
                       bottleneck_ratio=4, group_tail_conv=True)


@pytest.fixture
def tiny_train_config(tiny_model_config):
    """
    Short training run on 8x8 patches (batch 2).

    Returns:
        TrainConfig
    """
    return TrainConfig(model=tiny_model_config, max_iters=4, batch_size=2, patch_size=8,
                       log_every=1, seed=3)


# ============================================================================
# IMAGE FIXTURES
# ============================================================================

def smooth_plane(height: int, width: int, phase: float = 0.0) -> np.ndarray:
    """Smooth test pattern in [0.2, 0.8]."""
    i, j = np.mgrid[0:height, 0:width]
    return 0.5 + 0.3 * np.sin(i / 5.0 + phase) * np.cos(j / 7.0 - phase)


@pytest.fixture
def smooth_gray():
    """
    48x48 smooth gray image.

    Returns:
        ImageBuffer
    """
    return ImageBuffer(smooth_plane(48, 48), "gray")


@pytest.fixture
def smooth_rgb():
    """
    24x24 smooth RGB image.

    Returns:
        ImageBuffer
    """
    planes = [smooth_plane(24, 24, phase) for phase in (0.0, 0.7, 1.4)]
    return ImageBuffer(np.stack(planes), "rgb")


@pytest.fixture
def gray_dataset(tmp_path):
    """
    Folder with two 32x32 gray PGM images.

    Returns:
        Path: Dataset directory.
    """
    data_dir = tmp_path / "gray_data"
    for index in range(2):
        save_image(ImageBuffer(smooth_plane(32, 32, phase=index), "gray"), data_dir / f"img{index}.pgm")
    return data_dir


@pytest.fixture
def rgb_dataset(tmp_path):
    """
    Folder with one 24x24 RGB PPM image.

    Returns:
        Path: Dataset directory.
    """
    data_dir = tmp_path / "rgb_data"
    planes = [smooth_plane(24, 24, phase) for phase in (0.0, 0.7, 1.4)]
    save_image(ImageBuffer(np.stack(planes), "rgb"), data_dir / "img0.ppm")
    return data_dir


# ============================================================================
# REPOSITORY PATHS
# ============================================================================

@pytest.fixture
def configs_dir():
    """Shipped example configs."""
    return REPO_ROOT / "configs"


@pytest.fixture
def golden_dir():
    """Golden metric corpus."""
    return REPO_ROOT / "tests" / "golden"


# ============================================================================
# MODEL FIXTURES
# ============================================================================

def make_identity_model(cfg: ModelConfig) -> Model:
    """
    Exact identity network for restoration tasks: every parameter is 0
    except the centre taps of head (input -> channel 0) and tail
    (channel 0 -> output).
    """
    model = build_model(cfg)
    for p in model.parameters():
        p.assign(np.zeros(p.shape))
    model.head.weight.data[0, 0, 1, 1] = 1.0
    model.tail.weight.data[0, 0, 1, 1] = 1.0
    return model


@pytest.fixture
def identity_model(tiny_model_config):
    """
    Identity denoiser with the tiny architecture.

    Returns:
        Model
    """
    return make_identity_model(tiny_model_config)
