"""
Training patch sampling with dihedral augmentation.

Patches are cut HQ-first at a scale-aligned location: an LQ-side
origin (top, left) is drawn, the HQ patch is the (patch_size * scale)^2
window at (top * scale, left * scale), and the LQ patch is its
degradation. Each pair then gets one of the 8 dihedral transforms
(k % 4 quarter turns, then a horizontal flip when k >= 4).

Randomness per batch comes from the SAMPLE stream keyed by
(seed, iteration); per-pair noise from the NOISE stream keyed by
(seed, iteration, pair index). A batch is therefore a pure function of
(images, spec, config, iteration).
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.rng import Stream, stream
from src.core.settings import DegradationSpec, PatchSamplerConfig
from src.imaging.degrade import apply_degradation, modcrop
from src.imaging.image_io import ImageBuffer
from src.tensor import ShapeError, Tensor

logger = logging.getLogger(__name__)

NUM_TRANSFORMS = 8


# ============================================================================
# DIHEDRAL TRANSFORMS
# ============================================================================

def apply_transform(data: np.ndarray, k: int) -> np.ndarray:
    """Apply dihedral transform k (0..7) to the last two axes."""
    if not 0 <= k < NUM_TRANSFORMS:
        raise ValueError(f"Transform index must be in [0, {NUM_TRANSFORMS}), got {k}")
    out = np.rot90(data, k % 4, axes=(-2, -1))
    if k >= 4:
        out = np.flip(out, axis=-1)
    return np.ascontiguousarray(out)


def invert_transform(data: np.ndarray, k: int) -> np.ndarray:
    """Undo apply_transform(., k)."""
    if not 0 <= k < NUM_TRANSFORMS:
        raise ValueError(f"Transform index must be in [0, {NUM_TRANSFORMS}), got {k}")
    out = np.flip(data, axis=-1) if k >= 4 else data
    return np.ascontiguousarray(np.rot90(out, -(k % 4), axes=(-2, -1)))


# ============================================================================
# SAMPLER
# ============================================================================

class PatchSampler:
    """
    Draws aligned LQ/HQ mini-batches from a fixed list of HQ images.

    With degrade_online=False each image is degraded once (noise keyed by
    image index) and LQ patches are cut from that fixed LQ image, so the
    same pixels always see the same noise.
    """

    def __init__(self, images: Sequence[ImageBuffer], spec: DegradationSpec,
                 config: Optional[PatchSamplerConfig] = None):
        if not images:
            raise ShapeError("PatchSampler needs at least one HQ image")
        self.config = config or PatchSamplerConfig()
        self.spec = spec
        self.scale = spec.lq_scale
        self.images = [modcrop(img, self.scale) for img in images]
        hq_patch = self.config.patch_size * self.scale
        for i, img in enumerate(self.images):
            if img.height < hq_patch or img.width < hq_patch:
                raise ShapeError(
                    f"Image {i} ({img.width}x{img.height}) is smaller than the "
                    f"{hq_patch}x{hq_patch} HQ patch"
                )
        self._lq_cache: Dict[int, ImageBuffer] = {}

    def _fixed_lq(self, index: int) -> ImageBuffer:
        if index not in self._lq_cache:
            self._lq_cache[index] = apply_degradation(self.images[index], self.spec, counters=(index,))
        return self._lq_cache[index]

    def _pair(self, rng: np.random.Generator, iteration: int, slot: int) -> Tuple[np.ndarray, np.ndarray, int]:
        p, s = self.config.patch_size, self.scale
        index = int(rng.integers(len(self.images)))
        hq_img = self.images[index]
        top = int(rng.integers(hq_img.height // s - p + 1))
        left = int(rng.integers(hq_img.width // s - p + 1))
        k = int(rng.integers(NUM_TRANSFORMS)) if self.config.augment else 0

        hq = hq_img.data[:, top * s:(top + p) * s, left * s:(left + p) * s]
        if self.config.degrade_online:
            lq = apply_degradation(hq_img.with_data(hq), self.spec, counters=(iteration, slot),
                                   stream_id=Stream.PATCH_NOISE).data
        else:
            lq = self._fixed_lq(index).data[:, top:top + p, left:left + p]
        return apply_transform(lq, k), apply_transform(hq, k), k

    def sample(self, iteration: int = 0) -> Tuple[Tensor, Tensor]:
        """
        One batch: ([B, C, P, P] LQ, [B, C, P*s, P*s] HQ) tensors.
        """
        rng = stream(self.config.seed, Stream.SAMPLE, iteration)
        pairs = [self._pair(rng, iteration, slot) for slot in range(self.config.batch_size)]
        lq = np.stack([pair[0] for pair in pairs])
        hq = np.stack([pair[1] for pair in pairs])
        return Tensor(lq), Tensor(hq)

    def full_pair(self, index: int = 0) -> Tuple[ImageBuffer, ImageBuffer]:
        """Whole (LQ, HQ) pair of one training image (validation)."""
        hq = self.images[index]
        if self.config.degrade_online:
            return apply_degradation(hq, self.spec, counters=(index,)), hq
        return self._fixed_lq(index), hq


def sample_batch(hq: Union[ImageBuffer, Sequence[ImageBuffer]], spec: DegradationSpec,
                 sampler: PatchSamplerConfig, iteration: int = 0) -> Tuple[Tensor, Tensor]:
    """
    Functional form of PatchSampler(...).sample(iteration).

    Raises:
        ShapeError: If an image is too small for one patch.
    """
    images: List[ImageBuffer] = [hq] if isinstance(hq, ImageBuffer) else list(hq)
    return PatchSampler(images, spec, sampler).sample(iteration)


__all__ = [
    "NUM_TRANSFORMS",
    "apply_transform",
    "invert_transform",
    "PatchSampler",
    "sample_batch",
]
