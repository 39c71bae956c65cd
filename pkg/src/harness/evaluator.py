"""
Evaluation runner.

For every image of a dataset folder the HQ image is mod-cropped,
degraded with the requested DegradationSpec, restored with full-image
inference and scored. Two scores are reported per image: the degraded
input against the reference (for super-resolution the input is first
bicubic-upscaled to the reference size) and the restored output against
the reference.

Metric conventions follow the task:
- super_resolution: PSNR/SSIM on the BT.601 Y channel, `scale` border
  pixels shaved.
- denoise / deblock: all channels, no shave.

Noise for stochastic degradations is keyed by (spec.seed, image index),
the same realisation a fixed-degradation training run uses for that
image. Tables are deterministic.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.file_manager import FileManager
from src.core.settings import ConfigError, DegradationSpec, ModelConfig, degradation_for
from src.harness.checkpoint import load_checkpoint
from src.harness.inference import match_channels, restore
from src.imaging.degrade import apply_degradation, modcrop
from src.imaging.image_io import ImageBuffer, load_image
from src.imaging.metrics import SSIM_WINDOW, format_db, measure_pair
from src.imaging.resize import bicubic_resize
from src.model.network import Model

logger = logging.getLogger(__name__)

TSV_HEADER = ("image", "input_psnr", "input_ssim", "psnr", "ssim")


# ============================================================================
# TABLE
# ============================================================================

@dataclass
class ImageScore:
    """Scores of one image; SSIM is None for images below the SSIM window."""
    name: str
    input_psnr: float
    psnr: float
    input_ssim: Optional[float] = None
    ssim: Optional[float] = None


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def _format_ssim(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


@dataclass
class MetricsTable:
    """Per-image scores plus their means."""
    task: str
    degradation: str
    rows: List[ImageScore] = field(default_factory=list)

    def mean(self) -> ImageScore:
        return ImageScore(
            name="mean",
            input_psnr=float(np.mean([r.input_psnr for r in self.rows])),
            psnr=float(np.mean([r.psnr for r in self.rows])),
            input_ssim=_mean([r.input_ssim for r in self.rows]),
            ssim=_mean([r.ssim for r in self.rows]),
        )

    def to_tsv(self) -> str:
        """Tab-separated table, one line per image and a final 'mean' line."""
        lines = ["\t".join(TSV_HEADER)]
        for row in self.rows + [self.mean()]:
            lines.append("\t".join([
                row.name,
                format_db(row.input_psnr),
                _format_ssim(row.input_ssim),
                format_db(row.psnr),
                _format_ssim(row.ssim),
            ]))
        return "\n".join(lines) + "\n"


# ============================================================================
# SCORING
# ============================================================================

def metric_conventions(cfg: ModelConfig) -> Tuple[int, bool]:
    """(shave, y_channel) for a task."""
    if cfg.task == "super_resolution":
        return cfg.scale, True
    return 0, False


def check_compatible(cfg: ModelConfig, spec: DegradationSpec) -> None:
    """
    Raises:
        ConfigError: If the degradation does not match the model's task.
    """
    expected = degradation_for(cfg)
    if spec.kind != expected.kind:
        raise ConfigError(f"A {cfg.task} model cannot be evaluated on {spec.describe()} "
                          f"(expected {expected.kind})")
    if spec.kind == "bicubic_down" and spec.scale != cfg.scale:
        raise ConfigError(f"Model upscales x{cfg.scale} but the degradation is {spec.describe()}")


def _as_input_size(lq: ImageBuffer, scale: int) -> ImageBuffer:
    return lq if scale == 1 else bicubic_resize(lq, Fraction(scale))


def score_pair(model: Model, name: str, lq: ImageBuffer, hq: ImageBuffer,
               self_ensemble: bool = False) -> ImageScore:
    """
    Restore one LQ image and score it (and the input) against its HQ image.
    """
    cfg = model.config
    shave, y_channel = metric_conventions(cfg)
    restored = restore(model, lq, self_ensemble)

    height, width = hq.height - 2 * shave, hq.width - 2 * shave
    with_ssim = min(height, width) >= SSIM_WINDOW

    before = measure_pair(_as_input_size(lq, cfg.upscale), hq, shave, y_channel, with_ssim)
    after = measure_pair(restored, hq, shave, y_channel, with_ssim)
    return ImageScore(name=name, input_psnr=before["psnr"], psnr=after["psnr"],
                      input_ssim=before.get("ssim"), ssim=after.get("ssim"))


def evaluate_pairs(model: Model, pairs: Sequence[Tuple[str, ImageBuffer, ImageBuffer]],
                   degradation: str = "custom", self_ensemble: bool = False,
                   workers: int = 1) -> MetricsTable:
    """
    Score explicit (name, LQ, HQ) pairs; images are independent, so
    `workers` > 1 scores them on a thread pool (row order is kept).
    """
    def job(pair):
        name, lq, hq = pair
        return score_pair(model, name, lq, hq, self_ensemble)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, pairs))
    else:
        rows = [job(pair) for pair in pairs]

    for row in rows:
        logger.info(f"{row.name}: input {format_db(row.input_psnr)} dB -> {format_db(row.psnr)} dB")
    return MetricsTable(task=model.config.task, degradation=degradation, rows=rows)


def evaluate_model(model: Model, data_dir: Union[str, Path], spec: DegradationSpec,
                   self_ensemble: bool = False, workers: int = 1) -> MetricsTable:
    """
    Degrade, restore and score every image of a folder.

    Raises:
        ConfigError: If spec does not match the model's task.
        FileNotFoundError: If the folder is missing or holds no images.
    """
    cfg = model.config
    check_compatible(cfg, spec)
    paths = FileManager(data_dir).list_images()
    if not paths:
        raise FileNotFoundError(f"No images in {data_dir}")

    pairs = []
    for index, path in enumerate(paths):
        hq = modcrop(match_channels(load_image(path), cfg.out_channels), spec.lq_scale)
        lq = match_channels(apply_degradation(hq, spec, counters=(index,)), cfg.in_channels)
        pairs.append((path.name, lq, hq))

    table = evaluate_pairs(model, pairs, spec.describe(), self_ensemble, workers)
    mean = table.mean()
    logger.info(f"Evaluated {len(pairs)} images on {spec.describe()}: "
                f"mean PSNR {format_db(mean.input_psnr)} -> {format_db(mean.psnr)} dB")
    return table


def evaluate(checkpoint: Union[str, Path], data_dir: Union[str, Path], spec: DegradationSpec,
             self_ensemble: bool = False, workers: int = 1) -> MetricsTable:
    """Load a checkpoint and run evaluate_model."""
    _, model, _, _ = load_checkpoint(checkpoint)
    return evaluate_model(model, data_dir, spec, self_ensemble, workers)


__all__ = [
    "ImageScore",
    "MetricsTable",
    "metric_conventions",
    "check_compatible",
    "score_pair",
    "evaluate_pairs",
    "evaluate_model",
    "evaluate",
]
