"""
Training loop for A-CubeNet.

One iteration:

    lr        = lr_at(iteration, cfg)
    lq, hq    = sampler.sample(iteration)
    loss      = loss_fn(model_forward(model, lq), hq)
    backward(loss); optimizer_step(params, state, lr)

Every random draw is keyed by (seed, iteration), so the state needed to
continue a run is the parameters, the optimizer moments and the
iteration count, which is exactly what a checkpoint holds. A resumed run
reproduces an unbroken one bit for bit.

Progress lines have the form `iter=<n> lr=<v> loss=<v> [psnr=<v>]` and
are mirrored into history.json next to the output checkpoint.

Usage:
    from src.harness.trainer import train

    report = train(cfg, "data/div2k_subset", "runs/x2.ckpt")
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

from src.core.analytics import TrainingHistory
from src.core.file_manager import FileManager
from src.core.guardrails import check_loss
from src.core.settings import ConfigError, TrainConfig
from src.harness.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from src.harness.evaluator import metric_conventions
from src.harness.inference import match_channels, restore
from src.harness.optimizer import OptimizerState, optimizer_step
from src.harness.schedule import lr_at
from src.imaging.image_io import ImageBuffer, load_image
from src.imaging.metrics import measure_pair
from src.imaging.patches import PatchSampler
from src.model.losses import get_loss
from src.model.network import Model, build_model, model_forward
from src.tensor import backward

logger = logging.getLogger(__name__)


@dataclass
class TrainingReport:
    """Outcome of one train() call."""
    start_iteration: int
    iterations: int
    final_loss: Optional[float]
    final_psnr: Optional[float]
    checkpoint: Path
    history_file: Optional[Path]
    seconds: float


# ============================================================================
# DATA
# ============================================================================

def load_dataset(data_dir: Union[str, Path], channels: int) -> List[ImageBuffer]:
    """
    Load every decodable image of a folder (sorted by name), matched to
    the model's channel count.

    Raises:
        FileNotFoundError: If the folder is missing or holds no images.
        ImageFormatError: If an image cannot be decoded.
    """
    paths = FileManager(data_dir).list_images()
    if not paths:
        raise FileNotFoundError(f"No training images in {data_dir}")
    images = [match_channels(load_image(p), channels) for p in paths]
    logger.info(f"Loaded {len(images)} training images from {data_dir}")
    return images


# ============================================================================
# TRAINER
# ============================================================================

class Trainer:
    """
    Owns the model, the optimizer state and the sampler of one run.

    The loop is single-writer: only step() mutates parameters and moments.
    """

    def __init__(self, cfg: TrainConfig, images: Sequence[ImageBuffer],
                 model: Optional[Model] = None, state: Optional[OptimizerState] = None,
                 start_iteration: int = 0, history: Optional[TrainingHistory] = None):
        if cfg.model.in_channels != cfg.model.out_channels:
            raise ConfigError("Training needs in_channels == out_channels "
                              f"(got {cfg.model.in_channels} -> {cfg.model.out_channels})")
        self.cfg = cfg
        self.model = model or build_model(cfg.model, cfg.seed)
        self.params = self.model.parameters()
        self.state = state or OptimizerState.for_parameters(
            self.params, cfg.beta1, cfg.beta2, cfg.epsilon
        )
        self.sampler = PatchSampler(images, cfg.degradation, cfg.sampler)
        self.loss_fn = get_loss(cfg.loss_name)
        self.iteration = start_iteration
        self.history = history

    def step(self) -> float:
        """Run one iteration; returns the mini-batch loss."""
        lr = lr_at(self.iteration, self.cfg)
        lq, hq = self.sampler.sample(self.iteration)

        self.model.zero_grad()
        loss = self.loss_fn(model_forward(self.model, lq), hq)
        value = check_loss(loss.item(), self.iteration, lr)
        backward(loss)
        optimizer_step(self.params, None, self.state, lr)

        self.iteration += 1
        return value

    def validate(self) -> float:
        """PSNR of the first training image's full LQ/HQ pair."""
        lq, hq = self.sampler.full_pair(0)
        shave, y_channel = metric_conventions(self.cfg.model)
        return measure_pair(restore(self.model, lq), hq, shave, y_channel, with_ssim=False)["psnr"]

    def run(self, out_checkpoint: Union[str, Path]) -> TrainingReport:
        """
        Train until cfg.max_iters, logging, validating and checkpointing
        on the configured intervals; the final checkpoint goes to out_checkpoint.

        Raises:
            NonFiniteLossError: If the loss diverges (the run aborts).
        """
        cfg = self.cfg
        out_checkpoint = Path(out_checkpoint)
        start = self.iteration
        started = time.perf_counter()
        last_log = started
        loss: Optional[float] = None
        psnr: Optional[float] = None

        logger.info(f"Training {cfg.model.task} from iter={start} to iter={cfg.max_iters} "
                    f"(loss={cfg.loss_name}, {cfg.degradation.describe()})")

        while self.iteration < cfg.max_iters:
            lr = lr_at(self.iteration, cfg)
            loss = self.step()
            n = self.iteration

            validated = cfg.val_every > 0 and n % cfg.val_every == 0
            if validated:
                psnr = self.validate()
                if self.history is not None:
                    self.history.log_validation(n, psnr)

            if validated or n % cfg.log_every == 0 or n == cfg.max_iters:
                line = f"iter={n} lr={lr:.6g} loss={loss:.6f}"
                if validated:
                    line += f" psnr={psnr:.4f}"
                logger.info(line)
                if self.history is not None:
                    now = time.perf_counter()
                    self.history.log_iteration(n, lr, loss, now - last_log)
                    last_log = now

            if cfg.checkpoint_every > 0 and n % cfg.checkpoint_every == 0 and n < cfg.max_iters:
                periodic = out_checkpoint.with_name(f"{out_checkpoint.stem}.iter{n}{out_checkpoint.suffix}")
                save_checkpoint(periodic, self.model, cfg, n, self.state)

        target = save_checkpoint(out_checkpoint, self.model, cfg, self.iteration, self.state)
        seconds = time.perf_counter() - started
        logger.info(f"Finished at iter={self.iteration} in {seconds:.1f}s -> {target}")

        history_file = self.history.history_file if self.history is not None else None
        return TrainingReport(start_iteration=start, iterations=self.iteration, final_loss=loss,
                              final_psnr=psnr, checkpoint=target, history_file=history_file,
                              seconds=seconds)


# ============================================================================
# ENTRY POINT
# ============================================================================

def train(cfg: TrainConfig, data_dir: Union[str, Path], out_checkpoint: Union[str, Path],
          resume: Optional[Union[str, Path]] = None) -> TrainingReport:
    """
    Train a model on a folder of HQ images.

    Args:
        cfg: Run configuration.
        data_dir: Folder of 8-bit images (at least one).
        out_checkpoint: Final checkpoint path; history.json is written beside it.
        resume: Checkpoint to continue from. Its model config and seed must
            equal cfg's; cfg.max_iters is the new end point.

    Returns:
        TrainingReport

    Raises:
        FileNotFoundError: Missing dataset or resume checkpoint.
        CheckpointError: If the resume checkpoint belongs to another run.
        NonFiniteLossError: If the loss diverges.
    """
    out_checkpoint = Path(out_checkpoint)
    images = load_dataset(data_dir, cfg.model.in_channels)
    history = TrainingHistory(out_checkpoint.parent)

    model = state = None
    start = 0
    if resume is not None:
        saved_cfg, model, state, start = load_checkpoint(resume)
        if saved_cfg.model != cfg.model or saved_cfg.seed != cfg.seed:
            raise CheckpointError(f"{Path(resume).name} was trained with a different model or seed")
        if state is None:
            state = OptimizerState.for_parameters(model.parameters(), cfg.beta1, cfg.beta2, cfg.epsilon)
        history.truncate(start)
        logger.info(f"Resuming from {Path(resume).name} at iter={start}")
    else:
        history.reset()

    trainer = Trainer(cfg, images, model=model, state=state, start_iteration=start, history=history)
    return trainer.run(out_checkpoint)


__all__ = ["TrainingReport", "Trainer", "load_dataset", "train"]
