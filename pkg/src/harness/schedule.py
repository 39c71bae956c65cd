"""
Step learning-rate schedule: halve every `halve_every` iterations.
"""

from src.core.settings import TrainConfig


def lr_at(iteration: int, cfg: TrainConfig) -> float:
    """initial_lr * 0.5 ** floor(iteration / halve_every)."""
    if iteration < 0:
        raise ValueError(f"iteration must be >= 0, got {iteration}")
    return cfg.initial_lr * 0.5 ** (iteration // cfg.halve_every)


__all__ = ["lr_at"]
