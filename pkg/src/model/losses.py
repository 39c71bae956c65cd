"""
Reconstruction losses (mean over every element of the batch).
"""

from typing import Callable, Dict

from src.tensor import ShapeError, Tensor, abs_, mean, square

LossFn = Callable[[Tensor, Tensor], Tensor]


def _check_shapes(op: str, pred: Tensor, target: Tensor) -> None:
    if pred.shape != target.shape:
        raise ShapeError(f"{op}: prediction {pred.shape} and target {target.shape} differ")


def l1_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean absolute difference as a [1, 1, 1, 1] scalar."""
    _check_shapes("l1_loss", pred, target)
    return mean(abs_(pred - target))


def l2_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean squared difference as a [1, 1, 1, 1] scalar."""
    _check_shapes("l2_loss", pred, target)
    return mean(square(pred - target))


LOSSES: Dict[str, LossFn] = {"l1": l1_loss, "l2": l2_loss}


def get_loss(name: str) -> LossFn:
    if name not in LOSSES:
        raise ValueError(f"Unknown loss '{name}', expected one of {sorted(LOSSES)}")
    return LOSSES[name]


__all__ = ["l1_loss", "l2_loss", "get_loss", "LOSSES"]
