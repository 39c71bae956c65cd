"""
Numerical Guardrails for A-CubeNet.

Enforces:
- A single library error root (ACubeNetError) that the CLI maps to exit codes
- Finiteness checks on losses, gradients and decoded tensors
- Output-path sanity checks before checkpoints/images are written

All training steps and file writers validate through these guardrails.
"""

import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)


# ============================================================================
# CONSTANTS
# ============================================================================

# Number of offending entries quoted in a non-finite diagnostic
MAX_REPORTED_ENTRIES = 5


# ============================================================================
# ERROR ROOT
# ============================================================================

class ACubeNetError(Exception):
    """Base class for every error raised deliberately by this package."""
    pass


class NonFiniteError(ACubeNetError, ValueError):
    """Raised when an array that must be finite contains NaN or Inf."""
    pass


class NonFiniteLossError(NonFiniteError):
    """Raised when the training loss diverges (abort with diagnostic)."""

    def __init__(self, iteration: int, value: float, lr: float):
        self.iteration = iteration
        self.value = value
        self.lr = lr
        super().__init__(
            f"Non-finite loss {value!r} at iteration {iteration} (lr={lr:g}); "
            f"training aborted. Lower the learning rate or inspect the data."
        )


class OutputPathError(ACubeNetError, ValueError):
    """Raised when an output path cannot be written."""
    pass


# ============================================================================
# FINITENESS
# ============================================================================

def check_finite(name: str, values: np.ndarray) -> np.ndarray:
    """
    Validate that every entry of an array is finite.

    Args:
        name: Human-readable name used in the diagnostic.
        values: Array to check.

    Returns:
        The same array (for chaining).

    Raises:
        NonFiniteError: If any entry is NaN or +/-Inf.

    Example:
        >>> check_finite("logits", np.array([0.0, 1.0]))
        array([0., 1.])
    """
    values = np.asarray(values)
    finite = np.isfinite(values)
    if finite.all():
        return values

    bad = np.argwhere(~finite)[:MAX_REPORTED_ENTRIES]
    samples = ", ".join(f"{tuple(int(i) for i in idx)}={values[tuple(idx)]!r}" for idx in bad)
    raise NonFiniteError(
        f"{name} contains {int((~finite).sum())} non-finite entries (e.g. {samples})"
    )


def check_loss(value: float, iteration: int, lr: float) -> float:
    """
    Validate a scalar training loss.

    Raises:
        NonFiniteLossError: If the loss is NaN or infinite.
    """
    if not math.isfinite(value):
        logger.error(f"Loss diverged at iteration {iteration}: {value!r}")
        raise NonFiniteLossError(iteration, value, lr)
    return value


# ============================================================================
# OUTPUT PATHS
# ============================================================================

def validate_output_path(path: Path, suffixes: Optional[tuple] = None) -> Path:
    """
    Validate an output file path and create its parent directory.

    Args:
        path: Target file path.
        suffixes: Allowed lower-case suffixes (e.g. (".pgm", ".ppm")). None allows any.

    Returns:
        Resolved absolute Path.

    Raises:
        OutputPathError: If the path is a directory or has a disallowed suffix.
    """
    path = Path(path).expanduser().resolve()

    if path.is_dir():
        raise OutputPathError(f"Output path is a directory: {path}")

    if suffixes is not None and path.suffix.lower() not in suffixes:
        raise OutputPathError(
            f"Unsupported output extension '{path.suffix}' for {path} "
            f"(expected one of {', '.join(suffixes)})"
        )

    path.parent.mkdir(parents=True, exist_ok=True)
    return path


__all__ = [
    "ACubeNetError",
    "NonFiniteError",
    "NonFiniteLossError",
    "OutputPathError",
    "check_finite",
    "check_loss",
    "validate_output_path",
]
