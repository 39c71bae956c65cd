"""
Core module for A-CubeNet: errors, configuration, seeded randomness,
atomic file I/O and training history.
"""

from src.core.guardrails import (
    ACubeNetError,
    NonFiniteError,
    NonFiniteLossError,
    OutputPathError,
    check_finite,
    check_loss,
    validate_output_path,
)

from src.core.rng import Stream, stream

from src.core.file_manager import FileManager, IMAGE_SUFFIXES

from src.core.analytics import TrainingHistory

__all__ = [
    # Errors and guards
    "ACubeNetError",
    "NonFiniteError",
    "NonFiniteLossError",
    "OutputPathError",
    "check_finite",
    "check_loss",
    "validate_output_path",

    # Randomness
    "Stream",
    "stream",

    # Persistence
    "FileManager",
    "IMAGE_SUFFIXES",
    "TrainingHistory",
]
