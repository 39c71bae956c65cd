"""
Golden metric corpus.

A manifest is plain text, one entry per line:

    <path> <metric> <expected-value>

`path` names a distorted image relative to the manifest; its reference
is the file with "_dist" replaced by "_ref". Expected values come from
the scalar double-loop references below, which share no code with
src.imaging.metrics.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np

from src.core.file_manager import FileManager

logger = logging.getLogger(__name__)

METRICS = ("psnr", "ssim")
MANIFEST_HEADER = (
    "# Golden metric corpus: <distorted image> <metric> <expected value>",
    "# Reference image = name with _dist replaced by _ref. Values from double-loop references.",
)
DIST_TAG = "_dist"
REF_TAG = "_ref"


@dataclass
class GoldenEntry:
    path: str
    metric: str
    expected: float


def reference_path_for(dist_path: Union[str, Path]) -> Path:
    dist_path = Path(dist_path)
    if DIST_TAG not in dist_path.stem:
        raise ValueError(f"Golden image name must contain '{DIST_TAG}': {dist_path.name}")
    return dist_path.with_name(dist_path.stem.replace(DIST_TAG, REF_TAG) + dist_path.suffix)


def read_manifest(path: Union[str, Path]) -> List[GoldenEntry]:
    """
    Parse a manifest; blank lines and '#' comments are skipped.

    Raises:
        ValueError: On malformed lines or unknown metrics.
    """
    entries = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'path metric value', got '{raw}'")
        name, metric, value = parts
        if metric not in METRICS:
            raise ValueError(f"{path}:{lineno}: unknown metric '{metric}'")
        entries.append(GoldenEntry(name, metric, float(value)))
    return entries


def write_manifest(path: Union[str, Path], entries: List[GoldenEntry]) -> Path:
    path = Path(path)
    lines = list(MANIFEST_HEADER) + [f"{e.path} {e.metric} {e.expected:.10f}" for e in entries]
    return FileManager(path.parent).write_text(path.name, "\n".join(lines) + "\n")


# ============================================================================
# SCALAR REFERENCES
# ============================================================================

def reference_psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Double-loop PSNR of two [H, W] planes in [0, 1]."""
    height, width = a.shape
    total = 0.0
    for i in range(height):
        for j in range(width):
            d = float(a[i, j]) - float(b[i, j])
            total += d * d
    mse = total / (height * width)
    return math.inf if mse == 0 else 10.0 * math.log10(1.0 / mse)


def reference_ssim(a: np.ndarray, b: np.ndarray, size: int = 11, sigma: float = 1.5) -> float:
    """Double-loop SSIM of two [H, W] planes over all valid 11x11 windows."""
    half = size // 2
    weights = [[math.exp(-((u - half) ** 2 + (v - half) ** 2) / (2 * sigma * sigma))
                for v in range(size)] for u in range(size)]
    norm = sum(sum(row) for row in weights)
    c1, c2 = 0.01 ** 2, 0.03 ** 2

    height, width = a.shape
    scores = []
    for i in range(height - size + 1):
        for j in range(width - size + 1):
            mx = my = sxx = syy = sxy = 0.0
            for u in range(size):
                for v in range(size):
                    w = weights[u][v] / norm
                    x = float(a[i + u, j + v])
                    y = float(b[i + u, j + v])
                    mx += w * x
                    my += w * y
                    sxx += w * x * x
                    syy += w * y * y
                    sxy += w * x * y
            vx, vy, cxy = sxx - mx * mx, syy - my * my, sxy - mx * my
            scores.append(((2 * mx * my + c1) * (2 * cxy + c2))
                          / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return sum(scores) / len(scores)


__all__ = [
    "MANIFEST_HEADER",
    "GoldenEntry",
    "reference_path_for",
    "read_manifest",
    "write_manifest",
    "reference_psnr",
    "reference_ssim",
]
