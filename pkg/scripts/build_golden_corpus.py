"""
Regenerate the golden metric corpus under tests/golden/.

Writes five 24x24 gray reference/distorted PGM pairs and manifest.txt,
whose expected PSNR and SSIM values come from the double-loop
references in src.imaging.golden (not from src.imaging.metrics).

Usage:
    python scripts/build_golden_corpus.py [--out tests/golden]
"""

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.imaging.golden import GoldenEntry, reference_psnr, reference_ssim, write_manifest  # noqa: E402
from src.imaging.image_io import ImageBuffer, save_image  # noqa: E402

logger = logging.getLogger("build_golden_corpus")

SIZE = 24
KINDS = ("ramp", "waves", "checker", "disk", "texture")


def _clamp(v: float) -> int:
    return min(245, max(10, int(v)))


def reference_pixel(kind: str, i: int, j: int) -> int:
    n = SIZE
    if kind == "ramp":
        return _clamp(10 + 235 * (i + j) / (2 * (n - 1)))
    if kind == "waves":
        return _clamp(128 + 60 * math.sin(i * 0.55) * math.cos(j * 0.4))
    if kind == "checker":
        return 200 if (i // 4 + j // 4) % 2 else 50
    if kind == "disk":
        return 220 if (i - 11.5) ** 2 + (j - 11.5) ** 2 < 64 else _clamp(40 + 3 * j)
    return _clamp(128 + 50 * math.sin(i * 1.3 + j * 0.7) + 30 * math.cos(i * 0.3 - j * 1.1))


def distorted_pixel(kind: str, i: int, j: int, r: int) -> int:
    if kind == "ramp":
        return _clamp(r + (i * 7 + j * 3) % 11 - 5)
    if kind == "waves":
        return _clamp(r + 12)
    if kind == "checker":
        return _clamp(r + 25 * math.sin(i * 0.9 + j * 0.2))
    if kind == "disk":
        return _clamp(r + (9 if (i + j) % 2 else -9))
    return _clamp(r + (i * 13 + j * 29) % 31 - 15)


def build(out_dir: Path) -> None:
    entries = []
    for kind in KINDS:
        ref = np.array([[reference_pixel(kind, i, j) for j in range(SIZE)] for i in range(SIZE)])
        dist = np.array([[distorted_pixel(kind, i, j, ref[i, j]) for j in range(SIZE)] for i in range(SIZE)])
        save_image(ImageBuffer(ref / 255.0, "gray"), out_dir / f"{kind}_ref.pgm")
        save_image(ImageBuffer(dist / 255.0, "gray"), out_dir / f"{kind}_dist.pgm")

        a, b = dist / 255.0, ref / 255.0
        entries.append(GoldenEntry(f"{kind}_dist.pgm", "psnr", reference_psnr(a, b)))
        entries.append(GoldenEntry(f"{kind}_dist.pgm", "ssim", reference_ssim(a, b)))
        logger.info(f"{kind}: psnr={entries[-2].expected:.4f} ssim={entries[-1].expected:.4f}")

    write_manifest(out_dir / "manifest.txt", entries)


def parse_args():
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description="Regenerate the golden PSNR/SSIM corpus",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--out", type=Path, default=project_root / "tests" / "golden",
                        help="Output directory")
    return parser.parse_args()


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    build(parse_args().out)
