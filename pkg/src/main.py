"""
A-CubeNet command-line entry point.

Usage:
    python -m src.main params --config configs/ablation_baseline.cfg
    python -m src.main ablation
    python -m src.main gradcheck --config configs/tiny.cfg
    python -m src.main train --config configs/denoise_tiny.cfg --data data/train --out runs/dn.ckpt
    python -m src.main train --config configs/denoise_tiny.cfg --data data/train --out runs/dn.ckpt --resume runs/dn.ckpt
    python -m src.main eval --ckpt runs/dn.ckpt --data data/test --task denoise --sigma 30
    python -m src.main infer --ckpt runs/dn.ckpt --in noisy.pgm --out clean.pgm [--self-ensemble]
    python -m src.main degrade --in clean.pgm --out noisy.pgm --spec awgn:30
    python -m src.main attention --ckpt runs/dn.ckpt --in noisy.pgm

"optimizer" below always means the adaptive-moment-estimation optimizer;
"ADAM" means the dual attention module.

Exit codes: 0 success, 1 a check that ran but failed (gradcheck above
tolerance), 2 usage, configuration, file or data errors.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.__version__ import __version__
from src.core.file_manager import IMAGE_SUFFIXES, FileManager
from src.core.guardrails import ACubeNetError, validate_output_path
from src.core.settings import DegradationSpec, load_config_file, resolve_output
from src.harness.checkpoint import load_checkpoint
from src.harness.diagnostics import ablation_table, attention_report, model_gradcheck
from src.harness.evaluator import evaluate_model
from src.harness.inference import infer, match_channels
from src.harness.trainer import train
from src.imaging.color import luminance
from src.imaging.degrade import apply_degradation, modcrop
from src.imaging.image_io import load_image, save_image
from src.model.network import build_model, count_params, format_param_count

logger = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-4


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_params(args: argparse.Namespace) -> int:
    cfg = load_config_file(args.config)
    count = count_params(build_model(cfg.model, cfg.seed))
    print(f"{count} ({format_param_count(count)})")
    return 0


def cmd_ablation(args: argparse.Namespace) -> int:
    for line in ablation_table():
        print(line)
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    cfg = load_config_file(args.config)
    errors = model_gradcheck(cfg.model, seed=cfg.seed, size=args.size, step=args.step)
    worst = max(errors.values())
    print(f"{worst:.6e}")
    if worst >= args.tolerance:
        logger.error(f"Max relative error {worst:.3e} exceeds tolerance {args.tolerance:g}")
        return 1
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config_file(args.config)
    report = train(cfg, args.data, resolve_output(args.out), resume=args.resume)
    print(f"checkpoint={report.checkpoint} iterations={report.iterations}"
          + (f" loss={report.final_loss:.6f}" if report.final_loss is not None else ""))
    return 0


def _eval_spec(args: argparse.Namespace, task: str, scale: int) -> DegradationSpec:
    if task == "super_resolution":
        return DegradationSpec(kind="bicubic_down", scale=args.scale or scale, seed=args.seed)
    if task == "denoise":
        return DegradationSpec(kind="awgn", sigma=args.sigma, seed=args.seed)
    return DegradationSpec(kind="jpeg", quality=args.quality, seed=args.seed)


def cmd_eval(args: argparse.Namespace) -> int:
    _, model, _, _ = load_checkpoint(args.ckpt)
    spec = _eval_spec(args, args.task or model.config.task, model.config.scale)
    table = evaluate_model(model, args.data, spec, self_ensemble=args.self_ensemble,
                           workers=args.workers)
    text = table.to_tsv()
    if args.out:
        target = validate_output_path(Path(args.out))
        FileManager(target.parent).write_text(target.name, text)
        logger.info(f"Wrote metrics table to {target}")
    sys.stdout.write(text)
    return 0


def cmd_infer(args: argparse.Namespace) -> int:
    _, model, _, _ = load_checkpoint(args.ckpt)
    out = validate_output_path(Path(args.out), IMAGE_SUFFIXES)
    infer(model, args.input, out, self_ensemble=args.self_ensemble)
    return 0


def cmd_degrade(args: argparse.Namespace) -> int:
    spec = DegradationSpec.parse(args.spec, seed=args.seed)
    img = load_image(args.input)
    if spec.kind == "jpeg" and img.channels == 3:
        logger.info("jpeg degradation works on luma; converting the RGB input to Y")
        img = luminance(img)
    if spec.kind == "bicubic_down":
        img = modcrop(img, spec.scale)
    out = validate_output_path(Path(args.out), IMAGE_SUFFIXES)
    save_image(apply_degradation(img, spec), out)
    logger.info(f"Applied {spec.describe()} to {Path(args.input).name} -> {out.name}")
    return 0


def cmd_attention(args: argparse.Namespace) -> int:
    _, model, _, iteration = load_checkpoint(args.ckpt)
    img = match_channels(load_image(args.input), model.config.in_channels)
    print(f"checkpoint iter={iteration}")
    for line in attention_report(model, img):
        print(line)
    return 0


COMMANDS = {
    "params": cmd_params,
    "ablation": cmd_ablation,
    "gradcheck": cmd_gradcheck,
    "train": cmd_train,
    "eval": cmd_eval,
    "infer": cmd_infer,
    "degrade": cmd_degrade,
    "attention": cmd_attention,
}


# ============================================================================
# ARGUMENTS
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="acubenet",
        description="A-CubeNet image restoration (super-resolution, denoising, JPEG deblocking)",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        type=str,
        default="info",
        choices=["debug", "info", "warning", "error", "critical"],
        help="Logging level",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="Print the exact trainable parameter count")
    p.add_argument("--config", required=True, help="key=value config file")

    sub.add_parser("ablation", help="Parameter counts of the ablation variants and default models")

    p = sub.add_parser("gradcheck", help="Finite-difference gradient check of a small model")
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--size", type=int, default=8, help="Input extent")
    p.add_argument("--step", type=float, default=1e-5, help="Central-difference step")
    p.add_argument("--tolerance", type=float, default=GRADCHECK_TOLERANCE,
                   help="Exit 1 when the max relative error reaches this value")

    p = sub.add_parser("train", help="Train a model on a folder of HQ images")
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--data", required=True, help="Folder of 8-bit training images")
    p.add_argument("--out", required=True,
                   help="Output checkpoint (a bare file name goes to the default runs directory)")
    p.add_argument("--resume", default=None, help="Checkpoint to continue from")

    p = sub.add_parser("eval", help="PSNR/SSIM table of a checkpoint on a folder of images")
    p.add_argument("--ckpt", required=True, help="Checkpoint file")
    p.add_argument("--data", required=True, help="Folder of HQ test images")
    p.add_argument("--task", choices=["super_resolution", "denoise", "deblock"], default=None,
                   help="Task to evaluate (default: the checkpoint's)")
    p.add_argument("--scale", type=int, default=None, help="SR scale (default: the checkpoint's)")
    p.add_argument("--sigma", type=float, default=30.0, help="AWGN level on the 0-255 scale")
    p.add_argument("--quality", type=int, default=10, help="JPEG quality factor")
    p.add_argument("--seed", type=int, default=0, help="Noise seed")
    p.add_argument("--self-ensemble", action="store_true", help="Average over 8 dihedral transforms")
    p.add_argument("--workers", type=int, default=1, help="Images scored in parallel")
    p.add_argument("--out", default=None, help="Also write the tab-separated table here")

    p = sub.add_parser("infer", help="Restore one image")
    p.add_argument("--ckpt", required=True, help="Checkpoint file")
    p.add_argument("--in", dest="input", required=True, help="Input image")
    p.add_argument("--out", required=True, help="Output image (.pgm/.ppm/.pnm/.png)")
    p.add_argument("--self-ensemble", action="store_true", help="Average over 8 dihedral transforms")

    p = sub.add_parser("degrade", help="Apply a degradation to one image")
    p.add_argument("--in", dest="input", required=True, help="Input image")
    p.add_argument("--out", required=True, help="Output image (.pgm/.ppm/.pnm/.png)")
    p.add_argument("--spec", required=True, help="bicubic_down:<2|3|4>, awgn:<sigma> or jpeg:<quality>")
    p.add_argument("--seed", type=int, default=0, help="Noise seed")

    p = sub.add_parser("attention", help="Print learned attention weights of a checkpoint")
    p.add_argument("--ckpt", required=True, help="Checkpoint file")
    p.add_argument("--in", dest="input", required=True, help="Probe image")

    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    return build_parser().parse_args(argv)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


# ============================================================================
# MAIN ENTRY POINT
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command.

    Returns:
        Process exit code.
    """
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0

    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except (ACubeNetError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
