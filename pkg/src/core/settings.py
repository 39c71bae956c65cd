"""
Configuration Management for A-CubeNet.

Defines the validated configuration models (ModelConfig, DegradationSpec,
TrainConfig) and the flat key=value config-file format used by the CLI.

File format:
    # comment
    task=super_resolution
    scale=2
    num_groups=4
    max_iters=20000

Keys are the union of ModelConfig and TrainConfig field names (plus
`scale`, `sigma`, `quality` for the degradation). Unknown or duplicate
keys and invalid values raise ConfigError naming the offending line.

Default run directory (via platformdirs):
- Linux: ~/.local/share/ACubeNet/runs
- macOS: ~/Library/Application Support/ACubeNet/runs
- Windows: %LOCALAPPDATA%\\ACubeNet\\ACubeNet\\runs
"""

import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

from platformdirs import user_data_dir
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.core.guardrails import ACubeNetError

logger = logging.getLogger(__name__)

APP_NAME = "ACubeNet"
APP_AUTHOR = "ACubeNet"

# Number of residual blocks in the attention ablation trunk
ABLATION_BLOCKS = 16

SR_SCALES = (2, 3, 4)

Task = Literal["super_resolution", "denoise", "deblock"]
AdamVariant = Literal["full", "S", "C", "NW", "off"]
TrunkStyle = Literal["rdag", "ablation_16_resblocks"]
LossName = Literal["auto", "l1", "l2"]
DegradationKind = Literal["bicubic_down", "awgn", "jpeg"]


class ConfigError(ACubeNetError, ValueError):
    """Raised for malformed config files or invalid configuration values."""
    pass


# ============================================================================
# MODEL CONFIG
# ============================================================================

class ModelConfig(BaseModel):
    """
    Full architectural description of one network.

    Defaults reproduce the published setup: 4 RDAGs of 4 RDAUs, 64 trunk
    channels, bottleneck ratio 16, both attention modules on.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    task: Task = Field(default="super_resolution", description="Restoration task")
    scale: int = Field(default=2, description="Upscale factor (super_resolution only)")
    in_channels: Optional[int] = Field(default=None, description="3 for SR (RGB), 1 otherwise")
    out_channels: Optional[int] = Field(default=None, description="Defaults to in_channels")
    trunk_channels: int = Field(default=64, ge=1, description="Feature channels C")
    num_groups: int = Field(default=4, ge=1, description="Number of RDAGs G")
    units_per_group: int = Field(default=4, ge=1, description="RDAUs per RDAG U")
    bottleneck_ratio: int = Field(default=16, ge=1, description="ASAB bottleneck ratio r")
    adam_variant: AdamVariant = Field(default="full", description="ADAM ablation variant")
    aham_enabled: bool = Field(default=True, description="Aggregate group outputs with AHAM")
    trunk_style: TrunkStyle = Field(default="rdag", description="RDAG trunk or 16-block ablation trunk")
    group_tail_conv: bool = Field(
        default=False,
        description="End each RDAG with a 3x3 conv W_SSC (False: W_SSC is the identity)",
    )

    @model_validator(mode="after")
    def _check(self) -> "ModelConfig":
        if self.task == "super_resolution":
            if self.scale not in SR_SCALES:
                raise ValueError(f"super_resolution scale must be one of {SR_SCALES}, got {self.scale}")
        default_channels = 3 if self.task == "super_resolution" else 1
        if self.in_channels is None:
            object.__setattr__(self, "in_channels", default_channels)
        if self.out_channels is None:
            object.__setattr__(self, "out_channels", self.in_channels)
        if self.in_channels < 1 or self.out_channels < 1:
            raise ValueError("in_channels and out_channels must be >= 1")
        return self

    @property
    def upscale(self) -> int:
        """Spatial factor between input and output (1 for denoise/deblock)."""
        return self.scale if self.task == "super_resolution" else 1

    @property
    def bottleneck_channels(self) -> int:
        """ASAB bottleneck width ceil(C / r)."""
        return -(-self.trunk_channels // self.bottleneck_ratio)


# ============================================================================
# DEGRADATION SPEC
# ============================================================================

class DegradationSpec(BaseModel):
    """
    How a high-quality image is turned into its low-quality counterpart.

    Attributes:
        kind: bicubic_down(scale) | awgn(sigma on the 0-255 scale) | jpeg(quality).
        seed: Seed for the stochastic kinds.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: DegradationKind = Field(..., description="Degradation family")
    scale: int = Field(default=2, description="Downscale factor for bicubic_down")
    sigma: float = Field(default=30.0, description="AWGN standard deviation (0-255 scale)")
    quality: int = Field(default=10, description="JPEG quality factor")
    seed: int = Field(default=0, ge=0, description="Seed for stochastic kinds")

    @model_validator(mode="after")
    def _check(self) -> "DegradationSpec":
        if self.kind == "bicubic_down" and self.scale not in SR_SCALES:
            raise ValueError(f"bicubic_down scale must be one of {SR_SCALES}, got {self.scale}")
        if self.kind == "awgn" and not self.sigma > 0:
            raise ValueError(f"awgn sigma must be > 0, got {self.sigma}")
        if self.kind == "jpeg" and not 1 <= self.quality <= 100:
            raise ValueError(f"jpeg quality must be in [1, 100], got {self.quality}")
        return self

    @property
    def lq_scale(self) -> int:
        """HQ extent / LQ extent."""
        return self.scale if self.kind == "bicubic_down" else 1

    def describe(self) -> str:
        if self.kind == "bicubic_down":
            return f"bicubic_down(x{self.scale})"
        if self.kind == "awgn":
            return f"awgn(sigma={self.sigma:g})"
        return f"jpeg(q={self.quality})"

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "DegradationSpec":
        """
        Parse the CLI form "bicubic_down:2", "awgn:30" or "jpeg:10".

        Raises:
            ConfigError: On an unknown kind or a malformed value.
        """
        kind, _, value = text.partition(":")
        try:
            if kind == "bicubic_down":
                return cls(kind=kind, scale=int(value), seed=seed)
            if kind == "awgn":
                return cls(kind=kind, sigma=float(value), seed=seed)
            if kind == "jpeg":
                return cls(kind=kind, quality=int(value), seed=seed)
        except (ValueError, ValidationError) as e:
            raise ConfigError(f"Invalid degradation spec '{text}': {e}") from e
        raise ConfigError(f"Unknown degradation kind in '{text}' (expected bicubic_down|awgn|jpeg)")


# ============================================================================
# PATCH SAMPLER CONFIG
# ============================================================================

class PatchSamplerConfig(BaseModel):
    """How training pairs are cut from HQ images (sizes are LQ-side)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    patch_size: int = Field(default=48, ge=1, description="LQ patch extent")
    batch_size: int = Field(default=16, ge=1, description="Pairs per batch")
    augment: bool = Field(default=True, description="Random dihedral transform per pair")
    degrade_online: bool = Field(
        default=True,
        description="Degrade each HQ patch when cut (False: degrade whole images once)",
    )
    seed: int = Field(default=0, ge=0, description="Seed of the SAMPLE and NOISE streams")


# ============================================================================
# TRAIN CONFIG
# ============================================================================

class TrainConfig(BaseModel):
    """
    Everything a training run needs.

    Defaults reproduce the published optimizer and schedule; max_iters
    defaults to a desk-scale 20,000-iteration smoke profile (the total
    training length of the published runs is not stated).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    model: ModelConfig = Field(default_factory=ModelConfig, description="Network description")
    initial_lr: float = Field(default=2e-4, gt=0, description="Learning rate at iteration 0")
    halve_every: int = Field(default=200_000, ge=1, description="Iterations between LR halvings")
    max_iters: int = Field(default=20_000, ge=0, description="Total iterations")
    batch_size: int = Field(default=16, ge=1, description="Patches per mini-batch")
    patch_size: int = Field(default=48, ge=1, description="LQ-side patch extent")
    seed: int = Field(default=0, ge=0, description="Seed for init, sampling and noise")
    loss: LossName = Field(default="auto", description="auto: l1 for SR, l2 otherwise")
    sigma: float = Field(default=30.0, gt=0, description="AWGN level for denoise (0-255)")
    quality: int = Field(default=10, ge=1, le=100, description="JPEG quality for deblock")
    augment: bool = Field(default=True, description="Random dihedral augmentation per patch")
    degrade_online: bool = Field(default=True, description="Degrade each patch when sampled")
    beta1: float = Field(default=0.9, ge=0, lt=1, description="Optimizer first-moment decay")
    beta2: float = Field(default=0.999, ge=0, lt=1, description="Optimizer second-moment decay")
    epsilon: float = Field(default=1e-8, gt=0, description="Optimizer denominator epsilon")
    log_every: int = Field(default=100, ge=1, description="Iterations between progress lines")
    val_every: int = Field(default=0, ge=0, description="Iterations between validation PSNR (0=off)")
    checkpoint_every: int = Field(default=0, ge=0, description="Iterations between checkpoints (0=end only)")

    @property
    def loss_name(self) -> str:
        if self.loss != "auto":
            return self.loss
        return "l1" if self.model.task == "super_resolution" else "l2"

    @property
    def degradation(self) -> DegradationSpec:
        return degradation_for(self.model, sigma=self.sigma, quality=self.quality, seed=self.seed)

    @property
    def sampler(self) -> PatchSamplerConfig:
        return PatchSamplerConfig(patch_size=self.patch_size, batch_size=self.batch_size,
                                  augment=self.augment, degrade_online=self.degrade_online,
                                  seed=self.seed)


def degradation_for(model: ModelConfig, sigma: float = 30.0, quality: int = 10,
                    seed: int = 0) -> DegradationSpec:
    """The degradation that matches a model's task."""
    if model.task == "super_resolution":
        return DegradationSpec(kind="bicubic_down", scale=model.scale, seed=seed)
    if model.task == "denoise":
        return DegradationSpec(kind="awgn", sigma=sigma, seed=seed)
    return DegradationSpec(kind="jpeg", quality=quality, seed=seed)


# ============================================================================
# KEY=VALUE FILES
# ============================================================================

_MODEL_KEYS = tuple(ModelConfig.model_fields)
_TRAIN_KEYS = tuple(k for k in TrainConfig.model_fields if k != "model")


def parse_config_text(text: str, source: str = "<config>") -> TrainConfig:
    """
    Parse key=value text into a TrainConfig.

    Args:
        text: Config file contents.
        source: Name used in error messages.

    Raises:
        ConfigError: On malformed lines, unknown/duplicate keys or invalid values.
    """
    model_values: Dict[str, str] = {}
    train_values: Dict[str, str] = {}
    seen: Dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}' (first on line {seen[key]})")
        seen[key] = lineno

        if key in _MODEL_KEYS:
            model_values[key] = value
        elif key in _TRAIN_KEYS:
            train_values[key] = value
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")

    try:
        model = ModelConfig(**model_values)
        return TrainConfig(model=model, **train_values)
    except ValidationError as e:
        raise ConfigError(f"{source}: invalid configuration: {_summarize(e)}") from e
    except ValueError as e:
        raise ConfigError(f"{source}: invalid configuration: {e}") from e


def load_config_file(path: Union[str, Path]) -> TrainConfig:
    """
    Load a key=value config file.

    Raises:
        FileNotFoundError: If the file is missing.
        ConfigError: If the contents are invalid.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")
    cfg = parse_config_text(path.read_text(encoding="utf-8"), source=str(path))
    logger.info(f"Loaded config {path.name}: task={cfg.model.task} G={cfg.model.num_groups} "
                f"U={cfg.model.units_per_group} C={cfg.model.trunk_channels}")
    return cfg


def dump_config(cfg: TrainConfig) -> str:
    """
    Serialize a TrainConfig to key=value text (parse_config_text inverse).

    Every field is written explicitly so the echo is self-contained.
    """
    lines = []
    for key in _MODEL_KEYS:
        lines.append(f"{key}={_format_value(getattr(cfg.model, key))}")
    for key in _TRAIN_KEYS:
        lines.append(f"{key}={_format_value(getattr(cfg, key))}")
    return "\n".join(lines) + "\n"


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _summarize(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(p) for p in item.get("loc", ())) or "config"
        parts.append(f"{where}: {item.get('msg')}")
    return "; ".join(parts)


def with_overrides(cfg: TrainConfig, **overrides: Any) -> TrainConfig:
    """
    Copy a TrainConfig with train- or model-level fields replaced.

    Example:
        >>> with_overrides(cfg, max_iters=10, trunk_channels=8)
    """
    model_updates = {k: v for k, v in overrides.items() if k in _MODEL_KEYS}
    train_updates = {k: v for k, v in overrides.items() if k in _TRAIN_KEYS}
    unknown = set(overrides) - set(model_updates) - set(train_updates)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(sorted(unknown))}")
    try:
        model = ModelConfig(**{**cfg.model.model_dump(), **model_updates})
        return TrainConfig(**{**cfg.model_dump(exclude={"model"}), **train_updates}, model=model)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {_summarize(e)}") from e


def default_runs_dir() -> Path:
    """OS-standard directory for run outputs (created on demand)."""
    runs = Path(user_data_dir(APP_NAME, APP_AUTHOR)) / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    return runs


def resolve_output(path: Union[str, Path]) -> Path:
    """
    Resolve a CLI output path; a bare file name lands in default_runs_dir().
    """
    path = Path(path).expanduser()
    if path.parent == Path(".") and not path.is_absolute() and not str(path).startswith("."):
        return default_runs_dir() / path
    return path


__all__ = [
    "ABLATION_BLOCKS",
    "ConfigError",
    "ModelConfig",
    "DegradationSpec",
    "PatchSamplerConfig",
    "TrainConfig",
    "degradation_for",
    "parse_config_text",
    "load_config_file",
    "dump_config",
    "with_overrides",
    "default_runs_dir",
    "resolve_output",
]
