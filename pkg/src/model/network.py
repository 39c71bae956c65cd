"""
A-CubeNet network assembly.

    F_0  = head(I_LQ)                                   shallow features
    F_g  = F_{g-1} + W_SSC(RDAU_U(...RDAU_1(F_{g-1})))  g = 1..G
    F_DF = F_0 + W_LSC(AHAM([F_1 .. F_G]))              deep features
    out  = tail(upscale(F_DF))                          reconstruction

An RDAU is a residual block (conv3x3, ReLU, conv3x3, skip-add) followed by
an ADAM. When group_tail_conv is off, W_SSC is the identity.

The ablation trunk (trunk_style=ablation_16_resblocks) replaces the RDAGs
with 16 plain sequential units and aggregates their outputs (optionally
with AHAM) before the same fuse conv and long skip.

Parameter naming is a dotted path: "head.weight",
"groups.1.units.3.adam.asab.alpha", "aham.gamma", "upscale.0.bias", ...
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.core.rng import Stream, stream
from src.core.settings import ABLATION_BLOCKS, ModelConfig
from src.model.attention import (
    AdamBlockParams,
    AhamParams,
    AttentionProbe,
    adam_forward,
    aham_forward,
    build_adam,
    build_aham,
)
from src.tensor import Conv2dLayer, Parameter, ShapeError, Tensor, pixel_shuffle, relu

logger = logging.getLogger(__name__)

# Scale -> shuffle factors of the successive upscale stages
UPSCALE_STAGES = {1: (), 2: (2,), 3: (3,), 4: (2, 2)}


# ============================================================================
# RECORDS
# ============================================================================

@dataclass
class ResBlock:
    conv1: Conv2dLayer
    conv2: Conv2dLayer

    def parameters(self) -> List[Parameter]:
        return self.conv1.parameters() + self.conv2.parameters()


@dataclass
class RdauParams:
    """Residual block followed by an ADAM (variant off: no attention)."""
    resblock: ResBlock
    adam: AdamBlockParams

    def parameters(self) -> List[Parameter]:
        return self.resblock.parameters() + self.adam.parameters()


@dataclass
class RdagParams:
    """U stacked RDAUs; tail is W_SSC, or None when it is the identity."""
    units: List[RdauParams]
    tail: Optional[Conv2dLayer] = None

    def parameters(self) -> List[Parameter]:
        params: List[Parameter] = []
        for unit in self.units:
            params += unit.parameters()
        if self.tail is not None:
            params += self.tail.parameters()
        return params


@dataclass
class UpscaleStage:
    conv: Conv2dLayer
    factor: int


@dataclass
class Model:
    """
    A built network.

    Exactly one of `groups` (rdag trunk) and `blocks` (ablation trunk) is
    non-empty.
    """
    config: ModelConfig
    head: Conv2dLayer
    fuse: Conv2dLayer
    tail: Conv2dLayer
    groups: List[RdagParams] = field(default_factory=list)
    blocks: List[RdauParams] = field(default_factory=list)
    aham: Optional[AhamParams] = None
    upscale: List[UpscaleStage] = field(default_factory=list)

    def parameters(self) -> List[Parameter]:
        """All parameters in construction order."""
        params = list(self.head.parameters())
        for group in self.groups:
            params += group.parameters()
        for block in self.blocks:
            params += block.parameters()
        if self.aham is not None:
            params += self.aham.parameters()
        params += self.fuse.parameters()
        for stage in self.upscale:
            params += stage.conv.parameters()
        params += self.tail.parameters()
        return params

    def named_parameters(self) -> Dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()


# ============================================================================
# CONSTRUCTION
# ============================================================================

def _build_unit(name: str, cfg: ModelConfig, rng: np.random.Generator) -> RdauParams:
    c = cfg.trunk_channels
    return RdauParams(
        resblock=ResBlock(
            conv1=Conv2dLayer(f"{name}.resblock.conv1", c, c, 3, rng),
            conv2=Conv2dLayer(f"{name}.resblock.conv2", c, c, 3, rng),
        ),
        adam=build_adam(f"{name}.adam", c, cfg.adam_variant, cfg.bottleneck_ratio, rng),
    )


def build_model(cfg: ModelConfig, seed: int = 0) -> Model:
    """
    Build a network with fan-in scaled uniform weights.

    Every conv weight and bias is drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in))
    from the INIT stream of `seed`, in construction order; alpha, beta and
    gamma start at 0. Same (cfg, seed) gives bit-identical parameters.

    Raises:
        ShapeError: On zero channel counts.
        ValueError: On an unknown ADAM variant or scale.
    """
    if cfg.upscale not in UPSCALE_STAGES:
        raise ValueError(f"Unsupported scale {cfg.upscale}")

    rng = stream(seed, Stream.INIT)
    c = cfg.trunk_channels

    head = Conv2dLayer("head", cfg.in_channels, c, 3, rng)

    groups: List[RdagParams] = []
    blocks: List[RdauParams] = []
    if cfg.trunk_style == "rdag":
        for g in range(cfg.num_groups):
            units = [_build_unit(f"groups.{g}.units.{u}", cfg, rng) for u in range(cfg.units_per_group)]
            tail = Conv2dLayer(f"groups.{g}.tail", c, c, 3, rng) if cfg.group_tail_conv else None
            groups.append(RdagParams(units=units, tail=tail))
        aggregated = cfg.num_groups
    else:
        blocks = [_build_unit(f"blocks.{b}", cfg, rng) for b in range(ABLATION_BLOCKS)]
        aggregated = ABLATION_BLOCKS

    aham = build_aham("aham", c, aggregated, rng) if cfg.aham_enabled else None
    fuse = Conv2dLayer("fuse", c, c, 3, rng)

    upscale = [
        UpscaleStage(conv=Conv2dLayer(f"upscale.{i}", c, c * factor * factor, 3, rng), factor=factor)
        for i, factor in enumerate(UPSCALE_STAGES[cfg.upscale])
    ]
    tail = Conv2dLayer("tail", c, cfg.out_channels, 3, rng)

    model = Model(config=cfg, head=head, fuse=fuse, tail=tail, groups=groups,
                  blocks=blocks, aham=aham, upscale=upscale)

    names = [p.name for p in model.parameters()]
    if len(names) != len(set(names)):
        raise ValueError("Duplicate parameter names in model")

    logger.info(f"Built model: task={cfg.task} x{cfg.upscale} trunk={cfg.trunk_style} "
                f"adam={cfg.adam_variant} aham={cfg.aham_enabled} params={count_params(model):,}")
    return model


# ============================================================================
# FORWARD
# ============================================================================

def resblock_forward(x: Tensor, block: ResBlock) -> Tensor:
    return x + block.conv2(relu(block.conv1(x)))


def rdau_forward(x: Tensor, unit: RdauParams, probe: Optional[AttentionProbe] = None,
                 block: str = "rdau") -> Tensor:
    """adam(resblock(x))."""
    channels = unit.resblock.conv1.in_channels
    if x.ndim != 4 or x.shape[1] != channels:
        raise ShapeError(f"rdau_forward expects [B, {channels}, H, W], got {x.shape}")
    return adam_forward(resblock_forward(x, unit.resblock), unit.adam, probe, f"{block}.adam")


def rdag_forward(x: Tensor, group: RdagParams, probe: Optional[AttentionProbe] = None,
                 block: str = "rdag") -> Tensor:
    """x + W_SSC(RDAU_U(...RDAU_1(x)))."""
    h = x
    for u, unit in enumerate(group.units):
        h = rdau_forward(h, unit, probe, f"{block}.units.{u}")
    if group.tail is not None:
        h = group.tail(h)
    return x + h


def model_forward(m: Model, img: Tensor, probe: Optional[AttentionProbe] = None) -> Tensor:
    """
    Restore one batch: [B, in_channels, H, W] -> [B, out_channels, sH, sW].

    The output is not clamped.

    Raises:
        ShapeError: If img is not 4-D or has the wrong channel count.
    """
    cfg = m.config
    if img.ndim != 4 or img.shape[1] != cfg.in_channels:
        raise ShapeError(f"model expects [B, {cfg.in_channels}, H, W] input, got {img.shape}")

    f0 = m.head(img)
    feats: List[Tensor] = []
    h = f0
    if m.groups:
        for g, group in enumerate(m.groups):
            h = rdag_forward(h, group, probe, f"groups.{g}")
            feats.append(h)
    else:
        for b, unit in enumerate(m.blocks):
            h = rdau_forward(h, unit, probe, f"blocks.{b}")
            feats.append(h)

    deep = aham_forward(feats, m.aham, probe) if m.aham is not None else feats[-1]
    h = f0 + m.fuse(deep)

    for stage in m.upscale:
        h = pixel_shuffle(stage.conv(h), stage.factor)
    return m.tail(h)


# ============================================================================
# COUNTING
# ============================================================================

def count_params(m: Model) -> int:
    """
    Number of trainable scalars.

    Every unique Parameter counts its element total: biases included,
    alpha, beta and gamma one each, fixed weights (variant NW) none.
    """
    seen = {}
    for p in m.parameters():
        seen[id(p)] = p.size
    return int(sum(seen.values()))


def format_param_count(count: int) -> str:
    """
    Nearest thousand: 1369859 -> '1370K'.

    The published ablation counts 1370K / 1380K / 1371K are not one
    rounding rule applied to 1,369,859 / 1,380,531 / 1,370,900 (round gives
    1381K for +ADAM, floor gives 1369K for the baseline), so the ablation
    table prints the exact count, this rounding and the published value side
    by side.
    """
    return f"{round(count / 1000)}K"


__all__ = [
    "Model",
    "ResBlock",
    "RdauParams",
    "RdagParams",
    "UpscaleStage",
    "UPSCALE_STAGES",
    "build_model",
    "resblock_forward",
    "rdau_forward",
    "rdag_forward",
    "model_forward",
    "count_params",
    "format_param_count",
]
