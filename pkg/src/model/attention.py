"""
Attention mechanisms for A-CubeNet.

- ASAB (adaptive spatial attention branch): softmax over the H*W positions
  of a 1-channel squeeze map pools every channel into a [B, C, 1, 1]
  descriptor, refined by a 1x1 bottleneck and scaled by alpha.
- ACAB (adaptive channel attention branch): softmax over the C channel
  means mixes the channels into a [B, 1, H, W] map, refined by two 3x3
  single-filter convs and scaled by beta.
- ADAM: x + ASAB(x) + ACAB(x), broadcasting the two branch outputs over
  their degenerate axes.
- AHAM (adaptive hierarchical attention module): softmax over one squeezed
  scalar per group output yields a weighted sum of the G maps, added to the
  last map after scaling by gamma.

alpha, beta and gamma start at exactly 0, so every module is the identity
at initialization.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np

from src.tensor import (
    Conv2dLayer,
    Parameter,
    ShapeError,
    Tensor,
    concat,
    global_avg_pool,
    narrow,
    reduce_sum,
    relu,
    scalar_parameter,
    softmax,
)

logger = logging.getLogger(__name__)

DEFAULT_BOTTLENECK_RATIO = 16
ADAM_VARIANTS = ("full", "S", "C", "NW", "off")

AttentionKind = Literal["spatial", "channel", "hierarchical"]


# ============================================================================
# PARAMETER RECORDS
# ============================================================================

@dataclass
class AsabParams:
    """
    Spatial branch weights.

    Attributes:
        squeeze: W_k, C -> 1, 1x1.
        bottleneck_down: W_s1, C -> ceil(C/r), 1x1.
        bottleneck_up: W_s2, ceil(C/r) -> C, 1x1.
        alpha: Adaptive weight; None means a fixed weight of 1.
    """
    squeeze: Conv2dLayer
    bottleneck_down: Conv2dLayer
    bottleneck_up: Conv2dLayer
    alpha: Optional[Parameter]

    @property
    def channels(self) -> int:
        return self.squeeze.in_channels

    def parameters(self) -> List[Parameter]:
        params = (self.squeeze.parameters() + self.bottleneck_down.parameters()
                  + self.bottleneck_up.parameters())
        return params if self.alpha is None else params + [self.alpha]


@dataclass
class AcabParams:
    """
    Channel branch weights.

    Attributes:
        transform_1: W_c1, 1 -> 1, 3x3.
        transform_2: W_c2, 1 -> 1, 3x3.
        beta: Adaptive weight; None means a fixed weight of 1.
    """
    transform_1: Conv2dLayer
    transform_2: Conv2dLayer
    beta: Optional[Parameter]

    def parameters(self) -> List[Parameter]:
        params = self.transform_1.parameters() + self.transform_2.parameters()
        return params if self.beta is None else params + [self.beta]


@dataclass
class AdamBlockParams:
    """One ADAM: the branches present depend on the variant."""
    variant: str
    asab: Optional[AsabParams] = None
    acab: Optional[AcabParams] = None

    def parameters(self) -> List[Parameter]:
        params: List[Parameter] = []
        if self.asab is not None:
            params += self.asab.parameters()
        if self.acab is not None:
            params += self.acab.parameters()
        return params


@dataclass
class AhamParams:
    """One C -> 1 squeezer per aggregated map (unshared) plus gamma."""
    squeezers: List[Conv2dLayer]
    gamma: Parameter

    def parameters(self) -> List[Parameter]:
        params: List[Parameter] = []
        for squeezer in self.squeezers:
            params += squeezer.parameters()
        return params + [self.gamma]


# ============================================================================
# BUILDERS
# ============================================================================

def bottleneck_width(channels: int, ratio: int = DEFAULT_BOTTLENECK_RATIO) -> int:
    """ceil(C / r); never zero for C >= 1."""
    if channels < 1 or ratio < 1:
        raise ShapeError(f"bottleneck needs channels >= 1 and ratio >= 1, got {channels}, {ratio}")
    return -(-channels // ratio)


def build_asab(name: str, channels: int, ratio: int = DEFAULT_BOTTLENECK_RATIO,
               rng: Optional[np.random.Generator] = None, adaptive: bool = True) -> AsabParams:
    width = bottleneck_width(channels, ratio)
    return AsabParams(
        squeeze=Conv2dLayer(f"{name}.squeeze", channels, 1, 1, rng),
        bottleneck_down=Conv2dLayer(f"{name}.bottleneck_down", channels, width, 1, rng),
        bottleneck_up=Conv2dLayer(f"{name}.bottleneck_up", width, channels, 1, rng),
        alpha=scalar_parameter(f"{name}.alpha") if adaptive else None,
    )


def build_acab(name: str, rng: Optional[np.random.Generator] = None,
               adaptive: bool = True) -> AcabParams:
    return AcabParams(
        transform_1=Conv2dLayer(f"{name}.transform_1", 1, 1, 3, rng),
        transform_2=Conv2dLayer(f"{name}.transform_2", 1, 1, 3, rng),
        beta=scalar_parameter(f"{name}.beta") if adaptive else None,
    )


def build_adam(name: str, channels: int, variant: str = "full",
               ratio: int = DEFAULT_BOTTLENECK_RATIO,
               rng: Optional[np.random.Generator] = None) -> AdamBlockParams:
    """
    Build one ADAM for an ablation variant.

    Variants:
        full: both branches, adaptive alpha and beta.
        S: spatial branch only.
        C: channel branch only.
        NW: both branches, alpha = beta = 1 fixed (not trainable).
        off: no branches; adam_forward is the identity.
    """
    if variant not in ADAM_VARIANTS:
        raise ValueError(f"Unknown ADAM variant '{variant}', expected one of {ADAM_VARIANTS}")
    adaptive = variant != "NW"
    asab = build_asab(f"{name}.asab", channels, ratio, rng, adaptive) if variant in ("full", "S", "NW") else None
    acab = build_acab(f"{name}.acab", rng, adaptive) if variant in ("full", "C", "NW") else None
    return AdamBlockParams(variant=variant, asab=asab, acab=acab)


def build_aham(name: str, channels: int, num_maps: int,
               rng: Optional[np.random.Generator] = None) -> AhamParams:
    if num_maps < 1:
        raise ShapeError(f"{name}: AHAM needs at least one map, got {num_maps}")
    return AhamParams(
        squeezers=[Conv2dLayer(f"{name}.squeezers.{g}", channels, 1, 1, rng) for g in range(num_maps)],
        gamma=scalar_parameter(f"{name}.gamma"),
    )


# ============================================================================
# PROBE
# ============================================================================

@dataclass
class AttentionRecord:
    """Softmax weights captured from one forward call."""
    kind: AttentionKind
    block: str
    weights: np.ndarray
    scale: float = 1.0  # alpha, beta or gamma at capture time


@dataclass
class AttentionProbe:
    """
    Collects attention weights during a forward pass for inspection.

    Pass one to model_forward(..., probe=probe); each ASAB, ACAB and AHAM
    call appends a record with a copy of its softmax weights.
    """
    records: List[AttentionRecord] = field(default_factory=list)

    def record(self, kind: AttentionKind, block: str, weights: np.ndarray,
               scale: Optional[Parameter] = None) -> None:
        value = 1.0 if scale is None else scale.item()
        self.records.append(AttentionRecord(kind=kind, block=block, weights=weights.copy(), scale=value))

    def by_kind(self, kind: AttentionKind) -> List[AttentionRecord]:
        return [r for r in self.records if r.kind == kind]


# ============================================================================
# FORWARD PASSES
# ============================================================================

def _check_channels(op: str, x: Tensor, channels: int) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{op} expects [B, C, H, W], got shape {x.shape}")
    if x.shape[1] != channels:
        raise ShapeError(f"{op}: input has {x.shape[1]} channels, block expects {channels}")


def _scaled(y: Tensor, weight: Optional[Parameter]) -> Tensor:
    return y if weight is None else weight * y


def asab_forward(x: Tensor, p: AsabParams, probe: Optional[AttentionProbe] = None,
                 block: str = "asab") -> Tensor:
    """
    Spatial branch: [B, C, H, W] -> [B, C, 1, 1].

    Raises:
        ShapeError: If x's channel extent differs from the block's.
    """
    _check_channels("asab_forward", x, p.channels)
    weights = softmax(p.squeeze(x), axis=(2, 3))            # [B, 1, H, W]
    if probe is not None:
        probe.record("spatial", block, weights.data, p.alpha)
    descriptor = reduce_sum(x * weights, axis=(2, 3))      # [B, C, 1, 1]
    refined = p.bottleneck_up(relu(p.bottleneck_down(descriptor)))
    return _scaled(refined, p.alpha)


def acab_forward(x: Tensor, p: AcabParams, probe: Optional[AttentionProbe] = None,
                 block: str = "acab") -> Tensor:
    """
    Channel branch: [B, C, H, W] -> [B, 1, H, W].

    Raises:
        ShapeError: If x is not 4-D.
    """
    if x.ndim != 4:
        raise ShapeError(f"acab_forward expects [B, C, H, W], got shape {x.shape}")
    weights = softmax(global_avg_pool(x), axis=1)          # [B, C, 1, 1]
    if probe is not None:
        probe.record("channel", block, weights.data, p.beta)
    descriptor = reduce_sum(x * weights, axis=1)           # [B, 1, H, W]
    refined = p.transform_2(relu(p.transform_1(descriptor)))
    return _scaled(refined, p.beta)


def adam_forward(x: Tensor, p: AdamBlockParams, probe: Optional[AttentionProbe] = None,
                 block: str = "adam") -> Tensor:
    """x + ASAB(x) + ACAB(x); absent branches contribute nothing."""
    out = x
    if p.asab is not None:
        out = out + asab_forward(x, p.asab, probe, f"{block}.asab")
    if p.acab is not None:
        out = out + acab_forward(x, p.acab, probe, f"{block}.acab")
    return out


def aham_forward(feats: List[Tensor], p: AhamParams, probe: Optional[AttentionProbe] = None,
                 block: str = "aham") -> Tensor:
    """
    Hierarchical aggregation: F_G + gamma * sum_g softmax_g(W_g(pool(F_g))) * F_g.

    Raises:
        ShapeError: On an empty list, a length that differs from the number
            of squeezers, or maps of differing shape.
    """
    if not feats:
        raise ShapeError("aham_forward needs at least one feature map")
    if len(feats) != len(p.squeezers):
        raise ShapeError(f"aham_forward got {len(feats)} maps for {len(p.squeezers)} squeezers")
    shape = feats[0].shape
    for g, f in enumerate(feats):
        if f.shape != shape:
            raise ShapeError(f"aham_forward map {g} has shape {f.shape}, expected {shape}")

    scores = concat([sq(global_avg_pool(f)) for sq, f in zip(p.squeezers, feats)], axis=1)
    weights = softmax(scores, axis=1)                       # [B, G, 1, 1]
    if probe is not None:
        probe.record("hierarchical", block, weights.data, p.gamma)

    mixed = narrow(weights, 0, axis=1) * feats[0]
    for g in range(1, len(feats)):
        mixed = mixed + narrow(weights, g, axis=1) * feats[g]
    return feats[-1] + p.gamma * mixed


__all__ = [
    "ADAM_VARIANTS",
    "DEFAULT_BOTTLENECK_RATIO",
    "AsabParams",
    "AcabParams",
    "AdamBlockParams",
    "AhamParams",
    "AttentionProbe",
    "AttentionRecord",
    "bottleneck_width",
    "build_asab",
    "build_acab",
    "build_adam",
    "build_aham",
    "asab_forward",
    "acab_forward",
    "adam_forward",
    "aham_forward",
]
