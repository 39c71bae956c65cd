"""
Model diagnostics behind the `params`, `ablation`, `gradcheck` and
`attention` commands.

- ablation_rows: parameter counts of the attention ablation variants and
  of the default super-resolution models, next to the published counts.
- model_gradcheck: finite-difference check of every parameter of a small
  model on an 8x8 input.
- attention_report: the learned adaptive weights (alpha, beta, gamma) and
  the hierarchical group weights of one forward pass.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.core.rng import Stream, stream
from src.core.settings import ModelConfig
from src.imaging.image_io import ImageBuffer
from src.model.attention import AdamBlockParams, AttentionProbe
from src.model.losses import l2_loss
from src.model.network import Model, build_model, count_params, format_param_count, model_forward
from src.tensor import Tensor, finite_diff_check_all, no_grad

logger = logging.getLogger(__name__)


# ============================================================================
# PARAMETER COUNTS
# ============================================================================

@dataclass
class AblationRow:
    label: str
    config: ModelConfig
    published: Optional[int] = None  # thousands

    @property
    def count(self) -> int:
        return count_params(build_model(self.config))

    def deviation(self, count: int) -> Optional[float]:
        """Relative difference to the published count, in percent."""
        if self.published is None:
            return None
        return 100.0 * (count - self.published * 1000) / (self.published * 1000)


def _ablation(adam_variant: str, aham_enabled: bool) -> ModelConfig:
    return ModelConfig(task="super_resolution", scale=2, trunk_style="ablation_16_resblocks",
                       adam_variant=adam_variant, aham_enabled=aham_enabled)


def ablation_rows() -> List[AblationRow]:
    """Ablation variants (x2, 16-block trunk) followed by the default x2/x3/x4 models."""
    return [
        AblationRow("Baseline", _ablation("off", False), 1370),
        AblationRow("+ADAM", _ablation("full", False), 1380),
        AblationRow("+ADAM-C", _ablation("C", False)),
        AblationRow("+ADAM-S", _ablation("S", False)),
        AblationRow("+ADAM-NW", _ablation("NW", False)),
        AblationRow("+AHAM", _ablation("off", True), 1371),
        AblationRow("A-CubeNet x2", ModelConfig(scale=2), 1376),
        AblationRow("A-CubeNet x3", ModelConfig(scale=3), 1561),
        AblationRow("A-CubeNet x4", ModelConfig(scale=4), 1524),
    ]


def ablation_table() -> List[str]:
    """Tab-separated lines: label, exact count, K-rounding, published, deviation."""
    lines = ["model\tparams\trounded\tpublished\tdeviation"]
    for row in ablation_rows():
        count = row.count
        deviation = row.deviation(count)
        lines.append("\t".join([
            row.label,
            str(count),
            format_param_count(count),
            f"{row.published}K" if row.published is not None else "-",
            f"{deviation:+.2f}%" if deviation is not None else "-",
        ]))
    return lines


# ============================================================================
# GRADIENT CHECK
# ============================================================================

# Biases feeding a ReLU are lifted to 1 so no pre-activation sits at the kink
RELU_FED_BIASES = (".resblock.conv1.bias", ".asab.bottleneck_down.bias", ".acab.transform_1.bias")
ADAPTIVE_WEIGHTS = (".alpha", ".beta", ".gamma")

# Loss stays near 1e-4; the ASAB squeeze bias has an exactly zero gradient, so
# its central difference is rounding noise that must stay under the 1e-8 floor
TARGET_OFFSET = 0.01


def prepare_gradcheck(cfg: ModelConfig, seed: int = 0, size: int = 8) -> Tuple[Model, Tensor]:
    """
    Build a model with small weights and non-zero adaptive scalars, plus
    a [1, in_channels, size, size] input, all drawn from the EVAL stream.
    """
    model = build_model(cfg, seed)
    rng = stream(seed, Stream.EVAL)
    for p in model.parameters():
        if p.name.endswith(ADAPTIVE_WEIGHTS):
            p.assign(0.5 + rng.uniform(-0.1, 0.1, size=p.shape))
        elif p.name.endswith(RELU_FED_BIASES):
            p.assign(np.ones(p.shape))
        elif p.name.endswith(".weight"):
            p.assign(rng.uniform(-0.05, 0.05, size=p.shape))
        else:
            p.assign(rng.uniform(-0.1, 0.1, size=p.shape))
    x = Tensor(rng.uniform(0.0, 1.0, size=(1, cfg.in_channels, size, size)))
    return model, x


def model_gradcheck(cfg: ModelConfig, seed: int = 0, size: int = 8,
                    step: float = 1e-5) -> Dict[str, float]:
    """
    Max relative finite-difference error per parameter of the L2 loss
    against a target offset by TARGET_OFFSET from the initial prediction.
    """
    model, x = prepare_gradcheck(cfg, seed, size)
    with no_grad():
        target = Tensor(model_forward(model, x).data + TARGET_OFFSET)

    def loss() -> Tensor:
        return l2_loss(model_forward(model, x), target)

    errors = finite_diff_check_all(loss, model.parameters(), step)
    worst = max(errors, key=errors.get)
    logger.info(f"gradcheck over {len(errors)} parameters: max rel err {errors[worst]:.3e} ({worst})")
    return errors


# ============================================================================
# ATTENTION INTROSPECTION
# ============================================================================

def _adaptive(adam: AdamBlockParams) -> str:
    parts = []
    for label, branch, attr in (("alpha", adam.asab, "alpha"), ("beta", adam.acab, "beta")):
        if branch is None:
            continue
        weight = getattr(branch, attr)
        parts.append(f"{label}=fixed" if weight is None else f"{label}={weight.item():.6f}")
    return " ".join(parts) if parts else "no attention"


def attention_report(model: Model, img: ImageBuffer) -> List[str]:
    """
    Describe how much attention a trained model uses on one input.

    Returns:
        Lines: gamma and the per-group hierarchical weight (when AHAM is
        on), then alpha/beta of every unit.
    """
    probe = AttentionProbe()
    with no_grad():
        model_forward(model, img.to_tensor(), probe)

    lines = []
    hierarchical = probe.by_kind("hierarchical")
    if hierarchical:
        record = hierarchical[0]
        lines.append(f"aham gamma={record.scale:.6f}")
        for g, weight in enumerate(record.weights[0, :, 0, 0]):
            lines.append(f"  map {g}: omega_h={weight:.6f}")

    if model.groups:
        for g, group in enumerate(model.groups):
            for u, unit in enumerate(group.units):
                lines.append(f"groups.{g}.units.{u}: {_adaptive(unit.adam)}")
    else:
        for b, unit in enumerate(model.blocks):
            lines.append(f"blocks.{b}: {_adaptive(unit.adam)}")
    return lines


__all__ = [
    "AblationRow",
    "ablation_rows",
    "ablation_table",
    "prepare_gradcheck",
    "model_gradcheck",
    "attention_report",
]
