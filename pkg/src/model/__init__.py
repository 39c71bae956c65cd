"""
A-CubeNet model: attention modules, network assembly and losses.
"""

from src.model.attention import (
    AsabParams,
    AcabParams,
    AdamBlockParams,
    AhamParams,
    AttentionProbe,
    asab_forward,
    acab_forward,
    adam_forward,
    aham_forward,
)
from src.model.network import (
    Model,
    build_model,
    rdau_forward,
    rdag_forward,
    model_forward,
    count_params,
    format_param_count,
)
from src.model.losses import l1_loss, l2_loss, get_loss

__all__ = [
    "AsabParams",
    "AcabParams",
    "AdamBlockParams",
    "AhamParams",
    "AttentionProbe",
    "asab_forward",
    "acab_forward",
    "adam_forward",
    "aham_forward",
    "Model",
    "build_model",
    "rdau_forward",
    "rdag_forward",
    "model_forward",
    "count_params",
    "format_param_count",
    "l1_loss",
    "l2_loss",
    "get_loss",
]
