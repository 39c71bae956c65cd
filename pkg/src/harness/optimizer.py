"""
Adaptive moment estimation (the optimizer, unrelated to the ADAM
attention module) with bias correction:

    m_t = b1 m_{t-1} + (1 - b1) g
    v_t = b2 v_{t-1} + (1 - b2) g^2
    p  -= lr * (m_t / (1 - b1^t)) / (sqrt(v_t / (1 - b2^t)) + eps)

Updates are applied in place to Parameter data.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from src.core.guardrails import ACubeNetError, check_finite
from src.tensor import Parameter

logger = logging.getLogger(__name__)


class OptimizerError(ACubeNetError, ValueError):
    """Raised for invalid learning rates, missing gradients or mismatched state."""
    pass


@dataclass
class OptimizerState:
    """
    Per-parameter moments keyed by parameter name, plus the step counter.
    """
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_parameters(cls, params: Sequence[Parameter], beta1: float = 0.9,
                       beta2: float = 0.999, epsilon: float = 1e-8) -> "OptimizerState":
        state = cls(beta1=beta1, beta2=beta2, epsilon=epsilon)
        for p in params:
            state.m[p.name] = np.zeros_like(p.data)
            state.v[p.name] = np.zeros_like(p.data)
        return state


def optimizer_step(params: Sequence[Parameter], grads: Optional[Sequence[np.ndarray]],
                   state: OptimizerState, lr: float) -> None:
    """
    Apply one bias-corrected update to every parameter.

    Args:
        params: Parameters to update in place.
        grads: Gradients aligned with params; None uses each p.grad.
        state: Moments and step counter (updated in place).
        lr: Learning rate (> 0).

    Raises:
        OptimizerError: If lr <= 0, a gradient is missing or a moment shape differs.
    """
    if not lr > 0:
        raise OptimizerError(f"Learning rate must be > 0, got {lr}")
    if grads is None:
        grads = [p.grad for p in params]
    if len(grads) != len(params):
        raise OptimizerError(f"{len(grads)} gradients for {len(params)} parameters")

    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t

    for p, g in zip(params, grads):
        if g is None:
            raise OptimizerError(f"Parameter {p.name} has no gradient")
        check_finite(f"gradient of {p.name}", g)
        m = state.m.setdefault(p.name, np.zeros_like(p.data))
        v = state.v.setdefault(p.name, np.zeros_like(p.data))
        if m.shape != p.data.shape or g.shape != p.data.shape:
            raise OptimizerError(f"Shape mismatch for {p.name}: param {p.data.shape}, "
                                 f"grad {g.shape}, moment {m.shape}")

        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)

        p.data -= lr * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)


__all__ = ["OptimizerError", "OptimizerState", "optimizer_step"]
