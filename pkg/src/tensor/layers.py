"""
Parameterised layers for A-CubeNet.

Conv2dLayer owns a weight Parameter [out, in, k, k] and a bias Parameter
[out]. Initialization is fan-in scaled uniform: every weight and bias
entry is drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)) with
fan_in = in_channels * k * k, using the generator passed by the caller.
"""

import math
from typing import List, Optional

import numpy as np

from src.tensor.functional import conv2d
from src.tensor.tensor import Parameter, ShapeError, Tensor

SUPPORTED_KERNELS = (1, 3)


class Conv2dLayer:
    """
    Stride-1, same-padded 2-D convolution with bias.

    Attributes:
        weight: Parameter [out_channels, in_channels, k, k].
        bias: Parameter [out_channels] (None only when built with bias=False).
    """

    def __init__(self, name: str, in_channels: int, out_channels: int, kernel_size: int,
                 rng: Optional[np.random.Generator] = None, bias: bool = True):
        """
        Create a layer with fan-in uniform initialization.

        Args:
            name: Dotted prefix; parameters are "<name>.weight" and "<name>.bias".
            in_channels: Input channel count (>= 1).
            out_channels: Output channel count (>= 1).
            kernel_size: 1 or 3.
            rng: Generator for initialization; None leaves all values at 0.
            bias: Whether the layer carries a bias.

        Raises:
            ShapeError: On zero channels or an unsupported kernel size.
        """
        if in_channels < 1 or out_channels < 1:
            raise ShapeError(f"{name}: channel counts must be >= 1, got {in_channels}->{out_channels}")
        if kernel_size not in SUPPORTED_KERNELS:
            raise ShapeError(f"{name}: kernel size must be one of {SUPPORTED_KERNELS}, got {kernel_size}")

        self.name = name
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size

        shape = (out_channels, in_channels, kernel_size, kernel_size)
        fan_in = in_channels * kernel_size * kernel_size
        bound = 1.0 / math.sqrt(fan_in)

        if rng is None:
            weight = np.zeros(shape)
            bias_values = np.zeros(out_channels)
        else:
            weight = rng.uniform(-bound, bound, size=shape)
            bias_values = rng.uniform(-bound, bound, size=out_channels)

        self.weight = Parameter(f"{name}.weight", weight)
        self.bias: Optional[Parameter] = Parameter(f"{name}.bias", bias_values) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias)

    def parameters(self) -> List[Parameter]:
        return [self.weight] if self.bias is None else [self.weight, self.bias]

    @property
    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def __repr__(self) -> str:
        k = self.kernel_size
        return f"Conv2dLayer({self.name}: {self.in_channels}->{self.out_channels}, {k}x{k})"


def scalar_parameter(name: str, value: float = 0.0) -> Parameter:
    """A [1, 1, 1, 1] trainable scalar (the adaptive weights alpha, beta, gamma)."""
    return Parameter(name, np.full((1, 1, 1, 1), value))


__all__ = ["Conv2dLayer", "scalar_parameter", "SUPPORTED_KERNELS"]
