"""
Tensor core for A-CubeNet: float64 tensors, reverse-mode autodiff,
primitive layers and the finite-difference oracle.
"""

from src.tensor.tensor import (
    Tensor,
    Parameter,
    ShapeError,
    GraphError,
    backward,
    no_grad,
)
from src.tensor.functional import (
    add,
    sub,
    mul,
    square,
    abs_,
    relu,
    reduce_sum,
    mean,
    global_avg_pool,
    softmax,
    conv2d,
    pixel_shuffle,
    pixel_unshuffle,
    concat,
    narrow,
)
from src.tensor.layers import Conv2dLayer, scalar_parameter
from src.tensor.gradcheck import GradCheckError, finite_diff_check, finite_diff_check_all

__all__ = [
    "Tensor",
    "Parameter",
    "ShapeError",
    "GraphError",
    "backward",
    "no_grad",
    "add",
    "sub",
    "mul",
    "square",
    "abs_",
    "relu",
    "reduce_sum",
    "mean",
    "global_avg_pool",
    "softmax",
    "conv2d",
    "pixel_shuffle",
    "pixel_unshuffle",
    "concat",
    "narrow",
    "Conv2dLayer",
    "scalar_parameter",
    "GradCheckError",
    "finite_diff_check",
    "finite_diff_check_all",
]
