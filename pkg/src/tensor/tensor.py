"""
Tensor and reverse-mode autodiff engine for A-CubeNet.

A Tensor wraps a float64 numpy array. When any input of an operation
requires gradients, the operation records a Node holding its parents and
a backward closure; `backward(loss)` walks those nodes in reverse
topological order and accumulates d(loss)/d(leaf) into every leaf's
`grad` buffer (Parameters included). A graph is consumed by its first
backward pass; calling backward on it again raises GraphError.

Activations are 4-D [batch, channel, height, width]; parameters may have
any rank (conv bias is 1-D, the adaptive scalars are [1, 1, 1, 1]).
"""

import logging
import threading
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.guardrails import ACubeNetError

logger = logging.getLogger(__name__)

DTYPE = np.float64
SCALAR_SHAPE = (1, 1, 1, 1)

ArrayLike = Union[np.ndarray, float, int, Sequence]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


# ============================================================================
# ERRORS
# ============================================================================

class ShapeError(ACubeNetError, ValueError):
    """Raised when tensor extents do not satisfy an operation's contract."""
    pass


class GraphError(ACubeNetError, RuntimeError):
    """Raised when backward is called on a missing or consumed graph."""
    pass


# ============================================================================
# GRAD MODE
# ============================================================================

_grad_state = threading.local()


def is_grad_enabled() -> bool:
    """Whether operations currently record graph nodes (per thread)."""
    return getattr(_grad_state, "enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """
    Disable graph recording inside the block (inference, finite differences).

    Example:
        >>> with no_grad():
        ...     y = model_forward(model, x)   # y.requires_grad is False
    """
    previous = is_grad_enabled()
    _grad_state.enabled = False
    try:
        yield
    finally:
        _grad_state.enabled = previous


# ============================================================================
# GRAPH NODE
# ============================================================================

class Node:
    """
    One recorded operation.

    Attributes:
        op: Operation name (for diagnostics).
        parents: Input tensors, in the order backward_fn returns their grads.
        backward_fn: Maps d(loss)/d(output) to a tuple of d(loss)/d(parent).
        consumed: Set once a backward pass has used this node.
    """

    __slots__ = ("op", "parents", "backward_fn", "consumed")

    def __init__(self, op: str, parents: Tuple["Tensor", ...], backward_fn: BackwardFn):
        self.op = op
        self.parents = parents
        self.backward_fn = backward_fn
        self.consumed = False


# ============================================================================
# TENSOR
# ============================================================================

class Tensor:
    """
    Dense float64 array with optional gradient tracking.

    The data buffer is never mutated by operations; every op returns a new
    Tensor. Only optimizers write into Parameter data, and only while no
    graph referencing them is live.
    """

    __array_priority__ = 100  # numpy defers mixed arithmetic to Tensor

    def __init__(self, data: ArrayLike, requires_grad: bool = False):
        self.data: np.ndarray = np.array(data, dtype=DTYPE, copy=True)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._node: Optional[Node] = None

    @classmethod
    def _wrap(cls, data: np.ndarray, requires_grad: bool = False,
              node: Optional[Node] = None) -> "Tensor":
        """Adopt a freshly computed array without copying it."""
        tensor = cls.__new__(cls)
        tensor.data = np.ascontiguousarray(data, dtype=DTYPE)
        tensor.requires_grad = requires_grad
        tensor.grad = None
        tensor._node = node
        return tensor

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        """Return a copy of the data as a numpy array."""
        return self.data.copy()

    def item(self) -> float:
        """Return the single value of a one-element tensor."""
        if self.data.size != 1:
            raise ShapeError(f"item() needs a one-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        """Reset the gradient accumulator to exact zeros."""
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    # ------------------------------------------------------------------
    # Operator sugar (implemented in functional)
    # ------------------------------------------------------------------

    def __add__(self, other): return _fn().add(self, other)
    def __radd__(self, other): return _fn().add(other, self)
    def __sub__(self, other): return _fn().sub(self, other)
    def __rsub__(self, other): return _fn().sub(other, self)
    def __mul__(self, other): return _fn().mul(self, other)
    def __rmul__(self, other): return _fn().mul(other, self)
    def __neg__(self): return _fn().mul(self, -1.0)

    def backward(self) -> None:
        """Shorthand for backward(self)."""
        backward(self)


def _fn():
    # functional imports this module; resolve lazily
    from src.tensor import functional
    return functional


def as_tensor(value: Union["Tensor", ArrayLike]) -> Tensor:
    """Wrap constants as non-tracking tensors; pass tensors through."""
    return value if isinstance(value, Tensor) else Tensor(value)


def make_result(op: str, data: np.ndarray, parents: Sequence[Tensor],
                backward_fn: BackwardFn) -> Tensor:
    """
    Build an op result, recording a Node when any parent tracks gradients.

    Args:
        op: Operation name.
        data: Forward result.
        parents: Op inputs.
        backward_fn: Gradient closure (see Node).
    """
    track = is_grad_enabled() and any(p.requires_grad for p in parents)
    if not track:
        return Tensor._wrap(data)
    return Tensor._wrap(data, requires_grad=True, node=Node(op, tuple(parents), backward_fn))


# ============================================================================
# PARAMETER
# ============================================================================

class Parameter(Tensor):
    """
    Named trainable leaf tensor.

    Attributes:
        name: Unique dotted path inside a model (e.g. "groups.0.units.1.adam.asab.alpha").
        grad: Accumulator with the same shape as the value; zeroed at creation.
    """

    def __init__(self, name: str, data: ArrayLike):
        super().__init__(data, requires_grad=True)
        self.name = name
        self.grad = np.zeros_like(self.data)

    @property
    def value(self) -> Tensor:
        return self

    def assign(self, values: ArrayLike) -> None:
        """
        Overwrite the value in place (optimizer, checkpoint load, tests).

        Raises:
            ShapeError: If the new values do not match the parameter shape.
        """
        values = np.asarray(values, dtype=DTYPE)
        if values.shape != self.data.shape:
            raise ShapeError(
                f"Parameter {self.name}: cannot assign shape {values.shape} to {self.data.shape}"
            )
        self.data[...] = values

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape})"


# ============================================================================
# BACKWARD
# ============================================================================

def _topological_order(root: Tensor) -> List[Tensor]:
    """Tensors reachable from root, parents before children (iterative DFS)."""
    order: List[Tensor] = []
    visited = set()
    stack = [(root, False)]
    while stack:
        tensor, expanded = stack.pop()
        if expanded:
            order.append(tensor)
            continue
        if id(tensor) in visited:
            continue
        visited.add(id(tensor))
        stack.append((tensor, True))
        if tensor._node is not None:
            for parent in tensor._node.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """
    Accumulate d(loss)/d(leaf) into every tracking leaf reachable from loss.

    Args:
        loss: Scalar tensor of shape [1, 1, 1, 1] produced by recorded ops.

    Raises:
        ShapeError: If loss is not a [1, 1, 1, 1] scalar.
        GraphError: If loss is not connected to a graph, or the graph was
            already consumed by a previous backward pass.
    """
    if loss.shape != SCALAR_SHAPE:
        raise ShapeError(f"backward() needs a scalar loss of shape {SCALAR_SHAPE}, got {loss.shape}")
    if loss._node is None:
        raise GraphError("Loss is not connected to a recorded computation graph")
    if loss._node.consumed:
        raise GraphError("Computation graph already consumed by a previous backward()")

    order = _topological_order(loss)
    grads = {id(loss): np.ones(SCALAR_SHAPE, dtype=DTYPE)}

    for tensor in reversed(order):
        grad = grads.pop(id(tensor), None)
        if grad is None:
            continue

        node = tensor._node
        if node is None:
            # Leaf: accumulate
            if tensor.grad is None:
                tensor.grad = np.zeros_like(tensor.data)
            tensor.grad += grad
            continue

        parent_grads = node.backward_fn(grad)
        for parent, parent_grad in zip(node.parents, parent_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + parent_grad
            else:
                grads[key] = parent_grad

    # Release saved activations; the graph cannot be replayed
    for tensor in order:
        node = tensor._node
        if node is not None:
            node.consumed = True
            node.backward_fn = _consumed_backward
            node.parents = ()


def _consumed_backward(grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
    raise GraphError("Computation graph already consumed by a previous backward()")


__all__ = [
    "DTYPE",
    "SCALAR_SHAPE",
    "Tensor",
    "Parameter",
    "Node",
    "ShapeError",
    "GraphError",
    "as_tensor",
    "make_result",
    "backward",
    "no_grad",
    "is_grad_enabled",
]
