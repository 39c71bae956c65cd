"""
Finite-difference gradient oracle.

finite_diff_check compares the analytic gradient of a scalar function
with respect to one Parameter against central differences:

    error = max_i |analytic_i - central_i| / max(|analytic_i|, |central_i|, 1e-8)
    central_i = (f(p + h e_i) - f(p - h e_i)) / (2h)
"""

import logging
from typing import Callable, Dict, Iterable

import numpy as np

from src.core.guardrails import ACubeNetError
from src.tensor.tensor import Parameter, Tensor, backward, no_grad

logger = logging.getLogger(__name__)

ScalarFn = Callable[[], Tensor]

DENOMINATOR_FLOOR = 1e-8


class GradCheckError(ACubeNetError, ValueError):
    """Raised on an invalid step or a non-deterministic function."""
    pass


def _evaluate(f: ScalarFn) -> float:
    with no_grad():
        return f().item()


def _analytic_grads(f: ScalarFn, params: Iterable[Parameter]) -> Dict[str, np.ndarray]:
    params = list(params)
    for p in params:
        p.zero_grad()
    loss = f()
    backward(loss)
    return {p.name: p.grad.copy() for p in params}


def _check_determinism(f: ScalarFn) -> float:
    first = _evaluate(f)
    second = _evaluate(f)
    if first != second and not (np.isnan(first) and np.isnan(second)):
        raise GradCheckError(
            f"Function is not deterministic: repeated evaluation gave {first!r} then {second!r}"
        )
    return first


def _central_error(f: ScalarFn, p: Parameter, analytic: np.ndarray, step: float) -> float:
    flat = p.data.reshape(-1)
    analytic = analytic.reshape(-1)
    worst = 0.0
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        plus = _evaluate(f)
        flat[i] = original - step
        minus = _evaluate(f)
        flat[i] = original
        central = (plus - minus) / (2.0 * step)
        denom = max(abs(analytic[i]), abs(central), DENOMINATOR_FLOOR)
        worst = max(worst, abs(analytic[i] - central) / denom)
    return worst


def finite_diff_check(f: ScalarFn, p: Parameter, step: float = 1e-5) -> float:
    """
    Max relative error between analytic and central-difference gradients.

    Args:
        f: Zero-argument function building a [1,1,1,1] scalar from the
            current parameter values (it is called many times).
        p: Parameter to perturb, one element at a time.
        step: Central-difference step h (> 0).

    Returns:
        The maximum relative error over p's elements.

    Raises:
        GradCheckError: If step <= 0 or f is not deterministic.
    """
    if not step > 0:
        raise GradCheckError(f"Finite-difference step must be > 0, got {step}")
    _check_determinism(f)
    analytic = _analytic_grads(f, [p])[p.name]
    return _central_error(f, p, analytic, step)


def finite_diff_check_all(f: ScalarFn, params: Iterable[Parameter],
                          step: float = 1e-5) -> Dict[str, float]:
    """
    finite_diff_check for many parameters sharing one backward pass.

    Returns:
        Mapping parameter name -> max relative error.
    """
    if not step > 0:
        raise GradCheckError(f"Finite-difference step must be > 0, got {step}")
    params = list(params)
    _check_determinism(f)
    analytic = _analytic_grads(f, params)
    errors = {}
    for p in params:
        errors[p.name] = _central_error(f, p, analytic[p.name], step)
        logger.debug(f"gradcheck {p.name}: max rel err {errors[p.name]:.3e}")
    return errors


__all__ = ["GradCheckError", "finite_diff_check", "finite_diff_check_all"]
