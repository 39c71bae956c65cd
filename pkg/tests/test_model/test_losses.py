"""
Tests for src/model/losses.py and the full-model gradient check.
"""

import numpy as np
import pytest

from src.core.settings import ModelConfig
from src.harness.diagnostics import model_gradcheck, prepare_gradcheck
from src.model.losses import get_loss, l1_loss, l2_loss
from src.model.network import model_forward
from src.tensor import Parameter, ShapeError, Tensor, backward, finite_diff_check, no_grad


class TestLosses:
    """Tests for l1_loss / l2_loss."""

    def test_l1_value(self):
        """Mean absolute difference."""
        pred = Tensor(np.array([1.0, -2.0, 0.5, 0.0]).reshape(1, 1, 2, 2))
        assert l1_loss(pred, Tensor(np.zeros((1, 1, 2, 2)))).item() == pytest.approx(0.875)

    def test_l2_value(self):
        """Mean squared difference."""
        pred = Tensor(np.array([1.0, -2.0, 0.5, 0.0]).reshape(1, 1, 2, 2))
        assert l2_loss(pred, Tensor(np.zeros((1, 1, 2, 2)))).item() == pytest.approx(5.25 / 4)

    def test_l1_gradient_is_sign_over_n(self):
        """d/dpred mean|pred - t| = sign / N."""
        pred = Parameter("p", np.array([1.0, -2.0]).reshape(1, 1, 1, 2))
        backward(l1_loss(pred, Tensor(np.zeros((1, 1, 1, 2)))))
        np.testing.assert_allclose(pred.grad.reshape(-1), [0.5, -0.5])

    def test_l1_through_model_matches_finite_differences(self):
        """No prediction sits on a kink, so l1 is smooth in the head and tail weights."""
        model, x = prepare_gradcheck(ModelConfig(task="denoise", trunk_channels=2, num_groups=1,
                                                 units_per_group=1), size=4)
        with no_grad():
            target = Tensor(model_forward(model, x).data + 0.01)

        def loss():
            return l1_loss(model_forward(model, x), target)

        assert finite_diff_check(loss, model.head.weight) < 1e-4
        assert finite_diff_check(loss, model.tail.weight) < 1e-4

    def test_shape_mismatch(self):
        """Prediction and target must agree."""
        with pytest.raises(ShapeError):
            l2_loss(Tensor(np.zeros((1, 1, 2, 2))), Tensor(np.zeros((1, 1, 2, 3))))

    def test_get_loss(self):
        """Lookup by name."""
        assert get_loss("l1") is l1_loss
        with pytest.raises(ValueError):
            get_loss("huber")


@pytest.mark.slow
class TestModelGradcheck:
    """Finite differences over every parameter of a small model."""

    def test_all_parameters_within_tolerance(self, tiny_model_config):
        """G=2, U=2, C=8, r=4 with W_SSC on an 8x8 input, h = 1e-5."""
        errors = model_gradcheck(tiny_model_config, seed=0, size=8, step=1e-5)
        assert len(errors) == len({name for name in errors})
        worst = max(errors, key=errors.get)
        assert errors[worst] < 1e-4, worst
