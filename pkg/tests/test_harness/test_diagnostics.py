"""
Tests for src/harness/diagnostics.py - Parameter tables, gradient-check
setup and attention introspection.
"""

import numpy as np
import pytest

from src.core.settings import ModelConfig
from src.harness.diagnostics import (
    ADAPTIVE_WEIGHTS,
    RELU_FED_BIASES,
    ablation_rows,
    ablation_table,
    attention_report,
    model_gradcheck,
    prepare_gradcheck,
)
from src.model.network import build_model


class TestAblationTable:
    """Counts next to the published ones."""

    def test_rows(self):
        """Exact counts of the headline rows."""
        rows = {row.label: row for row in ablation_rows()}
        assert rows["Baseline"].count == 1_369_859
        assert rows["+ADAM"].count == 1_380_531
        assert rows["+AHAM"].count == 1_370_900

    def test_default_models_within_one_percent(self):
        """Default x2/x3/x4 counts stay within 1% of the published ones."""
        for row in ablation_rows():
            if row.published is not None:
                assert abs(row.deviation(row.count)) < 1.0, row.label

    def test_table_lines(self):
        """Header plus one line per row; baseline formatted as 1370K."""
        lines = ablation_table()
        assert lines[0] == "model\tparams\trounded\tpublished\tdeviation"
        assert len(lines) == 1 + len(ablation_rows())
        assert lines[1].startswith("Baseline\t1369859\t1370K\t1370K\t")
        assert "\t-\t-" in next(line for line in lines if line.startswith("+ADAM-C"))


class TestGradcheckSetup:
    """prepare_gradcheck keeps every ReLU away from its kink."""

    def test_values(self, tiny_model_config):
        """Adaptive weights near 0.5, ReLU-fed biases at 1, small weights."""
        model, x = prepare_gradcheck(tiny_model_config, seed=0, size=8)
        assert x.shape == (1, 1, 8, 8)
        for p in model.parameters():
            if p.name.endswith(ADAPTIVE_WEIGHTS):
                assert 0.4 <= p.item() <= 0.6
            elif p.name.endswith(RELU_FED_BIASES):
                np.testing.assert_array_equal(p.data, 1.0)
            elif p.name.endswith(".weight"):
                assert np.abs(p.data).max() <= 0.05

    def test_deterministic(self, tiny_model_config):
        """Same seed, same setup."""
        _, a = prepare_gradcheck(tiny_model_config, seed=2)
        _, b = prepare_gradcheck(tiny_model_config, seed=2)
        np.testing.assert_array_equal(a.data, b.data)

    def test_small_model_passes(self):
        """A one-unit model with C = 2 on a 4x4 input."""
        cfg = ModelConfig(task="denoise", trunk_channels=2, num_groups=1, units_per_group=1,
                          bottleneck_ratio=2)
        errors = model_gradcheck(cfg, size=4)
        assert max(errors.values()) < 1e-4


class TestAttentionReport:
    """attention_report lines."""

    def test_rdag_model(self, tiny_model_config, smooth_gray):
        """gamma, one weight per group, alpha/beta per unit."""
        lines = attention_report(build_model(tiny_model_config), smooth_gray)
        assert lines[0] == "aham gamma=0.000000"
        assert lines[1].startswith("  map 0: omega_h=")
        weights = [float(line.split("=")[1]) for line in lines[1:3]]
        assert sum(weights) == pytest.approx(1.0)
        assert "groups.1.units.1: alpha=0.000000 beta=0.000000" in lines

    def test_ablation_variants(self, smooth_gray):
        """Fixed weights and disabled attention are named as such."""
        base = dict(task="denoise", trunk_style="ablation_16_resblocks", trunk_channels=2,
                    bottleneck_ratio=2, aham_enabled=False)
        nw = attention_report(build_model(ModelConfig(adam_variant="NW", **base)), smooth_gray)
        off = attention_report(build_model(ModelConfig(adam_variant="off", **base)), smooth_gray)
        assert nw[0] == "blocks.0: alpha=fixed beta=fixed"
        assert off[15] == "blocks.15: no attention"
