"""
Tests for src/model/attention.py - ASAB, ACAB, ADAM and AHAM.

Tests:
- Agreement with the scalar double-loop references, softmax weights summing to 1
- Shift invariance and convexity of the spatial descriptor
- Identity at initialization (alpha = beta = gamma = 0)
- Ablation variants and shape contracts
- Attention probe records
"""

import numpy as np
import pytest

from src.core.rng import Stream, stream
from src.model.attention import (
    AttentionProbe,
    acab_forward,
    adam_forward,
    aham_forward,
    asab_forward,
    bottleneck_width,
    build_acab,
    build_adam,
    build_aham,
    build_asab,
)
from src.tensor import ShapeError, Tensor
from tests.oracles import aham_reference, acab_reference, adam_reference, asab_reference

SEEDS = range(20)
CHANNELS = 5


def _adaptive(rng, *params):
    for p in params:
        if p is not None:
            p.assign(rng.uniform(0.2, 1.5, size=p.shape))


class TestAgainstReference:
    """Vectorised forwards agree with the element-by-element oracles."""

    @pytest.mark.parametrize("channels", [CHANNELS, 8])
    @pytest.mark.parametrize("seed", SEEDS)
    def test_asab(self, seed, channels):
        """Spatial branch, batch of two, arbitrary H != W."""
        rng = stream(seed, Stream.EVAL)
        p = build_asab("asab", channels, ratio=2, rng=rng)
        _adaptive(rng, p.alpha)
        x = rng.normal(size=(2, channels, 4, 6))

        probe = AttentionProbe()
        out = asab_forward(Tensor(x), p, probe).data
        for b in range(2):
            expected, weights = asab_reference(x[b], p)
            np.testing.assert_allclose(out[b], expected, rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(probe.records[0].weights[b], weights, rtol=1e-10, atol=1e-14)
            assert abs(weights.sum() - 1.0) < 1e-12
            assert abs(probe.records[0].weights[b].sum() - 1.0) < 1e-12

    @pytest.mark.parametrize("channels", [CHANNELS, 8])
    @pytest.mark.parametrize("seed", SEEDS)
    def test_acab(self, seed, channels):
        """Channel branch."""
        rng = stream(seed, Stream.EVAL)
        p = build_acab("acab", rng=rng)
        _adaptive(rng, p.beta)
        x = rng.normal(size=(2, channels, 5, 3))

        probe = AttentionProbe()
        out = acab_forward(Tensor(x), p, probe).data
        for b in range(2):
            expected, weights = acab_reference(x[b], p)
            np.testing.assert_allclose(out[b], expected, rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(probe.records[0].weights[b], weights, rtol=1e-10, atol=1e-14)
            assert abs(weights.sum() - 1.0) < 1e-12
            assert abs(probe.records[0].weights[b].sum() - 1.0) < 1e-12

    @pytest.mark.parametrize("channels", [CHANNELS, 8])
    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("variant", ["full", "S", "C", "NW"])
    def test_adam_variants(self, seed, variant, channels):
        """x + ASAB(x) + ACAB(x) for every variant with attention."""
        rng = stream(seed, Stream.EVAL)
        p = build_adam("adam", channels, variant, ratio=3, rng=rng)
        _adaptive(rng, p.asab.alpha if p.asab else None, p.acab.beta if p.acab else None)
        x = rng.normal(size=(1, channels, 4, 4))
        out = adam_forward(Tensor(x), p).data
        np.testing.assert_allclose(out[0], adam_reference(x[0], p), rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("channels", [CHANNELS, 8])
    @pytest.mark.parametrize("seed", SEEDS)
    def test_aham(self, seed, channels):
        """Hierarchical aggregation of three maps."""
        rng = stream(seed, Stream.EVAL)
        p = build_aham("aham", channels, 3, rng)
        _adaptive(rng, p.gamma)
        feats = [rng.normal(size=(2, channels, 3, 4)) for _ in range(3)]

        probe = AttentionProbe()
        out = aham_forward([Tensor(f) for f in feats], p, probe).data
        for b in range(2):
            expected, weights = aham_reference([f[b] for f in feats], p)
            np.testing.assert_allclose(out[b], expected, rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(probe.records[0].weights[b], weights, rtol=1e-10, atol=1e-14)
            assert abs(weights.sum() - 1.0) < 1e-12
            assert abs(probe.records[0].weights[b].sum() - 1.0) < 1e-12


class TestSpatialDescriptor:
    """Properties of the softmax-pooled ASAB descriptor."""

    @pytest.mark.parametrize("seed", range(5))
    def test_invariant_to_squeeze_bias(self, seed):
        """A constant added to the squeeze bias cancels in the softmax."""
        rng = stream(seed, Stream.EVAL)
        p = build_asab("asab", 8, ratio=2, rng=rng)
        _adaptive(rng, p.alpha)
        x = Tensor(rng.normal(size=(2, 8, 5, 4)))
        before = asab_forward(x, p).data
        p.squeeze.bias.assign(p.squeeze.bias.data + 3.7)
        np.testing.assert_allclose(asab_forward(x, p).data, before, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_descriptor_within_channel_range(self, seed):
        """Each pooled channel is a convex combination of that channel's pixels."""
        rng = stream(seed, Stream.EVAL)
        p = build_asab("asab", 8, ratio=2, rng=rng)
        x = rng.normal(size=(2, 8, 5, 4))
        probe = AttentionProbe()
        asab_forward(Tensor(x), p, probe)
        weights = probe.by_kind("spatial")[0].weights          # [B, 1, H, W]
        descriptor = (x * weights).sum(axis=(2, 3))
        assert np.all(descriptor >= x.min(axis=(2, 3)) - 1e-12)
        assert np.all(descriptor <= x.max(axis=(2, 3)) + 1e-12)
        assert np.all(weights >= 0.0)


class TestIdentityAtInit:
    """Freshly built modules pass their input through unchanged."""

    def test_adam_is_identity(self, rng):
        """alpha = beta = 0 gives exactly x."""
        p = build_adam("adam", CHANNELS, "full", rng=stream(0, Stream.INIT))
        x = rng.normal(size=(2, CHANNELS, 4, 4))
        np.testing.assert_array_equal(adam_forward(Tensor(x), p).data, x)

    def test_aham_returns_last_map(self, rng):
        """gamma = 0 gives exactly the last map."""
        p = build_aham("aham", CHANNELS, 2, stream(0, Stream.INIT))
        feats = [rng.normal(size=(1, CHANNELS, 3, 3)) for _ in range(2)]
        out = aham_forward([Tensor(f) for f in feats], p).data
        np.testing.assert_array_equal(out, feats[-1])

    def test_adaptive_weights_start_at_zero(self):
        """alpha, beta and gamma are created as 0."""
        adam = build_adam("adam", CHANNELS, "full")
        aham = build_aham("aham", CHANNELS, 2)
        assert adam.asab.alpha.item() == 0.0
        assert adam.acab.beta.item() == 0.0
        assert aham.gamma.item() == 0.0


class TestVariants:
    """Tests for the ablation variants."""

    def test_off_has_no_parameters(self):
        """variant off builds no branches and is the identity."""
        p = build_adam("adam", CHANNELS, "off")
        assert p.parameters() == []
        x = np.ones((1, CHANNELS, 2, 2))
        np.testing.assert_array_equal(adam_forward(Tensor(x), p).data, x)

    def test_nw_has_fixed_weights(self):
        """NW keeps both branches without alpha/beta parameters."""
        p = build_adam("adam", CHANNELS, "NW")
        assert p.asab.alpha is None and p.acab.beta is None
        names = [q.name for q in p.parameters()]
        assert not any(n.endswith((".alpha", ".beta")) for n in names)

    def test_s_and_c_branches(self):
        """S keeps only the spatial branch, C only the channel branch."""
        assert build_adam("a", CHANNELS, "S").acab is None
        assert build_adam("a", CHANNELS, "C").asab is None

    def test_unknown_variant(self):
        """Unknown variant names are rejected."""
        with pytest.raises(ValueError):
            build_adam("a", CHANNELS, "both")


class TestShapes:
    """Shape contracts."""

    def test_bottleneck_is_ceiling(self):
        """ceil(C / r), never zero."""
        assert bottleneck_width(64, 16) == 4
        assert bottleneck_width(5, 16) == 1
        assert bottleneck_width(17, 16) == 2

    def test_branch_output_shapes(self, rng):
        """ASAB -> [B, C, 1, 1], ACAB -> [B, 1, H, W]."""
        x = Tensor(rng.normal(size=(3, CHANNELS, 4, 7)))
        assert asab_forward(x, build_asab("s", CHANNELS, rng=rng)).shape == (3, CHANNELS, 1, 1)
        assert acab_forward(x, build_acab("c", rng=rng)).shape == (3, 1, 4, 7)

    def test_one_pixel_input(self, rng):
        """A 1x1 map gets spatial weight exactly 1."""
        probe = AttentionProbe()
        x = Tensor(rng.normal(size=(1, CHANNELS, 1, 1)))
        asab_forward(x, build_asab("s", CHANNELS, rng=rng), probe)
        assert probe.by_kind("spatial")[0].weights.item() == 1.0

    def test_asab_channel_mismatch(self, rng):
        """Input channels must match the block."""
        with pytest.raises(ShapeError):
            asab_forward(Tensor(np.zeros((1, CHANNELS + 1, 2, 2))), build_asab("s", CHANNELS))

    def test_aham_rejects_bad_inputs(self):
        """Empty lists, wrong counts and mismatched shapes raise ShapeError."""
        p = build_aham("aham", CHANNELS, 2)
        a = Tensor(np.zeros((1, CHANNELS, 2, 2)))
        b = Tensor(np.zeros((1, CHANNELS, 3, 2)))
        with pytest.raises(ShapeError):
            aham_forward([], p)
        with pytest.raises(ShapeError):
            aham_forward([a], p)
        with pytest.raises(ShapeError):
            aham_forward([a, b], p)

    def test_single_group_weight_is_one(self, rng):
        """With G = 1 the hierarchical softmax is exactly 1."""
        probe = AttentionProbe()
        p = build_aham("aham", CHANNELS, 1, rng)
        aham_forward([Tensor(rng.normal(size=(1, CHANNELS, 2, 2)))], p, probe)
        assert probe.by_kind("hierarchical")[0].weights.item() == 1.0

    def test_single_group_output(self, rng):
        """With G = 1 the output is F_1 + gamma * F_1."""
        p = build_aham("aham", CHANNELS, 1, rng)
        p.gamma.assign(np.full(p.gamma.shape, 0.75))
        f = rng.normal(size=(2, CHANNELS, 3, 2))
        out = aham_forward([Tensor(f)], p).data
        np.testing.assert_allclose(out, f + 0.75 * f, rtol=0, atol=1e-12)
