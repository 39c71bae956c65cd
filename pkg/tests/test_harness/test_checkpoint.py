"""
Tests for src/harness/checkpoint.py - Checkpoint container.

Tests:
- Byte-identical save -> load -> save
- Bit-identical forward outputs after reload
- Corrupt, truncated and mismatched files
"""

import numpy as np
import pytest

from src.core.settings import TrainConfig, with_overrides
from src.harness.checkpoint import (
    MAGIC,
    Checkpoint,
    CheckpointError,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from src.harness.optimizer import OptimizerState, optimizer_step
from src.model.network import build_model, model_forward
from src.tensor import Tensor


@pytest.fixture
def saved(tmp_path, tiny_train_config, rng):
    """A checkpoint with perturbed weights and a few optimizer steps."""
    model = build_model(tiny_train_config.model, tiny_train_config.seed)
    for p in model.parameters():
        p.assign(p.data + rng.normal(scale=0.01, size=p.shape))
    params = model.parameters()
    state = OptimizerState.for_parameters(params)
    for _ in range(2):
        optimizer_step(params, [rng.normal(size=p.shape) for p in params], state, lr=1e-3)
    path = save_checkpoint(tmp_path / "run.ckpt", model, tiny_train_config, 17, state)
    return path, model, state


class TestRoundTrip:
    """Save/load consistency."""

    def test_save_load_save_is_byte_identical(self, saved, tmp_path):
        """Encoding is canonical."""
        path, _, _ = saved
        cfg, model, state, iteration = load_checkpoint(path)
        again = save_checkpoint(tmp_path / "again.ckpt", model, cfg, iteration, state)
        assert again.read_bytes() == path.read_bytes()

    def test_restores_everything(self, saved, tiny_train_config):
        """Config, iteration, parameters and moments come back exactly."""
        path, model, state = saved
        cfg, loaded, loaded_state, iteration = load_checkpoint(path)
        assert cfg == tiny_train_config
        assert iteration == 17
        for p in model.parameters():
            np.testing.assert_array_equal(loaded.named_parameters()[p.name].data, p.data)
            np.testing.assert_array_equal(loaded_state.m[p.name], state.m[p.name])
            np.testing.assert_array_equal(loaded_state.v[p.name], state.v[p.name])
        assert loaded_state.step == 2

    def test_forward_is_bit_identical(self, saved, rng):
        """A reloaded model computes the same outputs."""
        path, model, _ = saved
        _, loaded, _, _ = load_checkpoint(path)
        x = Tensor(rng.uniform(size=(1, 1, 9, 7)))
        np.testing.assert_array_equal(model_forward(loaded, x).data, model_forward(model, x).data)

    def test_without_optimizer_state(self, tmp_path, tiny_train_config):
        """Model-only checkpoints load with state None."""
        model = build_model(tiny_train_config.model)
        path = save_checkpoint(tmp_path / "m.ckpt", model, tiny_train_config, 0)
        assert load_checkpoint(path)[2] is None

    def test_scalar_record(self):
        """Zero-rank arrays survive the container."""
        ckpt = Checkpoint("task=denoise\n", 3, 4, {"a": np.array(2.5)})
        decoded = decode_checkpoint(encode_checkpoint(ckpt))
        assert decoded.tensors["a"].shape == () and decoded.tensors["a"] == 2.5


class TestCorruption:
    """Malformed containers raise CheckpointError."""

    def test_bad_magic(self, saved):
        """Wrong leading bytes."""
        payload = saved[0].read_bytes()
        with pytest.raises(CheckpointError, match="magic"):
            decode_checkpoint(b"NOTACKPT" + payload[len(MAGIC):])

    def test_truncated(self, saved):
        """A cut-off file."""
        payload = saved[0].read_bytes()
        with pytest.raises(CheckpointError, match="truncated"):
            decode_checkpoint(payload[:-3])

    def test_trailing_bytes(self, saved):
        """Extra bytes after the last record."""
        with pytest.raises(CheckpointError, match="trailing"):
            decode_checkpoint(saved[0].read_bytes() + b"\x00")

    def test_unknown_version(self, saved):
        """Only version 1 is understood."""
        payload = bytearray(saved[0].read_bytes())
        payload[len(MAGIC)] = 9
        with pytest.raises(CheckpointError, match="version"):
            decode_checkpoint(bytes(payload))

    def test_record_mismatch(self, tmp_path, tiny_train_config):
        """Records that do not fit the echoed config are refused."""
        model = build_model(tiny_train_config.model)
        other = with_overrides(tiny_train_config, trunk_channels=4)
        path = save_checkpoint(tmp_path / "bad.ckpt", model, other, 0)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        """A missing checkpoint raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_checkpoint(tmp_path / "absent.ckpt")

    def test_invalid_config_echo(self, tmp_path):
        """A config echo that does not parse."""
        payload = encode_checkpoint(Checkpoint("bogus_key=1\n", 0, 0, {}))
        (tmp_path / "c.ckpt").write_bytes(payload)
        with pytest.raises(CheckpointError, match="config"):
            load_checkpoint(tmp_path / "c.ckpt")

    def test_record_name_not_utf8(self):
        """Undecodable name bytes are reported with their offset."""
        payload = encode_checkpoint(Checkpoint("", 0, 0, {"ab": np.zeros(1)}))
        offset = payload.index(b"ab")
        corrupt = payload[:offset] + b"\xff\xfe" + payload[offset + 2:]
        with pytest.raises(CheckpointError, match=f"offset {offset} is not UTF-8"):
            decode_checkpoint(corrupt)
