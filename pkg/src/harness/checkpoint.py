"""
Checkpoint container.

Layout (little-endian):

    magic         8 bytes  b"ACUBECKP"
    version       u32      1
    config        u32 length + UTF-8 key=value text (dump_config)
    iteration     u64      completed training iterations
    seed          u64      run seed (with iteration, the whole RNG state)
    records       u32 count, then per record, sorted by name:
                    u16 name length, name bytes,
                    u8 ndim, ndim x u32 extents,
                    raw <f8 data

Model parameters are stored under their own names; optimizer moments as
"optim.m.<name>" / "optim.v.<name>" and the step counter as the
one-element record "optim.step". Encoding is canonical, so
save -> load -> save reproduces the same bytes.
"""

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.core.file_manager import FileManager
from src.core.guardrails import ACubeNetError
from src.core.settings import ConfigError, TrainConfig, dump_config, parse_config_text
from src.harness.optimizer import OptimizerState
from src.model.network import Model, build_model

logger = logging.getLogger(__name__)

MAGIC = b"ACUBECKP"
VERSION = 1
STEP_RECORD = "optim.step"
M_PREFIX = "optim.m."
V_PREFIX = "optim.v."


class CheckpointError(ACubeNetError, ValueError):
    """Raised for corrupt, truncated or incompatible checkpoints."""
    pass


@dataclass
class Checkpoint:
    """Decoded container contents."""
    config_text: str
    iteration: int
    seed: int
    tensors: Dict[str, np.ndarray] = field(default_factory=dict)


# ============================================================================
# ENCODING
# ============================================================================

def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    config = ckpt.config_text.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<I", len(config)),
        config,
        struct.pack("<QQ", ckpt.iteration, ckpt.seed),
        struct.pack("<I", len(ckpt.tensors)),
    ]
    for name in sorted(ckpt.tensors):
        array = np.ascontiguousarray(ckpt.tensors[name], dtype="<f8")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", array.ndim))
        parts.append(struct.pack(f"<{array.ndim}I", *array.shape))
        parts.append(array.tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, count: int, what: str) -> bytes:
        end = self.offset + count
        if end > len(self.payload):
            raise CheckpointError(f"Checkpoint truncated while reading {what}")
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode_checkpoint(payload: bytes) -> Checkpoint:
    """
    Raises:
        CheckpointError: On a bad magic, unknown version, truncation, non-UTF-8
            text or trailing bytes.
    """
    reader = _Reader(payload)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise CheckpointError("Not an A-CubeNet checkpoint (bad magic)")
    (version,) = reader.unpack("<I", "version")
    if version != VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version} (expected {VERSION})")
    (length,) = reader.unpack("<I", "config length")
    try:
        config_text = reader.take(length, "config").decode("utf-8")
    except UnicodeDecodeError as e:
        raise CheckpointError(f"Config echo is not UTF-8: {e}") from e
    iteration, seed = reader.unpack("<QQ", "header")
    (count,) = reader.unpack("<I", "record count")

    tensors: Dict[str, np.ndarray] = {}
    for index in range(count):
        (name_len,) = reader.unpack("<H", f"record {index} name length")
        start = reader.offset
        try:
            name = reader.take(name_len, f"record {index} name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointError(f"Record {index} name at offset {start} is not UTF-8: {e}") from e
        (ndim,) = reader.unpack("<B", f"record {name} rank")
        shape = reader.unpack(f"<{ndim}I", f"record {name} extents") if ndim else ()
        size = int(np.prod(shape)) if shape else 1
        data = reader.take(8 * size, f"record {name} data")
        if name in tensors:
            raise CheckpointError(f"Duplicate record '{name}'")
        tensors[name] = np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(shape)

    if reader.offset != len(payload):
        raise CheckpointError(f"{len(payload) - reader.offset} trailing bytes after the last record")
    return Checkpoint(config_text=config_text, iteration=iteration, seed=seed, tensors=tensors)


# ============================================================================
# SAVE / LOAD
# ============================================================================

def save_checkpoint(path: Union[str, Path], model: Model, cfg: TrainConfig, iteration: int,
                    state: Optional[OptimizerState] = None) -> Path:
    """
    Atomically write model (and optimizer) state.

    Returns:
        The written path.
    """
    tensors = {p.name: p.data for p in model.parameters()}
    if state is not None:
        for name, moment in state.m.items():
            tensors[M_PREFIX + name] = moment
        for name, moment in state.v.items():
            tensors[V_PREFIX + name] = moment
        tensors[STEP_RECORD] = np.array([float(state.step)])

    ckpt = Checkpoint(config_text=dump_config(cfg), iteration=iteration, seed=cfg.seed, tensors=tensors)
    path = Path(path)
    target = FileManager(path.parent).write_bytes(path.name, encode_checkpoint(ckpt))
    logger.info(f"Saved checkpoint {target.name} at iter={iteration} ({len(tensors)} records)")
    return target


def load_checkpoint(path: Union[str, Path]) -> Tuple[TrainConfig, Model, Optional[OptimizerState], int]:
    """
    Read a checkpoint and rebuild the model it describes.

    Returns:
        (config, model, optimizer state or None, iteration)

    Raises:
        FileNotFoundError: If the file is missing.
        CheckpointError: If the container is corrupt or a record does not
            match the model the config describes.
    """
    path = Path(path)
    ckpt = decode_checkpoint(FileManager(path.parent).read_bytes(path.name))
    try:
        cfg = parse_config_text(ckpt.config_text, source=f"{path.name} config")
    except ConfigError as e:
        raise CheckpointError(f"{path.name}: invalid config echo: {e}") from e

    model = build_model(cfg.model, cfg.seed)
    params = model.named_parameters()
    model_records = {n: t for n, t in ckpt.tensors.items() if not n.startswith("optim.")}

    missing = sorted(set(params) - set(model_records))
    extra = sorted(set(model_records) - set(params))
    if missing or extra:
        raise CheckpointError(f"{path.name}: records do not match the model "
                              f"(missing {missing[:3]}, unexpected {extra[:3]})")
    for name, p in params.items():
        if model_records[name].shape != p.shape:
            raise CheckpointError(f"{path.name}: {name} has shape {model_records[name].shape}, "
                                  f"model expects {p.shape}")
        p.assign(model_records[name])

    state = None
    if STEP_RECORD in ckpt.tensors:
        state = OptimizerState(beta1=cfg.beta1, beta2=cfg.beta2, epsilon=cfg.epsilon,
                               step=int(ckpt.tensors[STEP_RECORD].reshape(-1)[0]))
        for name, p in params.items():
            for prefix, store in ((M_PREFIX, state.m), (V_PREFIX, state.v)):
                record = ckpt.tensors.get(prefix + name)
                if record is None or record.shape != p.shape:
                    raise CheckpointError(f"{path.name}: optimizer record {prefix}{name} missing or misshapen")
                store[name] = record.copy()

    logger.info(f"Loaded checkpoint {path.name}: iter={ckpt.iteration} task={cfg.model.task}")
    return cfg, model, state, ckpt.iteration


__all__ = [
    "CheckpointError",
    "Checkpoint",
    "encode_checkpoint",
    "decode_checkpoint",
    "save_checkpoint",
    "load_checkpoint",
]
