"""
Harness for A-CubeNet: optimizer, schedule, checkpoints, training,
evaluation, inference and model diagnostics.
"""

from src.harness.optimizer import OptimizerError, OptimizerState, optimizer_step
from src.harness.schedule import lr_at
from src.harness.checkpoint import CheckpointError, save_checkpoint, load_checkpoint
from src.harness.inference import match_channels, restore, infer
from src.harness.evaluator import MetricsTable, evaluate, evaluate_model, evaluate_pairs
from src.harness.trainer import Trainer, TrainingReport, train
from src.harness.diagnostics import ablation_table, model_gradcheck, attention_report

__all__ = [
    # Optimization
    "OptimizerError",
    "OptimizerState",
    "optimizer_step",
    "lr_at",

    # Persistence
    "CheckpointError",
    "save_checkpoint",
    "load_checkpoint",

    # Running models
    "match_channels",
    "restore",
    "infer",
    "MetricsTable",
    "evaluate",
    "evaluate_model",
    "evaluate_pairs",
    "Trainer",
    "TrainingReport",
    "train",

    # Diagnostics
    "ablation_table",
    "model_gradcheck",
    "attention_report",
]
