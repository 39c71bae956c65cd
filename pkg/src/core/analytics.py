"""
Training History for A-CubeNet.

Records the progress of a training run so it can be plotted or compared
after the fact:
- loss and learning rate at every logged iteration
- validation PSNR whenever it is computed
- wall-clock seconds per logged interval

Data is stored in <run_dir>/history.json and rewritten atomically after
every record, so a killed run keeps everything logged up to that point.

Example:
    >>> history = TrainingHistory(run_dir)
    >>> history.log_iteration(100, lr=2e-4, loss=0.031)
    >>> history.get_summary()["last_loss"]
    0.031
"""

import json
import logging
import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

HISTORY_FILE = "history.json"
HISTORY_VERSION = "1.0"


# ============================================================================
# HISTORY DATA STRUCTURE
# ============================================================================

def _default_history() -> Dict[str, Any]:
    now = datetime.now().isoformat()
    return {
        "version": HISTORY_VERSION,
        "created_at": now,
        "updated_at": now,
        "iterations": [],
        "validations": [],
        "summary": {
            "logged": 0,
            "last_iteration": None,
            "last_loss": None,
            "best_loss": None,
            "best_psnr": None,
            "best_psnr_iteration": None,
        },
    }


# ============================================================================
# THREAD-SAFE HISTORY CLASS
# ============================================================================

class TrainingHistory:
    """
    Thread-safe training history with JSON persistence.

    Attributes:
        run_dir: Directory of the training run.
        history_file: Path to history.json.
    """

    def __init__(self, run_dir: Path):
        self._lock = threading.Lock()
        self._history_file = Path(run_dir) / HISTORY_FILE
        self._data: Optional[Dict[str, Any]] = None

    @property
    def history_file(self) -> Path:
        return self._history_file

    def load(self) -> Dict[str, Any]:
        """
        Load history from disk (a resumed run appends to it).

        Returns:
            History dict. Creates a fresh one if the file is missing or corrupt.
        """
        with self._lock:
            if self._data is not None:
                return self._data

            if self._history_file.exists():
                try:
                    self._data = json.loads(self._history_file.read_text(encoding="utf-8"))
                    logger.debug(f"Loaded history from {self._history_file}")
                except (json.JSONDecodeError, OSError) as e:
                    logger.warning(f"Failed to load history, starting fresh: {e}")
                    self._data = _default_history()
            else:
                self._data = _default_history()

            return self._data

    def save(self) -> bool:
        """
        Write history atomically (temp file then rename).

        Returns:
            True if saved, False otherwise.
        """
        with self._lock:
            if self._data is None:
                return False

            try:
                self._history_file.parent.mkdir(parents=True, exist_ok=True)
                self._data["updated_at"] = datetime.now().isoformat()

                temp_file = self._history_file.with_suffix(".tmp")
                temp_file.write_text(json.dumps(self._data, indent=2), encoding="utf-8")
                temp_file.replace(self._history_file)
                return True

            except OSError as e:
                logger.error(f"Failed to save history: {e}")
                return False

    def log_iteration(self, iteration: int, lr: float, loss: float,
                      seconds: Optional[float] = None) -> None:
        """
        Record one logged training iteration.

        Args:
            iteration: Iteration number (1-based count of completed steps).
            lr: Learning rate used for the step.
            loss: Mini-batch loss.
            seconds: Wall-clock time since the previous record.
        """
        data = self.load()

        with self._lock:
            record = {"iteration": iteration, "lr": lr, "loss": loss}
            if seconds is not None:
                record["seconds"] = round(seconds, 3)
            data["iterations"].append(record)

            summary = data["summary"]
            summary["logged"] += 1
            summary["last_iteration"] = iteration
            summary["last_loss"] = loss
            if summary.get("best_loss") is None or loss < summary["best_loss"]:
                summary["best_loss"] = loss

        self.save()

    def log_validation(self, iteration: int, psnr: float) -> None:
        """Record a validation PSNR and track the best one."""
        data = self.load()

        with self._lock:
            data["validations"].append({"iteration": iteration, "psnr": psnr})
            summary = data["summary"]
            if summary["best_psnr"] is None or psnr > summary["best_psnr"]:
                summary["best_psnr"] = psnr
                summary["best_psnr_iteration"] = iteration

        self.save()
        logger.debug(f"Logged validation psnr={psnr:.3f} at iter={iteration}")

    def get_summary(self) -> Dict[str, Any]:
        """Aggregated statistics (copy)."""
        return dict(self.load()["summary"])

    def losses(self) -> List[float]:
        return [r["loss"] for r in self.load()["iterations"]]

    def truncate(self, iteration: int) -> None:
        """
        Drop records after `iteration` (resuming from an earlier checkpoint).
        """
        data = self.load()
        with self._lock:
            data["iterations"] = [r for r in data["iterations"] if r["iteration"] <= iteration]
            data["validations"] = [r for r in data["validations"] if r["iteration"] <= iteration]
            summary = data["summary"]
            summary["logged"] = len(data["iterations"])
            last = data["iterations"][-1] if data["iterations"] else None
            summary["last_iteration"] = last["iteration"] if last else None
            summary["last_loss"] = last["loss"] if last else None
            summary["best_loss"] = min((r["loss"] for r in data["iterations"]), default=None)
            best = max(data["validations"], key=lambda r: r["psnr"], default=None)
            summary["best_psnr"] = best["psnr"] if best else None
            summary["best_psnr_iteration"] = best["iteration"] if best else None
        self.save()

    def reset(self) -> None:
        with self._lock:
            self._data = _default_history()
        self.save()
        logger.info("Training history reset")


__all__ = ["TrainingHistory", "HISTORY_FILE"]
