"""
File Manager - Atomic Persistence Layer for A-CubeNet

Provides atomic file writes (checkpoints, images, histories) and
deterministic enumeration of image datasets. Paths handed to a
FileManager are resolved against its base directory.
"""

import os
import tempfile
from pathlib import Path
from typing import List, Union

# Containers the imaging module can decode
IMAGE_SUFFIXES = (".pgm", ".ppm", ".pnm", ".png")


class FileManager:
    """
    File manager with atomic writes and sorted dataset listing.

    All relative paths are resolved against the base directory so that a
    dataset folder or a run folder can be handed around as one object.
    """

    def __init__(self, base_path: Union[str, Path]):
        """
        Initialize FileManager with a base directory.

        Args:
            base_path: Root directory for relative paths (created if missing)

        Raises:
            ValueError: If base_path exists and is not a directory
        """
        self.base_path = Path(base_path).expanduser().resolve()

        if self.base_path.exists() and not self.base_path.is_dir():
            raise ValueError(f"Base path is not a directory: {self.base_path}")

    def _resolve(self, rel_path: Union[str, Path]) -> Path:
        """Resolve a relative or absolute path against the base directory."""
        path = Path(rel_path)
        if not path.is_absolute():
            path = self.base_path / path
        return path.resolve()

    def write_bytes(self, rel_path: Union[str, Path], payload: bytes) -> Path:
        """
        Atomically write bytes to a file.

        Uses a temporary file in the same directory so that an interrupted
        write never leaves a truncated checkpoint behind.

        Args:
            rel_path: Target path (relative to base or absolute)
            payload: Bytes to write

        Returns:
            Resolved target path

        Raises:
            OSError: If the write fails
        """
        target_path = self._resolve(rel_path)
        target_path.parent.mkdir(parents=True, exist_ok=True)

        # Same directory as target so os.replace stays on one filesystem
        temp_fd, temp_path = tempfile.mkstemp(
            dir=target_path.parent,
            prefix=f".{target_path.name}.",
            suffix=".tmp"
        )

        try:
            with os.fdopen(temp_fd, "wb") as temp_file:
                temp_file.write(payload)
                temp_file.flush()
                os.fsync(temp_file.fileno())

            os.replace(temp_path, target_path)

        except Exception as e:
            try:
                os.unlink(temp_path)
            except OSError:
                pass
            raise OSError(f"Failed to write file '{target_path}': {e}") from e

        return target_path

    def write_text(self, rel_path: Union[str, Path], content: str, encoding: str = "utf-8") -> Path:
        """Atomically write text to a file (see write_bytes)."""
        return self.write_bytes(rel_path, content.encode(encoding))

    def read_bytes(self, rel_path: Union[str, Path]) -> bytes:
        """
        Read a whole file.

        Raises:
            FileNotFoundError: If the file doesn't exist
        """
        target_path = self._resolve(rel_path)
        if not target_path.is_file():
            raise FileNotFoundError(f"File not found: {target_path}")
        return target_path.read_bytes()

    def list_images(self) -> List[Path]:
        """
        List decodable images directly under the base directory.

        Returns:
            Paths sorted by file name, so dataset order is reproducible

        Raises:
            FileNotFoundError: If the base directory doesn't exist
        """
        if not self.base_path.is_dir():
            raise FileNotFoundError(f"Directory not found: {self.base_path}")

        return sorted(
            (p for p in self.base_path.iterdir()
             if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES),
            key=lambda p: p.name,
        )


__all__ = ["FileManager", "IMAGE_SUFFIXES"]
