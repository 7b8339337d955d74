"""
File storage backend: atomic writes (temp file + rename) in the target directory
"""
import io
import json
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


class Storage:
    """Atomic file writer used by every repository"""

    def ensure_dir(self, path: PathLike) -> Path:
        """Create a directory (and parents) if missing"""
        directory = Path(path)
        directory.mkdir(parents=True, exist_ok=True)
        return directory

    @contextmanager
    def open_atomic(self, path: PathLike, mode: str = "w") -> Iterator[io.IOBase]:
        """Context manager yielding a temp file that replaces `path` on success"""
        target = Path(path)
        self.ensure_dir(target.parent)
        binary = "b" in mode
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=str(target.parent))
        handle = os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"encoding": "utf-8", "newline": ""}))
        try:
            yield handle
            handle.flush()
            os.fsync(handle.fileno())
            handle.close()
            os.replace(tmp_name, target)
        except Exception as e:
            handle.close()
            if os.path.exists(tmp_name):
                os.remove(tmp_name)
            logger.error(f"Write failed for {target}: {e}")
            raise

    def write_bytes(self, path: PathLike, payload: bytes) -> Path:
        with self.open_atomic(path, "wb") as handle:
            handle.write(payload)
        return Path(path)

    def write_text(self, path: PathLike, text: str) -> Path:
        with self.open_atomic(path, "w") as handle:
            handle.write(text)
        return Path(path)

    def write_json(self, path: PathLike, document: Any) -> Path:
        """Serialize with sorted keys so reruns are byte-identical"""
        text = json.dumps(document, indent=2, sort_keys=True, allow_nan=False)
        return self.write_text(path, text + "\n")


# Global storage instance
storage = Storage()
