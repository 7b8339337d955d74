"""
CQV1 volume data access layer.

A volume is a JSON header (``<name>.json``) plus a sibling raw payload
(``<name>.raw``) of nx*ny*nz unsigned 8-bit label codes, x fastest, then y,
then z. Single bytes, so endianness is moot (stated little-endian).
"""
import json
import logging
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from app.config import settings
from app.models.volume import LABEL_CODES, LabeledVolume
from app.schemas.volume import VolumeHeader
from app.storage import storage
from app.utils.errors import MissingFileError, VolumeFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def raw_path_for(header_path: PathLike) -> Path:
    return Path(header_path).with_suffix(".raw")


class VolumeRepository:
    """Repository for CQV1 volume files"""

    @staticmethod
    def load_volume(path: PathLike) -> LabeledVolume:
        """Read a CQV1 header and its raw payload"""
        header_path = Path(path)
        if not header_path.is_file():
            raise MissingFileError(str(header_path))
        try:
            header = VolumeHeader.model_validate(json.loads(header_path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise VolumeFormatError(str(header_path), f"header is not valid JSON ({e})")
        except ValidationError as e:
            raise VolumeFormatError(str(header_path), f"invalid header ({e.errors()[0]['msg']})")

        payload_path = raw_path_for(header_path)
        if not payload_path.is_file():
            raise MissingFileError(str(payload_path))
        payload = np.frombuffer(payload_path.read_bytes(), dtype="<u1")

        nx, ny, nz = header.dims
        expected = nx * ny * nz
        if payload.size != expected:
            raise VolumeFormatError(
                str(header_path), f"size mismatch: dims {tuple(header.dims)} need {expected} bytes, payload has {payload.size}"
            )
        volume = LabeledVolume.from_flat(payload, tuple(header.dims), tuple(header.spacing_mm))
        logger.debug(f"Loaded volume {header_path} dims={volume.dims} spacing={volume.spacing}")
        return volume

    @staticmethod
    def save_volume(volume: LabeledVolume, path: PathLike) -> Path:
        """Write header and payload atomically; returns the header path"""
        header_path = Path(path).with_suffix(".json")
        header = VolumeHeader(
            magic=settings.VOLUME_MAGIC,
            dims=list(volume.dims),
            spacing_mm=list(volume.spacing),
            labels=dict(LABEL_CODES),
        )
        storage.write_bytes(raw_path_for(header_path), volume.flat_labels().astype("<u1").tobytes())
        storage.write_text(header_path, header.model_dump_json() + "\n")
        return header_path
