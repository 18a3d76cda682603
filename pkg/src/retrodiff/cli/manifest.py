from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from retrodiff.errors import DatasetError

MANIFEST_FILE = "manifest.json"
_CHUNK = 1 << 16


def dataset_fingerprint(path: str | Path) -> str:
    """sha256 of the dataset file's bytes."""
    digest = hashlib.sha256()
    try:
        with Path(path).open("rb") as handle:
            while chunk := handle.read(_CHUNK):
                digest.update(chunk)
    except OSError as exc:
        raise DatasetError(f"cannot fingerprint dataset {path}: {exc}") from exc
    return digest.hexdigest()


class ModelRun(BaseModel):
    pad_limit: int
    checkpoints: list[str] = Field(default_factory=list)
    metrics: list[dict[str, str]] = Field(default_factory=list)


class RunManifest(BaseModel):
    """Everything needed to rerun a training command bit for bit."""

    config: dict[str, Any]
    seed: int
    dataset_sha256: str
    runs: list[ModelRun] = Field(default_factory=list)

    @property
    def checkpoints(self) -> list[str]:
        return [path for run in self.runs for path in run.checkpoints]

    def write(self, output_dir: str | Path) -> Path:
        target = Path(output_dir) / MANIFEST_FILE
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return target

    @classmethod
    def read(cls, path: str | Path) -> RunManifest:
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
