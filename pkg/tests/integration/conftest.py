from __future__ import annotations

from pathlib import Path

import pytest

from retrodiff.cli.commands import cmd_synth

TOY_CONFIG = """\
layers=1
heads=2
d_model=16
d_ff=32
max_len=64
length_bound=24
steps=6
pad_limit=4
dropout=0.0
epochs=2
batch_size=4
learning_rate=0.001
seed=5
"""


@pytest.fixture(scope="module")
def reaction_files(tmp_path_factory: pytest.TempPathFactory) -> tuple[Path, Path]:
    root = tmp_path_factory.mktemp("reactions")
    return cmd_synth(root / "train.txt", 16, seed=1), cmd_synth(root / "test.txt", 4, seed=2)


@pytest.fixture
def write_config(tmp_path: Path, reaction_files: tuple[Path, Path]):
    def _write(name: str, **overrides: object) -> Path:
        lines = [TOY_CONFIG, f"train_path={reaction_files[0]}", f"output_dir={tmp_path / name}"]
        lines.extend(f"{key}={value}" for key, value in overrides.items())
        path = tmp_path / f"{name}.cfg"
        path.write_text("\n".join(lines) + "\n")
        return path

    return _write
