import hashlib
import json
import math
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def file_digest(filepath: str | Path) -> str:
    sha = hashlib.sha256()
    with open(filepath, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            sha.update(chunk)
    return sha.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        # repr of a float round-trips exactly; NaN and Inf become null
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(filepath: str | Path, obj: dict) -> None:
    with open(filepath, "w", encoding="utf-8") as f:
        json.dump(_jsonable(obj), f, indent=2)
        f.write("\n")


def read_json(filepath: str | Path) -> dict:
    with open(filepath, "r", encoding="utf-8") as f:
        return json.load(f)


@dataclass
class RunManifest:
    """Record of one command: its configuration, inputs by digest, outputs and timings."""

    command: str
    config: dict
    seed: int | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    dry_run: bool = False
    schema_version: int = SCHEMA_VERSION

    def add_input(self, filepath: str | Path) -> None:
        self.inputs[str(filepath)] = file_digest(filepath)

    def add_output(self, filepath: str | Path) -> None:
        self.outputs.append(str(filepath))

    def to_dict(self) -> dict:
        manifest = asdict(self)
        manifest["python"] = platform.python_version()
        return manifest

    def write(self, filepath: str | Path) -> None:
        write_json(filepath, self.to_dict())
