"""The run manifest: one JSON file describing a fine-tune/inference run.

Required keys: ``pretrained`` (model identifier), ``train``/``dev``/``test``
(exchange JSONL paths), and ``out_predictions``. Everything else has framework
defaults. Relative paths resolve against the manifest file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .exchange import read_segments

_REQUIRED = ("pretrained", "train", "dev", "test", "out_predictions")
_PATH_KEYS = ("train", "dev", "test", "out_predictions", "out_model")


@dataclass(frozen=True, slots=True)
class RunManifest:
    pretrained: str
    train: Path
    dev: Path
    test: Path
    out_predictions: Path
    out_model: Path
    backend: str = "tiny"
    epochs: int = 1
    learning_rate: float = 0.1
    seed: int = 13
    device: str = "cpu"
    max_span_width: int = 4
    external: dict = field(default_factory=dict)

    @classmethod
    def from_obj(cls, obj: dict, base_dir: Path | None = None) -> "RunManifest":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ValueError(f"manifest: unknown keys {unknown}")
        missing = [key for key in _REQUIRED if key not in obj]
        if missing:
            raise ValueError(f"manifest: missing required keys {missing}")

        values = dict(obj)
        base = base_dir or Path.cwd()
        for key in _PATH_KEYS:
            if key in values:
                values[key] = Path(base, values[key])
        values.setdefault("out_model", Path(values["out_predictions"]).parent / "model.pt")
        for key in ("epochs", "seed", "max_span_width"):
            if key in values:
                values[key] = int(values[key])
        if "learning_rate" in values:
            values["learning_rate"] = float(values["learning_rate"])
        manifest = cls(**values)
        if manifest.epochs < 1:
            raise ValueError(f"manifest: epochs must be >= 1, got {manifest.epochs}")
        if manifest.max_span_width < 1:
            raise ValueError(f"manifest: max_span_width must be >= 1, got {manifest.max_span_width}")
        return manifest

    @classmethod
    def from_file(cls, path: str | Path) -> "RunManifest":
        path = Path(path)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise ValueError(f"{path}: manifest must be a JSON object")
        return cls.from_obj(obj, base_dir=path.parent)

    def to_obj(self) -> dict:
        obj = {
            "pretrained": self.pretrained,
            "backend": self.backend,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "device": self.device,
            "max_span_width": self.max_span_width,
        }
        for key in _PATH_KEYS:
            obj[key] = str(getattr(self, key))
        if self.external:
            obj["external"] = dict(self.external)
        return obj

    def validate_data(self) -> None:
        """Check the manifest invariant: every referenced data file exists and
        parses as exchange JSONL."""
        for key in ("train", "dev", "test"):
            path = getattr(self, key)
            if not path.exists():
                raise FileNotFoundError(f"manifest {key} file does not exist: {path}")
            read_segments(path)
