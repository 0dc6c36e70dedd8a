"""Top-level train/predict operations over a run manifest."""

from __future__ import annotations

from pathlib import Path

from .external import ExternalBackend
from .manifest import RunManifest
from .tiny import TinyBackend


def _backend_for(manifest: RunManifest):
    if manifest.backend == "tiny":
        return TinyBackend()
    if manifest.backend == "external":
        missing = [key for key in ("train_command", "predict_command") if key not in manifest.external]
        if missing:
            raise ValueError(f"manifest: external backend needs {missing} under 'external'")
        return ExternalBackend(
            train_command=str(manifest.external["train_command"]),
            predict_command=str(manifest.external["predict_command"]),
        )
    raise ValueError(f"manifest: unknown backend {manifest.backend!r} (expected 'tiny' or 'external')")


def train(manifest: RunManifest) -> Path:
    """Fine-tune per the manifest and return the model artifact path."""
    manifest.validate_data()
    return _backend_for(manifest).train(manifest)


def predict(manifest: RunManifest, model: str | Path | None = None) -> Path:
    """Run inference on the manifest's test file and return the prediction
    JSONL path. ``model`` defaults to the manifest's artifact path."""
    manifest.validate_data()
    model_path = Path(model) if model is not None else manifest.out_model
    if not model_path.exists():
        raise FileNotFoundError(f"model artifact does not exist: {model_path}")
    return _backend_for(manifest).predict(manifest, model_path)
