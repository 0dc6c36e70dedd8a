"""Command-template backend for an externally installed trainer.

The manifest's ``external`` object supplies shell command templates with
``{config}``, ``{model}``, ``{test}``, and ``{out}`` placeholders. The backend
materialises the manifest as a config JSON next to the model artifact, runs
the commands, and surfaces any failure verbatim. It never interprets the
trainer's internals.
"""

from __future__ import annotations

import json
import logging
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .exchange import ENTITY_LABELS, RELATION_LABELS
from .manifest import RunManifest

logger = logging.getLogger(__name__)


def _run(command: str) -> None:
    logger.info("running: %s", command)
    proc = subprocess.run(command, shell=True, capture_output=True, text=True)
    if proc.stdout:
        logger.info("%s", proc.stdout.rstrip())
    if proc.returncode != 0:
        raise RuntimeError(
            f"external command failed with exit code {proc.returncode}: {command}\n{proc.stderr.rstrip()}"
        )


@dataclass(frozen=True, slots=True)
class ExternalBackend:
    name = "external"

    train_command: str
    predict_command: str

    def _write_config(self, manifest: RunManifest) -> Path:
        config = manifest.to_obj()
        config["entity_labels"] = list(ENTITY_LABELS)
        config["relation_labels"] = list(RELATION_LABELS)
        path = manifest.out_model.parent / "external_config.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(config, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        return path

    def train(self, manifest: RunManifest) -> Path:
        config = self._write_config(manifest)
        _run(self.train_command.format(config=config, model=manifest.out_model))
        if not manifest.out_model.exists():
            raise RuntimeError(f"external trainer finished but produced no artifact at {manifest.out_model}")
        return manifest.out_model

    def predict(self, manifest: RunManifest, model_path: Path) -> Path:
        config = self._write_config(manifest)
        manifest.out_predictions.parent.mkdir(parents=True, exist_ok=True)
        _run(
            self.predict_command.format(
                config=config, model=model_path, test=manifest.test, out=manifest.out_predictions
            )
        )
        if not manifest.out_predictions.exists():
            raise RuntimeError(f"external predictor finished but produced no file at {manifest.out_predictions}")
        return manifest.out_predictions
