"""Synthetic exchange corpora and ready-to-run manifests."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

_MATERIALS = ("PtCo", "PtNi", "PdCo", "PtFe", "NiCo")


def make_exchange_entries(n_docs: int = 5, prefix: str = "doc") -> list[dict]:
    """Hand-countable two-sentence documents in the exchange convention:
    global inclusive token indices, ner/relations parallel to sentences."""
    entries = []
    for i in range(n_docs):
        material = _MATERIALS[i % len(_MATERIALS)]
        entries.append(
            {
                "doc_key": f"{prefix}{i:02d}",
                "dataset": "smoke",
                "sentences": [
                    [material, "on", "carbon", "works", "."],
                    ["Activity", "of", "0.9", "V", "held", "."],
                ],
                "ner": [
                    [[0, 0, "catalyst"], [2, 2, "support"]],
                    [[5, 5, "property"], [7, 8, "value"]],
                ],
                "relations": [
                    [[0, 0, 2, 2, "related_to"]],
                    [[5, 5, 7, 8, "related_to"]],
                ],
            }
        )
    return entries


def write_jsonl(path: Path, entries: list[dict]) -> Path:
    path.write_text("".join(json.dumps(e) + "\n" for e in entries), encoding="utf-8")
    return path


def write_manifest(path: Path, obj: dict) -> Path:
    path.write_text(json.dumps(obj, indent=2), encoding="utf-8")
    return path


@pytest.fixture()
def smoke_manifest(tmp_path) -> Path:
    """A complete 5-document run: train/dev/test files plus the manifest."""
    write_jsonl(tmp_path / "train.jsonl", make_exchange_entries(5, "train"))
    write_jsonl(tmp_path / "dev.jsonl", make_exchange_entries(2, "dev"))
    write_jsonl(tmp_path / "test.jsonl", make_exchange_entries(2, "test"))
    return write_manifest(
        tmp_path / "run.json",
        {
            "pretrained": "tiny",
            "train": "train.jsonl",
            "dev": "dev.jsonl",
            "test": "test.jsonl",
            "epochs": 1,
            "out_predictions": "out/predictions.jsonl",
        },
    )
