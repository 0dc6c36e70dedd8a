"""External-backend tests with stub commands standing in for a real trainer."""

import json

import pytest

from conftest import make_exchange_entries, write_jsonl, write_manifest
from model_runner import RunManifest, predict, train


def _external_manifest(tmp_path, train_command: str, predict_command: str) -> RunManifest:
    for name in ("train", "dev", "test"):
        write_jsonl(tmp_path / f"{name}.jsonl", make_exchange_entries(2, name))
    path = write_manifest(
        tmp_path / "m.json",
        {
            "pretrained": "some-encoder",
            "train": "train.jsonl",
            "dev": "dev.jsonl",
            "test": "test.jsonl",
            "out_predictions": "out/preds.jsonl",
            "backend": "external",
            "external": {"train_command": train_command, "predict_command": predict_command},
        },
    )
    return RunManifest.from_file(path)


class TestExternalBackend:
    def test_commands_receive_config_and_produce_outputs(self, tmp_path):
        manifest = _external_manifest(
            tmp_path,
            train_command="cp {config} {model}",
            predict_command="cp {test} {out}",
        )
        artifact = train(manifest)
        assert artifact == manifest.out_model
        config = json.loads((manifest.out_model.parent / "external_config.json").read_text(encoding="utf-8"))
        assert config["pretrained"] == "some-encoder"
        assert config["epochs"] == 1
        assert len(config["entity_labels"]) == 12
        assert len(config["relation_labels"]) == 2

        out = predict(manifest)
        assert out == manifest.out_predictions
        assert out.read_bytes() == manifest.test.read_bytes()

    def test_failure_surfaces_exit_code_and_stderr(self, tmp_path):
        manifest = _external_manifest(
            tmp_path,
            train_command="sh -c 'echo boom: the GPU is on fire >&2; exit 3'",
            predict_command="true",
        )
        with pytest.raises(RuntimeError) as exc:
            train(manifest)
        assert "exit code 3" in str(exc.value)
        assert "boom: the GPU is on fire" in str(exc.value)

    def test_trainer_that_writes_nothing_is_an_error(self, tmp_path):
        manifest = _external_manifest(tmp_path, train_command="true", predict_command="true")
        with pytest.raises(RuntimeError, match="produced no artifact"):
            train(manifest)

    def test_missing_command_templates_rejected(self, tmp_path):
        for name in ("train", "dev", "test"):
            write_jsonl(tmp_path / f"{name}.jsonl", make_exchange_entries(1))
        path = write_manifest(
            tmp_path / "m.json",
            {
                "pretrained": "some-encoder",
                "train": "train.jsonl",
                "dev": "dev.jsonl",
                "test": "test.jsonl",
                "out_predictions": "p.jsonl",
                "backend": "external",
            },
        )
        with pytest.raises(ValueError, match="needs.*train_command"):
            train(RunManifest.from_file(path))
