import json
import os
from pathlib import Path

import numpy as np
import pytest
import yaml

from policyrefactor.cli import EXIT_ARTIFACT, EXIT_CONFIG, EXIT_OK, main
from policyrefactor.config import ConfigError, load_config


@pytest.fixture
def out_root(tmp_path, monkeypatch):
    monkeypatch.setenv("POLICYREFACTOR_OUT_ROOT", str(tmp_path))
    return tmp_path


def _write_config(tmp_path, data):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(data))
    return str(path)


# ------------------------------------------------------------------- config
def test_defaults_validate():
    config = load_config(None)
    assert config["task"] == "pacman"
    config.validate()


def test_unknown_key_rejected(tmp_path):
    path = _write_config(tmp_path, {"task": "pacman", "bogus": 1})
    with pytest.raises(ConfigError, match="unknown config key 'bogus'"):
        load_config(path)


def test_unknown_nested_key_rejected(tmp_path):
    path = _write_config(tmp_path, {"refactor": {"nope": 3}})
    with pytest.raises(ConfigError, match="refactor.nope"):
        load_config(path)


def test_type_mismatch_rejected(tmp_path):
    path = _write_config(tmp_path, {"seed": "abc"})
    with pytest.raises(ConfigError, match="seed"):
        load_config(path)


def test_override_sets_nested_key():
    config = load_config(None, overrides=["refactor.steps=123", "task=falling_digit"])
    assert config.section("refactor")["steps"] == 123
    assert config["task"] == "falling_digit"


def test_override_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        load_config(None, overrides=["refactor.zzz=1"])


def test_config_hash_stable_and_sensitive():
    a = load_config(None)
    b = load_config(None)
    c = load_config(None, overrides=["seed=5"])
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


# ---------------------------------------------------------------------- cli
def test_dry_run_is_side_effect_free(out_root, tmp_path, capsys):
    path = _write_config(tmp_path, {"task": "multi_mnist", "output_dir": "exp"})
    assert main(["gen-data", "--config", path, "--dry-run"]) == EXIT_OK
    assert "config ok" in capsys.readouterr().out
    assert not (out_root / "exp").exists()


def test_bad_config_exits_2(tmp_path, capsys):
    path = _write_config(tmp_path, {"task": "nope"})
    assert main(["gen-data", "--config", path]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_artifact_exits_3(out_root, tmp_path, capsys):
    path = _write_config(tmp_path, {"task": "pacman", "output_dir": "exp"})
    assert main(["evaluate", "--config", path]) == EXIT_ARTIFACT
    assert "artifact error" in capsys.readouterr().err


def test_gen_data_glyph_atlas(out_root, tmp_path):
    path = _write_config(tmp_path, {"task": "pacman", "output_dir": "exp",
                                    "gen_data": {"artifact": "glyph_atlas"}})
    assert main(["gen-data", "--config", path]) == EXIT_OK
    atlas = out_root / "exp" / "gen_data" / "atlas.glya"
    assert atlas.exists()
    from policyrefactor import glyphs

    assert len(glyphs.read_atlas(str(atlas))) == 10
    manifest = json.loads((out_root / "exp" / "gen_data" / "run_manifest.json").read_text())
    assert manifest["stage"] == "gen_data"
    assert len(manifest["config_hash"]) == 64


def test_gen_data_records_roundtrip(out_root, tmp_path):
    path = _write_config(tmp_path, {
        "task": "pacman", "output_dir": "exp", "seed": 7,
        "gen_data": {"artifact": "records", "episodes": 3, "objects": 2},
    })
    assert main(["gen-data", "--config", path]) == EXIT_OK
    shard = out_root / "exp" / "gen_data" / "records.prec"
    from policyrefactor.envs import read_record_stream

    records = read_record_stream(str(shard))
    assert len(records) == 3
    assert records[0].env_id == 1
    assert records[0].frames is not None
    summary = json.loads((out_root / "exp" / "gen_data" / "summary.json").read_text())
    assert summary["episodes"] == 3


def test_multi_mnist_pipeline_end_to_end(out_root, tmp_path):
    # tiny gen-data -> refactor -> evaluate chain
    path = _write_config(tmp_path, {
        "task": "multi_mnist",
        "output_dir": "exp",
        "seed": 3,
        "gen_data": {"n_frames": 60},
        "refactor": {"student": "gnn", "boxes": "gt", "steps": 30, "batch_size": 8},
        "evaluate": {"episodes": 20, "boxes": "gt"},
    })
    assert main(["gen-data", "--config", path]) == EXIT_OK
    assert main(["refactor", "--config", path]) == EXIT_OK
    assert main(["evaluate", "--config", path]) == EXIT_OK
    payload = json.loads((out_root / "exp" / "evaluate" / "evaluate.json").read_text())
    assert payload["metric"] == "accuracy_4_digits"
    assert 0.0 <= payload["value"] <= 1.0


def test_evaluate_refuses_task_mismatch(out_root, tmp_path):
    mm = _write_config(tmp_path, {
        "task": "multi_mnist", "output_dir": "exp", "gen_data": {"n_frames": 40},
        "refactor": {"steps": 10, "batch_size": 8},
    })
    assert main(["gen-data", "--config", mm]) == EXIT_OK
    assert main(["refactor", "--config", mm]) == EXIT_OK
    student = out_root / "exp" / "refactor" / "student.pt"
    other = _write_config(tmp_path, {
        "task": "pacman", "output_dir": "exp2",
        "evaluate": {"student_checkpoint": str(student)},
    })
    assert main(["evaluate", "--config", other]) == EXIT_ARTIFACT


def test_end_to_end_determinism(out_root, tmp_path):
    # the same config and seed reproduce identical metric files
    def run(exp):
        path = _write_config(tmp_path, {
            "task": "multi_mnist", "output_dir": exp, "seed": 9,
            "gen_data": {"n_frames": 50},
            "refactor": {"steps": 20, "batch_size": 8},
            "evaluate": {"episodes": 15},
        })
        assert main(["gen-data", "--config", path]) == EXIT_OK
        assert main(["refactor", "--config", path]) == EXIT_OK
        assert main(["evaluate", "--config", path]) == EXIT_OK
        return (out_root / exp / "evaluate" / "evaluate.json").read_text()

    assert json.loads(run("a"))["value"] == json.loads(run("b"))["value"]


def test_sweep_and_plot(out_root, tmp_path):
    path = _write_config(tmp_path, {
        "task": "pacman", "output_dir": "exp", "seed": 1,
        "collect_demos": {"n_frames": 120},
        "refactor": {"steps": 25, "batch_size": 8},
        "sweep": {"values": [2, 3], "episodes": 4},
    })
    assert main(["collect-demos", "--config", path]) == EXIT_OK
    assert main(["refactor", "--config", path]) == EXIT_OK
    assert main(["sweep", "--config", path]) == EXIT_OK
    csv_path = out_root / "exp" / "sweep" / "sweep.csv"
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "objects,mean,stdev,episodes"
    assert len(lines) == 3  # header + 2 sweep points
    assert main(["plot", "--config", path]) == EXIT_OK
    assert (out_root / "exp" / "plot" / "plot.png").stat().st_size > 1000


def test_robustness_stage_small(out_root, tmp_path):
    path = _write_config(tmp_path, {
        "task": "pacman", "output_dir": "exp", "seed": 4,
        "collect_demos": {"n_frames": 150},
        "robustness": {"drop_rates": [0.5], "false_positives": 3,
                       "eval_objects": 3, "episodes": 4, "steps": 40},
    })
    assert main(["collect-demos", "--config", path]) == EXIT_OK
    assert main(["robustness", "--config", path]) == EXIT_OK
    rows = json.loads((out_root / "exp" / "robustness" / "robustness.json").read_text())
    legs = {r["leg"] for r in rows}
    assert legs == {"baseline", "drop_0.5", "fp_3"}
    assert all("mean" in r and "stdev" in r for r in rows)


def test_export_features(out_root, tmp_path):
    path = _write_config(tmp_path, {
        "task": "multi_mnist", "output_dir": "exp", "seed": 2,
        "gen_data": {"n_frames": 40},
        "refactor": {"steps": 10, "batch_size": 8},
        "export_features": {"n_frames": 10},
    })
    assert main(["gen-data", "--config", path]) == EXIT_OK
    assert main(["refactor", "--config", path]) == EXIT_OK
    assert main(["export-features", "--config", path]) == EXIT_OK
    blob = np.load(out_root / "exp" / "export_features" / "features.npz")
    labels = (out_root / "exp" / "export_features" / "labels.jsonl").read_text()
    assert blob["features"].shape[0] == len(labels.strip().splitlines())
    assert blob["features"].shape[0] > 0
