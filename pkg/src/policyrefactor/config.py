"""Pipeline configuration: a single YAML file with per-stage sections.

Unknown keys are rejected; every stage section is optional and falls back
to task defaults. ``--set a.b=value`` overrides nest through the dots.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import yaml


class ConfigError(ValueError):
    pass


_SCHEMA: dict[str, Any] = {
    "task": str,
    "seed": int,
    "preset": str,  # desk | paper
    "output_dir": str,
    "background": str,  # black | textured | images:<dir>
    "strict_determinism": bool,
    "gen_data": {
        "artifact": str,  # dataset | records | glyph_atlas
        "n_frames": int,
        "digits_low": int,
        "digits_high": int,
        "fixed_digits": (int, type(None)),
        "episodes": int,
        "objects": int,
        "with_frames": bool,
        "policy": str,  # heuristic | random
    },
    "train_teacher": {
        "total_steps": int,
        "learning_rate": float,
        "eps_anneal_steps": int,
        "replay_capacity": int,
        "learn_start": int,
        "eval_every": int,
        "eval_episodes": int,
        "reward_threshold": float,
        "objects": int,
    },
    "collect_demos": {
        "teacher": str,  # heuristic | dqn
        "teacher_checkpoint": (str, type(None)),
        "n_frames": int,
        "epsilon": float,
        "min_return": (float, type(None)),
        "objects": int,
    },
    "train_detector": {
        "steps": int,
        "batch_size": int,
        "learning_rate": float,
        "frames_from": (str, type(None)),
        "background_branch": (bool, type(None)),
    },
    "refactor": {
        "student": str,  # gnn | gnn_pointstyle | gnn_edgeconv | cnn | relation_net
        "boxes": str,  # gt | detector
        "detector_checkpoint": (str, type(None)),
        "dataset": (str, type(None)),
        "steps": int,
        "batch_size": int,
        "learning_rate": float,
        "data_parameters": bool,
        "sigma_lr": float,
        "drop_rate": float,
        "false_positives": int,
        "augment_fraction": float,
        "val_fraction": float,
    },
    "evaluate": {
        "episodes": int,
        "objects": int,
        "boxes": str,
        "student_checkpoint": (str, type(None)),
        "detector_checkpoint": (str, type(None)),
    },
    "sweep": {
        "values": list,
        "episodes": int,
        "boxes": str,
        "student_checkpoint": (str, type(None)),
    },
    "robustness": {
        "drop_rates": list,
        "false_positives": int,
        "eval_objects": int,
        "episodes": int,
        "steps": int,
    },
    "export_features": {
        "n_frames": int,
        "boxes": str,
        "student_checkpoint": (str, type(None)),
        "detector_checkpoint": (str, type(None)),
    },
    "plot": {
        "input": (str, type(None)),
        "x_column": str,
        "y_column": str,
    },
}

_DEFAULTS: dict[str, Any] = {
    "task": "pacman",
    "seed": 0,
    "preset": "desk",
    "output_dir": "run",
    "background": "black",
    "strict_determinism": False,
    "gen_data": {"artifact": "dataset", "n_frames": 2000, "digits_low": 1,
                 "digits_high": 3, "fixed_digits": None, "episodes": 100,
                 "objects": 0, "with_frames": True, "policy": "heuristic"},
    "train_teacher": {"objects": 0},
    "collect_demos": {"teacher": "heuristic", "teacher_checkpoint": None,
                      "n_frames": 20_000, "epsilon": 0.0, "min_return": None,
                      "objects": 0},
    "train_detector": {"steps": 10_000, "batch_size": 8, "learning_rate": 1e-3,
                       "frames_from": None, "background_branch": None},
    "refactor": {"student": "gnn", "boxes": "gt", "detector_checkpoint": None,
                 "dataset": None, "steps": 5_000, "batch_size": 64,
                 "learning_rate": 1e-3, "data_parameters": False, "sigma_lr": 0.1,
                 "drop_rate": 0.0, "false_positives": 0, "augment_fraction": 0.0,
                 "val_fraction": 0.1},
    "evaluate": {"episodes": 100, "objects": 0, "boxes": "gt",
                 "student_checkpoint": None, "detector_checkpoint": None},
    "sweep": {"values": [], "episodes": 100, "boxes": "gt",
              "student_checkpoint": None},
    "robustness": {"drop_rates": [0.1, 0.5, 0.9], "false_positives": 25,
                   "eval_objects": 5, "episodes": 50, "steps": 2_500},
    "export_features": {"n_frames": 200, "boxes": "gt", "student_checkpoint": None,
                        "detector_checkpoint": None},
    "plot": {"input": None, "x_column": "objects", "y_column": "mean"},
}


def _check_section(data: Any, schema: Any, path: str) -> None:
    if isinstance(schema, dict):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'config'} must be a mapping")
        for key, value in data.items():
            if key not in schema:
                raise ConfigError(f"unknown config key {path + key!r}")
            _check_section(value, schema[key], f"{path}{key}.")
        return
    expected = schema if isinstance(schema, tuple) else (schema,)
    if float in expected and isinstance(data, int) and not isinstance(data, bool):
        return  # ints are acceptable floats
    if not isinstance(data, expected) or (isinstance(data, bool) and bool not in expected):
        names = "/".join(t.__name__ for t in expected)
        raise ConfigError(f"config key {path[:-1]!r} must be {names}, got {type(data).__name__}")


@dataclass
class PipelineConfig:
    data: dict = field(default_factory=lambda: copy.deepcopy(_DEFAULTS))

    def __getitem__(self, key: str) -> Any:
        return self.data[key]

    def section(self, name: str) -> dict:
        return self.data[name]

    def config_hash(self) -> str:
        canonical = json.dumps(self.data, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()

    def validate(self) -> None:
        _check_section(self.data, _SCHEMA, "")
        if self.data["task"] not in ("multi_mnist", "falling_digit", "pacman"):
            raise ConfigError(f"unknown task {self.data['task']!r}")
        if self.data["preset"] not in ("desk", "paper"):
            raise ConfigError(f"unknown preset {self.data['preset']!r}")
        bg = self.data["background"]
        if bg not in ("black", "textured") and not bg.startswith("images:"):
            raise ConfigError(
                f"background must be black, textured, or images:<dir>, got {bg!r}"
            )


def _deep_merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value, f"{path}{key}.")
        else:
            out[key] = value
    return out


def load_config(path: str | None, overrides: list[str] | None = None) -> PipelineConfig:
    data = copy.deepcopy(_DEFAULTS)
    if path is not None:
        with open(path) as f:
            raw = yaml.safe_load(f) or {}
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a mapping")
        data = _deep_merge(data, raw)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, _, value = item.partition("=")
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown config key {key!r}")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown config key {key!r}")
        node[parts[-1]] = yaml.safe_load(value)
    config = PipelineConfig(data)
    config.validate()
    return config


def background_source(config: PipelineConfig):
    from .envs.backgrounds import BackgroundSource

    bg = config["background"]
    if bg == "black":
        return BackgroundSource("black")
    if bg == "textured":
        return BackgroundSource("textured")
    return BackgroundSource("images", image_dir=bg.split(":", 1)[1])
