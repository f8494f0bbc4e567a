"""Command-line orchestrator for the two-stage pipeline.

Subcommands: gen-data, train-teacher, collect-demos, train-detector,
refactor, evaluate, sweep, robustness, export-features, plot. Every stage
reads upstream artifacts from the shared output directory (or explicit
paths in the config), writes versioned outputs plus a run manifest, and
exits 0 on success, 2 on config errors, 3 on missing/mismatched
artifacts, 4 on numeric failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, glyphs
from .config import ConfigError, PipelineConfig, background_source, load_config
from .rng import Pcg32, episode_rng

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ARTIFACT = 3
EXIT_NUMERIC = 4


class ArtifactError(RuntimeError):
    pass


def _out_dir(config: PipelineConfig, stage: str) -> Path:
    root = Path(os.environ.get("POLICYREFACTOR_OUT_ROOT", "."))
    path = root / config["output_dir"] / stage
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(path: Path, config: PipelineConfig, stage: str, extra: dict | None = None) -> None:
    manifest = {
        "stage": stage,
        "task": config["task"],
        "seed": config["seed"],
        "config_hash": config.config_hash(),
        "provenance": f"policyrefactor-{__version__}+cfg.{config.config_hash()[:12]}",
        "version": __version__,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    manifest.update(extra or {})
    with open(path / "run_manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise ArtifactError(f"missing upstream artifact {path} ({hint})")
    return path


def _check_task(config: PipelineConfig, artifact_task: str, what: str) -> None:
    if artifact_task != config["task"]:
        raise ArtifactError(
            f"{what} was produced for task {artifact_task!r} but the config "
            f"says {config['task']!r}"
        )


def _rng(config: PipelineConfig, stage: str) -> Pcg32:
    stage_key = sum(ord(c) for c in stage)
    return Pcg32(config["seed"], stream=stage_key)


def _apply_determinism(config: PipelineConfig, strict_flag: bool) -> None:
    import torch

    torch.set_num_threads(1)
    if strict_flag or config["strict_determinism"]:
        torch.use_deterministic_algorithms(True)


# ------------------------------------------------------------------- stages
def stage_gen_data(config: PipelineConfig) -> Path:
    from .demos import label_multi_mnist, save_dataset
    from .envs import rollout_record, write_record_stream
    from .tasks import TASK_INFO, make_env_factory
    from .teachers import falling_heuristic, pacman_greedy

    out = _out_dir(config, "gen_data")
    section = config.section("gen_data")
    task = config["task"]
    rng = _rng(config, "gen_data")

    if section["artifact"] == "glyph_atlas":
        glyphs.write_atlas(str(out / "atlas.glya"))
        _write_manifest(out, config, "gen_data", {"artifact": "glyph_atlas"})
        return out

    if section["artifact"] == "dataset":
        if task != "multi_mnist":
            raise ConfigError("dataset generation is the digit-sum task's path; "
                              "use artifact=records for the games")
        dataset = label_multi_mnist(
            section["n_frames"], rng,
            digits_low=section["digits_low"], digits_high=section["digits_high"],
            fixed_digits=section["fixed_digits"], background=background_source(config),
        )
        save_dataset(out / "dataset", dataset)
        _write_manifest(out, config, "gen_data",
                        {"artifact": "dataset", "samples": len(dataset)})
        return out

    if section["artifact"] == "records":
        if task == "multi_mnist":
            raise ConfigError("episode records exist for the interactive games only")
        objects = section["objects"] or TASK_INFO[task].train_objects
        factory = make_env_factory(task, objects, background_source(config),
                                   render=section["with_frames"])
        if section["policy"] == "heuristic":
            fn = pacman_greedy if task == "pacman" else falling_heuristic
            policy = lambda env, obs: fn(env.state)
        elif section["policy"] == "random":
            act_rng = rng.spawn(1)
            policy = lambda env, obs: act_rng.next_below(env().action_count if callable(env) else env.action_count)
        else:
            raise ConfigError(f"unknown rollout policy {section['policy']!r}")
        records = []
        returns = []
        for ep in range(section["episodes"]):
            env = factory()
            record = rollout_record(env, policy, episode_rng(config["seed"], ep),
                                    seed=config["seed"],
                                    with_frames=section["with_frames"])
            records.append(record)
            returns.append(record.episode_return())
        write_record_stream(str(out / "records.prec"), records)
        with open(out / "summary.json", "w") as f:
            json.dump({"episodes": len(returns), "returns": returns,
                       "mean_return": float(np.mean(returns))}, f, indent=2)
        _write_manifest(out, config, "gen_data",
                        {"artifact": "records", "episodes": len(returns)})
        return out

    raise ConfigError(f"unknown gen_data artifact {section['artifact']!r}")


def stage_train_teacher(config: PipelineConfig) -> Path:
    from .tasks import TASK_INFO, dqn_config, make_env_factory
    from .teachers import dqn_train, save_teacher

    task = config["task"]
    if task == "multi_mnist":
        raise ConfigError("the digit-sum task is supervised; it has no teacher stage")
    out = _out_dir(config, "train_teacher")
    section = config.section("train_teacher")
    cfg = dqn_config(task, config["preset"])
    for key in ("total_steps", "learning_rate", "eps_anneal_steps", "replay_capacity",
                "learn_start", "eval_every", "eval_episodes", "reward_threshold"):
        if key in section:
            cfg = type(cfg)(**{**cfg.__dict__, key: section[key]})
    objects = section.get("objects") or TASK_INFO[task].train_objects
    factory = make_env_factory(task, objects, background_source(config))
    result = dqn_train(factory, cfg, _rng(config, "train_teacher"))
    save_teacher(str(out / "teacher.pt"), result.qfunction,
                 extra={"task": task, "best_eval_return": result.best_eval_return})
    with open(out / "history.json", "w") as f:
        json.dump(result.history, f, indent=2)
    _write_manifest(out, config, "train_teacher",
                    {"best_eval_return": result.best_eval_return,
                     "reached_threshold": result.reached_threshold})
    return out


def stage_collect_demos(config: PipelineConfig) -> Path:
    from .demos import collect, filter_episodes, save_dataset
    from .tasks import TASK_INFO, make_env_factory
    from .teachers import FallingHeuristicTeacher, PacmanGreedyTeacher, QFunctionTeacher, load_teacher

    task = config["task"]
    if task == "multi_mnist":
        raise ConfigError("use gen-data for the digit-sum dataset")
    out = _out_dir(config, "collect_demos")
    section = config.section("collect_demos")
    objects = section["objects"] or TASK_INFO[task].train_objects
    factory = make_env_factory(task, objects, background_source(config))

    if section["teacher"] == "heuristic":
        teacher = PacmanGreedyTeacher() if task == "pacman" else FallingHeuristicTeacher()
        teacher_hash = "heuristic"
    elif section["teacher"] == "dqn":
        ckpt = section["teacher_checkpoint"] or str(
            _out_dir(config, "train_teacher") / "teacher.pt")
        path = _require(Path(ckpt), "run train-teacher first or set "
                                    "collect_demos.teacher_checkpoint")
        teacher = QFunctionTeacher(load_teacher(str(path)))
        teacher_hash = path.name
    else:
        raise ConfigError(f"unknown teacher {section['teacher']!r}")

    dataset = collect(factory, teacher, section["n_frames"], section["epsilon"],
                      _rng(config, "collect_demos"))
    if section["min_return"] is not None:
        dataset = filter_episodes(dataset, section["min_return"])
    dataset.metadata.update({"teacher": teacher_hash, "objects": objects})
    save_dataset(out / "demos", dataset)
    _write_manifest(out, config, "collect_demos",
                    {"samples": len(dataset), "teacher": teacher_hash})
    return out


def _load_frames_for_detector(config: PipelineConfig) -> np.ndarray:
    from .demos import load_dataset

    section = config.section("train_detector")
    if section["frames_from"]:
        path = _require(Path(section["frames_from"]), "set train_detector.frames_from "
                                                      "to a dataset directory")
    elif config["task"] == "multi_mnist":
        path = _require(_out_dir(config, "gen_data") / "dataset",
                        "run gen-data first")
    else:
        path = _require(_out_dir(config, "collect_demos") / "demos",
                        "run collect-demos first")
    dataset = load_dataset(path)
    _check_task(config, dataset.task_id, f"dataset {path}")
    return dataset.frames


def stage_train_detector(config: PipelineConfig) -> Path:
    from .detector import DetectorTrainConfig, save_detector, train_detector
    from .tasks import detector_space_config, detector_train_config

    out = _out_dir(config, "train_detector")
    section = config.section("train_detector")
    frames = _load_frames_for_detector(config)

    background_branch = section["background_branch"]
    if background_branch is None and config["background"] == "black":
        background_branch = False  # black background: no background branch
    space = detector_space_config(config["task"], config["preset"],
                                  background=background_branch)
    base = detector_train_config(config["task"], config["preset"])
    train_cfg = DetectorTrainConfig(
        steps=section["steps"] or base.steps,
        batch_size=section["batch_size"] or base.batch_size,
        learning_rate=section["learning_rate"],
    )
    result = train_detector(frames, space, train_cfg, _rng(config, "train_detector"))
    save_detector(str(out / "detector.pt"), result.model, result.step,
                  extra={"task": config["task"], "aborted": result.aborted})
    with open(out / "history.json", "w") as f:
        json.dump(result.history, f, indent=2)
    _write_manifest(out, config, "train_detector",
                    {"steps": result.step, "aborted": result.aborted})
    return out


def _load_demo_dataset(config: PipelineConfig, override: str | None):
    from .demos import load_dataset

    if override:
        path = _require(Path(override), "dataset directory")
    elif config["task"] == "multi_mnist":
        path = _require(_out_dir(config, "gen_data") / "dataset", "run gen-data first")
    else:
        path = _require(_out_dir(config, "collect_demos") / "demos",
                        "run collect-demos first")
    dataset = load_dataset(path)
    _check_task(config, dataset.task_id, f"dataset {path}")
    return dataset


def _box_source_for(config: PipelineConfig, dataset, kind: str, checkpoint: str | None):
    from .detector import load_detector
    from .students import DetectorBoxSource, GtBoxSource

    if kind == "gt":
        return GtBoxSource(dataset)
    if kind == "detector":
        ckpt = checkpoint or str(_out_dir(config, "train_detector") / "detector.pt")
        path = _require(Path(ckpt), "run train-detector first or set a checkpoint path")
        model, _ = load_detector(str(path))
        return DetectorBoxSource(dataset, model)
    raise ConfigError(f"unknown box source {kind!r}")


def stage_refactor(config: PipelineConfig) -> Path:
    from .students import StudentTrainConfig, train_student
    from .tasks import student_spec

    out = _out_dir(config, "refactor")
    section = config.section("refactor")
    dataset = _load_demo_dataset(config, section["dataset"])
    spec = student_spec(config["task"], section["student"], config["preset"])
    box_source = None
    if spec.graph is not None:
        box_source = _box_source_for(config, dataset, section["boxes"],
                                     section["detector_checkpoint"])
    train_cfg = StudentTrainConfig(
        steps=section["steps"],
        batch_size=section["batch_size"],
        learning_rate=section["learning_rate"],
        data_parameters=section["data_parameters"],
        sigma_lr=section["sigma_lr"],
        drop_rate=section["drop_rate"],
        false_positives=section["false_positives"],
        augment_fraction=section["augment_fraction"],
        val_fraction=section["val_fraction"],
    )
    result = train_student(dataset, spec, box_source, train_cfg,
                           _rng(config, "refactor"))
    result.policy.save(str(out / "student.pt"),
                       extra={"task": config["task"], "boxes": section["boxes"]})
    with open(out / "history.json", "w") as f:
        json.dump(result.history, f, indent=2)
    if result.sigmas is not None:
        np.save(out / "sigmas.npy", result.sigmas)
    _write_manifest(out, config, "refactor",
                    {"student": section["student"], "boxes": section["boxes"],
                     "best_val_loss": result.best_val_loss})
    return out


def _load_student(config: PipelineConfig, checkpoint: str | None):
    from .students.policy import StudentPolicy

    ckpt = checkpoint or str(_out_dir(config, "refactor") / "student.pt")
    path = _require(Path(ckpt), "run refactor first or set a checkpoint path")
    policy = StudentPolicy.load(str(path))
    _check_task(config, policy.spec.task_id, f"student {path}")
    return policy


def _eval_box_source(config: PipelineConfig, kind: str, checkpoint: str | None):
    from .detector import load_detector

    if kind == "gt":
        return "gt"
    ckpt = checkpoint or str(_out_dir(config, "train_detector") / "detector.pt")
    path = _require(Path(ckpt), "run train-detector first")
    model, _ = load_detector(str(path))
    return model


def stage_evaluate(config: PipelineConfig) -> Path:
    from .demos import label_multi_mnist
    from .evals import StudentPipelinePolicy, accuracy_multi_mnist, eval_policy, predict_dataset
    from .tasks import TASK_INFO, make_env_factory

    out = _out_dir(config, "evaluate")
    section = config.section("evaluate")
    student = _load_student(config, section["student_checkpoint"])
    task = config["task"]
    rng = _rng(config, "evaluate")

    if task == "multi_mnist":
        test_set = label_multi_mnist(section["episodes"], rng, fixed_digits=4,
                                     background=background_source(config))
        box_source = _eval_box_source(config, section["boxes"],
                                      section["detector_checkpoint"])
        preds = predict_dataset(student, test_set, box_source=box_source)
        accuracy = accuracy_multi_mnist(preds[:, 0], test_set.targets[:, 0])
        payload = {"metric": "accuracy_4_digits", "value": accuracy,
                   "samples": len(test_set)}
    else:
        objects = section["objects"] or TASK_INFO[task].train_objects
        factory = make_env_factory(task, objects, background_source(config))
        policy = StudentPipelinePolicy(
            student, box_source=_eval_box_source(config, section["boxes"],
                                                 section["detector_checkpoint"]))
        report = eval_policy(policy, factory, section["episodes"], rng)
        payload = {"metric": "mean_episode_reward", "value": report.mean,
                   "stdev": report.stdev, "episodes": report.episodes,
                   "objects": objects}

    with open(out / "evaluate.json", "w") as f:
        json.dump(payload, f, indent=2)
    with open(out / "evaluate.csv", "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(payload.keys()))
        writer.writeheader()
        writer.writerow(payload)
    _write_manifest(out, config, "evaluate", payload)
    return out


def stage_sweep(config: PipelineConfig) -> Path:
    from .evals import StudentPipelinePolicy, SweepSpec, sweep
    from .tasks import TASK_INFO, make_env_factory

    task = config["task"]
    if task == "multi_mnist":
        raise ConfigError("sweeps vary object counts of the interactive games")
    out = _out_dir(config, "sweep")
    section = config.section("sweep")
    student = _load_student(config, section["student_checkpoint"])
    values = [int(v) for v in (section["values"] or TASK_INFO[task].eval_objects)]
    spec = SweepSpec(env_id=task, variable="n_dots" if task == "pacman" else "n_targets",
                     values=values, episodes_per_point=section["episodes"],
                     seed=config["seed"])
    policy = StudentPipelinePolicy(student, box_source=_eval_box_source(
        config, section["boxes"], None))
    bg = background_source(config)
    reports = sweep(policy, spec,
                    lambda v: make_env_factory(task, v, bg))
    rows = [{"objects": v, "mean": r.mean, "stdev": r.stdev, "episodes": r.episodes}
            for v, r in sorted(reports.items())]
    with open(out / "sweep.csv", "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["objects", "mean", "stdev", "episodes"])
        writer.writeheader()
        writer.writerows(rows)
    with open(out / "sweep.json", "w") as f:
        json.dump(rows, f, indent=2)
    _write_manifest(out, config, "sweep", {"points": len(rows)})
    return out


def stage_robustness(config: PipelineConfig) -> Path:
    from .evals import RobustnessSpec, robustness_sweep
    from .students import GtBoxSource, StudentTrainConfig
    from .tasks import make_env_factory, student_spec

    task = config["task"]
    if task == "multi_mnist":
        raise ConfigError("the robustness grid retrains control-task students")
    out = _out_dir(config, "robustness")
    section = config.section("robustness")
    dataset = _load_demo_dataset(config, None)
    spec = RobustnessSpec(
        drop_rates=tuple(float(r) for r in section["drop_rates"]),
        false_positives=section["false_positives"],
        eval_value=section["eval_objects"],
        eval_episodes=section["episodes"],
    )
    bg = background_source(config)
    reports = robustness_sweep(
        dataset,
        student_spec(task, "gnn", config["preset"]),
        GtBoxSource(dataset),
        StudentTrainConfig(steps=section["steps"], val_fraction=0.1),
        lambda v: make_env_factory(task, v, bg),
        spec,
        _rng(config, "robustness"),
    )
    rows = [
        {"leg": name, "drop_rate": r.metadata["drop_rate"],
         "false_positives": r.metadata["false_positives"], "mean": r.mean,
         "stdev": r.stdev, "episodes": r.episodes}
        for name, r in reports.items()
    ]
    with open(out / "robustness.csv", "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    with open(out / "robustness.json", "w") as f:
        json.dump(rows, f, indent=2)
    _write_manifest(out, config, "robustness", {"legs": [r["leg"] for r in rows]})
    return out


def stage_export_features(config: PipelineConfig) -> Path:
    from .demos import label_multi_mnist
    from .evals import label_detections
    from .students.graphs import GraphBatch, detections_from_gt
    from .tasks import TASK_INFO, make_env_factory

    out = _out_dir(config, "export_features")
    section = config.section("export_features")
    student = _load_student(config, section["student_checkpoint"])
    if not student.is_graph_policy:
        raise ConfigError("feature export needs a graph student")
    task = config["task"]
    rng = _rng(config, "export_features")
    box_source = _eval_box_source(config, section["boxes"],
                                  section["detector_checkpoint"])

    feature_rows, label_rows = [], []
    if task == "multi_mnist":
        dataset = label_multi_mnist(section["n_frames"], rng,
                                    background=background_source(config))
        frames = dataset.frames
        gts = dataset.gt
    else:
        factory = make_env_factory(task, TASK_INFO[task].train_objects,
                                   background_source(config))
        frames, gts = [], []
        ep = 0
        while len(frames) < section["n_frames"]:
            env = factory()
            obs = env.reset(episode_rng(config["seed"], ep))
            while not obs.done and len(frames) < section["n_frames"]:
                frames.append(obs.frame)
                gts.append(obs.gt)
                obs = env.step(rng.next_below(env.action_count))
            ep += 1
        frames = np.stack(frames)

    for frame, gt in zip(frames, gts):
        dets = (box_source.detect(frame, 0.1) if box_source != "gt"
                else detections_from_gt(gt))
        if not dets:
            continue
        graph = student.graph_for(frame, dets)
        with __import__("torch").no_grad():
            emb = student.net.node_embeddings(GraphBatch.from_graphs([graph])).numpy()
        feature_rows.append(emb)
        label_rows.extend(label_detections(dets, gt))

    features = np.concatenate(feature_rows) if feature_rows else np.zeros((0, 1))
    np.savez(out / "features.npz", features=features)
    with open(out / "labels.jsonl", "w") as f:
        for label in label_rows:
            f.write(json.dumps({"label": label}) + "\n")
    _write_manifest(out, config, "export_features", {"objects": len(label_rows)})
    return out


def stage_plot(config: PipelineConfig) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = _out_dir(config, "plot")
    section = config.section("plot")
    source = section["input"] or str(_out_dir(config, "sweep") / "sweep.csv")
    path = _require(Path(source), "run sweep first or set plot.input")
    with open(path) as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise ArtifactError(f"{path} has no data rows")
    xs = [float(r[section["x_column"]]) for r in rows]
    ys = [float(r[section["y_column"]]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if "stdev" in rows[0]:
        err = [float(r["stdev"]) for r in rows]
        ax.errorbar(xs, ys, yerr=err, marker="o", capsize=3)
    else:
        ax.plot(xs, ys, marker="o")
    ax.set_xlabel(section["x_column"])
    ax.set_ylabel(section["y_column"])
    ax.set_title(f"{config['task']}: {section['y_column']} vs {section['x_column']}")
    fig.tight_layout()
    fig.savefig(out / "plot.png", dpi=150)
    plt.close(fig)
    _write_manifest(out, config, "plot", {"source": str(path)})
    return out


_STAGES = {
    "gen-data": stage_gen_data,
    "train-teacher": stage_train_teacher,
    "collect-demos": stage_collect_demos,
    "train-detector": stage_train_detector,
    "refactor": stage_refactor,
    "evaluate": stage_evaluate,
    "sweep": stage_sweep,
    "robustness": stage_robustness,
    "export-features": stage_export_features,
    "plot": stage_plot,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policyrefactor",
        description="Two-stage policy distillation pipeline",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _STAGES:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="YAML config path")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--dry-run", action="store_true",
                       help="validate the config and exit without side effects")
        p.add_argument("--strict-determinism", action="store_true",
                       help="single-threaded, deterministic numeric execution")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides)
    except (ConfigError, FileNotFoundError, OSError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    if args.dry_run:
        print(f"config ok (hash {config.config_hash()[:12]}); "
              f"would run {args.subcommand} for task {config['task']}")
        return EXIT_OK

    _apply_determinism(config, args.strict_determinism)
    stage = _STAGES[args.subcommand]
    try:
        out = stage(config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ArtifactError as err:
        print(f"artifact error: {err}", file=sys.stderr)
        return EXIT_ARTIFACT
    except (FloatingPointError, RuntimeError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{args.subcommand}: wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
