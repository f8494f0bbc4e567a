"""Robustness harness: retrain students under detection degradation.

Degradation (random object drops, injected false positives) applies while
training only; evaluation always runs with clean boxes, matching the
protocol of the robustness study this mirrors.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..demos.dataset import DemoDataset
from ..rng import Pcg32
from ..students.policy import StudentSpec
from ..students.train import StudentTrainConfig, train_student
from .policy_eval import MetricReport, StudentPipelinePolicy, eval_policy


@dataclass
class RobustnessSpec:
    drop_rates: tuple[float, ...] = (0.1, 0.5, 0.9)
    false_positives: int = 25
    eval_value: int = 5  # object count of the generalization environment
    eval_episodes: int = 100
    include_baseline: bool = True


def robustness_sweep(
    dataset: DemoDataset,
    student_spec: StudentSpec,
    box_source,
    train_config: StudentTrainConfig,
    env_builder,
    spec: RobustnessSpec,
    rng: Pcg32,
    eval_box_source="gt",
) -> dict[str, MetricReport]:
    """Train one student per degradation leg and evaluate each greedily on
    the generalization environment. Returns reports keyed ``baseline``,
    ``drop_<rate>``, and ``fp_<count>``."""
    legs: list[tuple[str, float, int]] = []
    if spec.include_baseline:
        legs.append(("baseline", 0.0, 0))
    legs.extend((f"drop_{rate:g}", rate, 0) for rate in spec.drop_rates)
    if spec.false_positives:
        legs.append((f"fp_{spec.false_positives}", 0.0, spec.false_positives))

    env_factory = env_builder(spec.eval_value)
    reports: dict[str, MetricReport] = {}
    for i, (name, drop, fp) in enumerate(legs):
        cfg = replace(train_config, drop_rate=drop, false_positives=fp)
        result = train_student(dataset, student_spec, box_source, cfg,
                               rng.spawn(1000 + i))
        policy = StudentPipelinePolicy(result.policy, box_source=eval_box_source)
        report = eval_policy(policy, env_factory, spec.eval_episodes,
                             rng.spawn(2000 + i))
        report.metadata.update({"leg": name, "drop_rate": drop, "false_positives": fp,
                                "best_val_loss": result.best_val_loss})
        reports[name] = report
    return reports
