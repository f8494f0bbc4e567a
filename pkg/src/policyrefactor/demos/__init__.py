"""Demonstration dataset building and storage."""

from .collect import collect, filter_episodes, from_episode_records, label_multi_mnist
from .dataset import (
    TARGET_LOGITS,
    TARGET_Q_VALUES,
    TARGET_SCALAR,
    DemoDataset,
    load_dataset,
    merge_datasets,
    save_dataset,
)

__all__ = [
    "collect",
    "filter_episodes",
    "from_episode_records",
    "label_multi_mnist",
    "TARGET_LOGITS",
    "TARGET_Q_VALUES",
    "TARGET_SCALAR",
    "DemoDataset",
    "load_dataset",
    "merge_datasets",
    "save_dataset",
]
