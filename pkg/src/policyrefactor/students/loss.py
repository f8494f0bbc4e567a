"""Behaviour-cloning loss and per-sample data-parameter reweighting.

The batch loss is sum_i softmax(sigma)_i * l(x_i): gradients flow both to
the policy and to the sigmas, so persistently hard samples (typically
frames whose task-relevant objects were missed by the detector) drift to
low sigma and lose weight.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn


def bc_loss(output: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Per-sample squared L2 distance: [B, T] x [B, T] -> [B]."""
    if output.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(output.shape)} vs {tuple(target.shape)}")
    return ((output - target) ** 2).sum(dim=-1)


def reweight(losses: torch.Tensor, sigmas: torch.Tensor) -> torch.Tensor:
    """Batch loss weighted by softmax of the data parameters.

    Weights sum to 1 and are invariant to adding a constant to all sigmas;
    equal sigmas reduce to the batch mean.
    """
    if losses.shape != sigmas.shape:
        raise ValueError(f"shape mismatch: {tuple(losses.shape)} vs {tuple(sigmas.shape)}")
    weights = torch.softmax(sigmas, dim=0)
    return (weights * losses).sum()


class DataParameterBank:
    """One learnable sigma per dataset sample, optimized sparsely.

    Backed by a sparse embedding so only the sigmas of the current batch
    receive optimizer updates.
    """

    def __init__(self, n_samples: int, learning_rate: float = 0.1,
                 init: np.ndarray | None = None):
        self.embedding = nn.Embedding(n_samples, 1, sparse=True)
        with torch.no_grad():
            if init is not None:
                if len(init) != n_samples:
                    raise ValueError("init length mismatch")
                self.embedding.weight.copy_(torch.as_tensor(init, dtype=torch.float32)[:, None])
            else:
                self.embedding.weight.zero_()
        self.optimizer = torch.optim.SparseAdam(self.embedding.parameters(),
                                                lr=learning_rate)

    def gather(self, indices: torch.Tensor) -> torch.Tensor:
        return self.embedding(indices).squeeze(-1)

    def step(self) -> None:
        self.optimizer.step()
        self.optimizer.zero_grad()

    def zero_grad(self) -> None:
        self.optimizer.zero_grad()

    def values(self) -> np.ndarray:
        return self.embedding.weight.detach().squeeze(-1).numpy().copy()
