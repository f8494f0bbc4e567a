"""Reparameterized relaxed-Bernoulli (binary Concrete) presence sampling."""

from __future__ import annotations

import torch

_EPS = 1e-8


def logistic_noise(shape, generator: torch.Generator | None = None,
                   dtype=torch.float32) -> torch.Tensor:
    """log(u) - log(1-u) for u ~ U(0,1); the reparameterization noise."""
    u = torch.rand(shape, generator=generator, dtype=dtype)
    u = u.clamp(_EPS, 1.0 - _EPS)
    return torch.log(u) - torch.log1p(-u)


def sample_relaxed_presence(
    logit: torch.Tensor,
    temperature: float,
    generator: torch.Generator | None = None,
    noise: torch.Tensor | None = None,
) -> torch.Tensor:
    """Sample y = sigmoid((logit + L) / temperature), L logistic noise.

    Differentiable in ``logit``; monotone in ``logit`` for fixed noise; the
    temperature -> 0 limit is a hard threshold. Pass ``noise`` to fix the
    randomness (e.g. for gradient checks).
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    logit = torch.as_tensor(logit)
    if noise is None:
        noise = logistic_noise(logit.shape, generator=generator, dtype=logit.dtype)
    return torch.sigmoid((logit + noise) / temperature)


def presence_logit(prob: torch.Tensor) -> torch.Tensor:
    p = torch.as_tensor(prob).clamp(_EPS, 1.0 - _EPS)
    return torch.log(p) - torch.log1p(-p)
