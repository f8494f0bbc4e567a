"""Prior schedules for the scene-decomposition VAE.

The presence prior and its relaxation temperature anneal linearly inside
a step window; all other priors are fixed Gaussians. Defaults follow the
digit-sum task recipe (presence prior 0.1 -> 0.01 and temperature
2.0 -> 0.1 over steps 10K -> 50K, box-offset prior stdev 0.2, unit
appearance/depth priors, depth scale 10, reconstruction stdevs 0.15).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..schedules import linear_anneal

Schedule = tuple[float, float, int, int]  # (v0, v1, s0, s1)


def anneal(schedule: Schedule, step: int) -> float:
    """v0 before s0, linear on [s0, s1], v1 after s1."""
    v0, v1, s0, s1 = schedule
    return linear_anneal(v0, v1, s0, s1, step)


@dataclass(frozen=True)
class PriorSchedule:
    pres_prior: Schedule = (0.1, 0.01, 10_000, 50_000)
    temperature: Schedule = (2.0, 0.1, 10_000, 50_000)
    where_prior_mean: float = 0.0
    where_prior_std: float = 0.2
    what_prior_mean: float = 0.0
    what_prior_std: float = 1.0
    depth_prior_mean: float = 0.0
    depth_prior_std: float = 1.0
    depth_scale: float = 10.0
    fg_recon_std: float = 0.15
    bg_recon_std: float = 0.15

    def __post_init__(self):
        for name in ("pres_prior", "temperature"):
            v0, v1, s0, s1 = getattr(self, name)
            if s0 > s1:
                raise ValueError(f"{name} window reversed: {s0} > {s1}")
        for name in ("where_prior_std", "what_prior_std", "depth_prior_std",
                     "fg_recon_std", "bg_recon_std"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def pres_prior_at(self, step: int) -> float:
        return anneal(self.pres_prior, step)

    def temperature_at(self, step: int) -> float:
        return anneal(self.temperature, step)
