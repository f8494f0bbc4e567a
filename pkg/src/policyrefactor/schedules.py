"""Piecewise-linear schedules shared by training loops."""

from __future__ import annotations


def linear_anneal(v0: float, v1: float, s0: int, s1: int, step: int) -> float:
    """v0 before s0, v1 after s1, linear in between."""
    if s0 > s1:
        raise ValueError(f"schedule window reversed: {s0} > {s1}")
    if step <= s0:
        return float(v0)
    if step >= s1:
        return float(v1)
    frac = (step - s0) / (s1 - s0)
    return float(v0 + frac * (v1 - v0))
