"""Latent noise schedule and the closed-form forward noising step.

The schedule is a linear per-step variance ramp; alpha_bar[t] is the
cumulative product of (1 - beta_i) with the index-0 boundary pinned to 1,
so step 0 reproduces the clean latent exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DiffusionSchedule:
    steps: int
    alpha_bar: np.ndarray  # length steps + 1, alpha_bar[0] == 1.0

    @classmethod
    def linear(cls, steps: int = 10, beta_start: float = 1e-4,
               beta_end: float = 0.02) -> "DiffusionSchedule":
        if steps < 1:
            raise ValueError("diffusion steps must be >= 1")
        if not 0.0 < beta_start <= beta_end < 1.0:
            raise ValueError("variance ramp must satisfy 0 < start <= end < 1")
        betas = np.linspace(beta_start, beta_end, steps)
        alpha_bar = np.concatenate(([1.0], np.cumprod(1.0 - betas)))
        return cls(steps=steps, alpha_bar=alpha_bar)

    def __post_init__(self):
        bars = np.asarray(self.alpha_bar)
        if len(bars) != self.steps + 1 or bars[0] != 1.0:
            raise ValueError("alpha_bar must have steps+1 entries starting at 1")
        if np.any(np.diff(bars) >= 0) or np.any(bars <= 0) or np.any(bars > 1):
            raise ValueError("alpha_bar must be strictly decreasing within (0, 1]")


def forward_diffuse(z0: np.ndarray, t, schedule: DiffusionSchedule,
                    noise: np.ndarray) -> np.ndarray:
    """Noised latent sqrt(abar_t) * z0 + sqrt(1 - abar_t) * noise.

    ``t`` may be a scalar step index or a per-row integer array for batched
    draws; z0 and noise must share their shape.
    """
    z0 = np.asarray(z0, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if z0.shape != noise.shape:
        raise ValueError(f"shape mismatch: z0 {z0.shape} vs noise {noise.shape}")
    t_idx = np.asarray(t)
    if np.any(t_idx < 0) or np.any(t_idx > schedule.steps):
        raise ValueError("diffusion step index outside the schedule")
    abar = schedule.alpha_bar[t_idx]
    if z0.ndim == 2 and np.ndim(abar) == 1:
        abar = abar[:, None]
    return np.sqrt(abar) * z0 + np.sqrt(1.0 - abar) * noise
