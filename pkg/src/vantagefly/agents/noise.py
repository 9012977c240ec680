"""Ornstein-Uhlenbeck exploration noise with a decaying scale."""

from __future__ import annotations

import math

import numpy as np


class OuNoise:
    def __init__(self, dim: int, theta: float = 0.15, sigma: float = 0.3, rng=None):
        self.dim = dim
        self.theta = theta
        self.sigma = sigma
        self._rng = np.random.default_rng(rng)
        self._x = np.zeros(dim)

    def reset(self):
        self._x = np.zeros(self.dim)

    def sample(self) -> np.ndarray:
        self._x = self._x + self.theta * (-self._x) + self.sigma * self._rng.standard_normal(self.dim)
        return self._x.copy()


def decayed_sigma(episode: int, total_episodes: int,
                  sigma_start: float = 0.3, sigma_end: float = 0.05,
                  schedule: str = "exp") -> float:
    """OU scale decay over the training run.

    The exponential schedule front-loads exploration and then lets the
    behavior policy survive: at full scale the noise alone walks the drone
    out of the thin safe zone within a few steps, so holding sigma high for
    half the run starves the buffer of long episodes.
    """
    if total_episodes <= 1:
        return sigma_end
    frac = min(1.0, max(0.0, episode / (total_episodes - 1)))
    if schedule == "linear":
        return sigma_start + (sigma_end - sigma_start) * frac
    return sigma_end + (sigma_start - sigma_end) * math.exp(-8.0 * frac)
