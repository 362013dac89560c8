"""Ground-truth interference oracle: thresholded-linear contention with
multiplicative lognormal noise, standing in for real hardware."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_BETA = (1.0, 1.5, 0.5)  # (l2, dram, sm) contention sensitivities


@dataclass(frozen=True)
class InterferenceOracle:
    beta_l2: float = DEFAULT_BETA[0]
    beta_dram: float = DEFAULT_BETA[1]
    beta_sm: float = DEFAULT_BETA[2]
    noise_sigma: float = 0.05
    seed: int = 0

    def betas(self) -> np.ndarray:
        return np.array([self.beta_l2, self.beta_dram, self.beta_sm])

    def noise_draw(self, batch_id: int, segment_index: int) -> float:
        """Lognormal noise factor, fixed per (batch, segment).

        Seeded by identity, not draw order, so the value is independent of
        event-processing order.
        """
        if self.noise_sigma == 0.0:
            return 1.0
        rng = np.random.default_rng([self.seed, batch_id, segment_index])
        return float(rng.lognormal(mean=0.0, sigma=self.noise_sigma))


def oracle_slowdown(own, colo_sum, oracle: InterferenceOracle, noise_draw: float = 1.0) -> float:
    """Slowdown factor for a batch given its own and co-located throughputs.

    Each resource contributes only its excess demand over unit capacity:
    slowdown = (1 + sum_r beta_r * max(0, own_r + colo_r - 1)) * noise.
    """
    own = np.asarray(own, dtype=float)
    colo_sum = np.asarray(colo_sum, dtype=float)
    if np.any(own < 0) or np.any(colo_sum < 0):
        raise ValueError("throughput inputs must be non-negative")
    excess = np.maximum(0.0, own + colo_sum - 1.0)
    return float((1.0 + oracle.betas() @ excess) * noise_draw)
