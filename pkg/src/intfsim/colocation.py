"""Per-batch tracking of co-located resource throughput: static snapshot
vs. EWMA over co-location changes, producing predictor input features."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STATIC = "static"
EWMA = "ewma"


@dataclass(frozen=True)
class Mode:
    kind: str  # "static" or "ewma"
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in (STATIC, EWMA):
            raise ValueError(f"unknown co-location mode {self.kind!r}")
        if self.kind == EWMA and not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha {self.alpha} outside (0, 1]")

    def label(self) -> str:
        if self.kind == STATIC:
            return "static"
        return f"ewma_{self.alpha:.4g}"


STATIC_MODE = Mode(STATIC)


def ewma_mode(alpha: float) -> Mode:
    return Mode(EWMA, alpha)


@dataclass
class CoLocationEstimate:
    batch_id: int
    mode: Mode
    r_hat: np.ndarray  # (l2, dram, sm) running colo-throughput estimate
    n_observations: int = 1


def init_estimate(batch_id: int, mode: Mode, colo_now) -> CoLocationEstimate:
    """Start an estimate from the dispatch-time co-location snapshot."""
    colo_now = np.asarray(colo_now, dtype=float)
    if np.any(colo_now < 0):
        raise ValueError(f"negative co-location throughput: {colo_now}")
    return CoLocationEstimate(batch_id=batch_id, mode=mode, r_hat=colo_now.copy())


def observe(est: CoLocationEstimate, x_t) -> CoLocationEstimate:
    """Fold one co-location change into the estimate (no-op in static mode)."""
    x_t = np.asarray(x_t, dtype=float)
    if np.any(x_t < 0):
        raise ValueError(f"negative co-location throughput: {x_t}")
    if est.mode.kind == EWMA:
        a = est.mode.alpha
        est.r_hat = a * x_t + (1.0 - a) * est.r_hat
        est.n_observations += 1
    return est


def finalize_features(profile, est: CoLocationEstimate) -> np.ndarray:
    """6-vector (own l2, dram, sm, colo l2, dram, sm) for the predictor."""
    return np.concatenate([profile.throughputs(), est.r_hat])


def estimate_from_history(
    batch_id: int, mode: Mode, history: list[np.ndarray]
) -> CoLocationEstimate:
    """Replay a batch's recorded colo-snapshot sequence through the estimator.

    history[0] is the dispatch-time snapshot; each later entry is the colo
    sums after one arrival/departure (including the transition to empty).
    """
    if not history:
        raise ValueError("empty co-location history")
    est = init_estimate(batch_id, mode, history[0])
    for x_t in history[1:]:
        observe(est, x_t)
    return est


@dataclass(frozen=True)
class Sample:
    x: np.ndarray  # 6-vector, own throughputs then colo estimate
    y: float  # measured interference ratio
    batch_id: int
    scenario: str = ""


def samples_from_outcomes(outcomes, table, mode: Mode, scenario: str = "") -> list[Sample]:
    """Build one prediction sample per completed batch under a feature mode."""
    samples = []
    for out in outcomes:
        profile = table.get(out.model_id, out.batch_size)
        est = estimate_from_history(out.batch_id, mode, out.colo_history)
        x = finalize_features(profile, est)
        samples.append(
            Sample(x=x, y=out.interference_ratio, batch_id=out.batch_id, scenario=scenario)
        )
    return samples


SAMPLE_CSV_HEADER = [
    "batch_id",
    "scenario",
    "own_l2",
    "own_dram",
    "own_sm",
    "colo_l2",
    "colo_dram",
    "colo_sm",
    "y_ratio",
    "mode",
    "alpha",
]


def sample_csv_rows(samples: list[Sample], mode: Mode):
    alpha = mode.alpha if mode.kind == EWMA else ""
    for s in samples:
        yield [s.batch_id, s.scenario, *["%r" % v for v in s.x], repr(s.y), mode.kind, alpha]
