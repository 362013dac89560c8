"""Reproducible Poisson arrival traces and scenario configurations,
including the drift-evaluation scenario family."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .colocation import Mode, STATIC_MODE, ewma_mode
from .oracle import InterferenceOracle
from .profiles import ProfileTable, _stable_id


class ScenarioError(ValueError):
    """Raised on invalid scenario configuration."""


@dataclass(frozen=True)
class DeployedModel:
    model_id: str
    arrival_rate_rps: float
    slo_ms: float

    def __post_init__(self):
        if self.arrival_rate_rps < 0:
            raise ScenarioError(f"{self.model_id}: negative arrival rate")
        if not self.slo_ms > 0:
            raise ScenarioError(f"{self.model_id}: slo_ms must be positive")


@dataclass(frozen=True)
class ScenarioSpec:
    deployed: tuple[DeployedModel, ...]
    duration_s: float
    batching_window_ms: float = 2.0
    max_batch_size: int = 8
    concurrency_cap: int = 2
    seed: int = 0
    colocation_mode: Mode = STATIC_MODE
    oracle: InterferenceOracle = field(default_factory=InterferenceOracle)
    name: str = "scenario"

    def __post_init__(self):
        if not self.deployed:
            raise ScenarioError("deployed model list is empty")
        if not self.duration_s > 0:
            raise ScenarioError("duration_s must be positive")
        if self.batching_window_ms < 0:
            raise ScenarioError("batching_window_ms must be non-negative")
        if self.max_batch_size < 1 or self.concurrency_cap < 1:
            raise ScenarioError("max_batch_size and concurrency_cap must be >= 1")
        ids = [d.model_id for d in self.deployed]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate model_id in deployed list")


@dataclass(frozen=True)
class RequestEvent:
    request_id: int
    model_id: str
    arrival_time_ms: float
    deadline_ms: float


def default_slo_ms(table: ProfileTable, model_id: str, factor: float = 5.0) -> float:
    """SLO defaults to a multiple of the model's solo bs=1 duration."""
    return factor * table.get(model_id, 1).solo_duration_ms


def generate_arrivals(spec: ScenarioSpec) -> list[RequestEvent]:
    """Merged, time-ordered Poisson arrival trace for all deployed models.

    Each model draws from its own PRNG substream keyed by (seed, model id),
    so adding or removing a model never perturbs the others' gaps.
    """
    horizon_ms = spec.duration_s * 1000.0
    per_model: list[tuple[float, str, float]] = []
    for dep in spec.deployed:
        if dep.arrival_rate_rps == 0:
            continue
        rng = np.random.default_rng([spec.seed, _stable_id(dep.model_id)])
        mean_gap_ms = 1000.0 / dep.arrival_rate_rps
        t = 0.0
        while True:
            # inverse-CDF exponential gap; u in [0, 1) keeps the gap finite
            gap = -mean_gap_ms * math.log1p(-rng.random())
            t += max(gap, 1e-12)
            if t >= horizon_ms:
                break
            per_model.append((t, dep.model_id, dep.slo_ms))
    per_model.sort(key=lambda e: (e[0], e[1]))
    return [
        RequestEvent(
            request_id=i,
            model_id=model,
            arrival_time_ms=t,
            deadline_ms=t + slo,
        )
        for i, (t, model, slo) in enumerate(per_model)
    ]


def rate_for_utilization(
    table: ProfileTable, model_id: str, rho: float, batch_size: int | None = None
) -> float:
    """Arrival rate (rps) putting offered work at rho x batched capacity."""
    bs = batch_size if batch_size is not None else table.max_batch_size
    p = table.get(model_id, bs)
    capacity_rps = bs / (p.solo_duration_ms / 1000.0)
    return rho * capacity_rps


@dataclass(frozen=True)
class DriftScenarios:
    training: ScenarioSpec
    test1: ScenarioSpec
    test2: ScenarioSpec
    test3: ScenarioSpec

    def named(self) -> list[tuple[str, ScenarioSpec]]:
        return [
            ("TrainingSet", self.training),
            ("TestSet1", self.test1),
            ("TestSet2", self.test2),
            ("TestSet3", self.test3),
        ]


# Per-model load scale factors making TestSet1's rates differ markedly
# from the training rates (each factor outside [0.5, 2]).
LOAD_SHIFT_FACTORS = (0.25, 4.0)


def drift_scenarios(base: ScenarioSpec) -> DriftScenarios:
    """Four-dataset drift family over the base scenario's model pool.

    The training set deploys the first half of the pool (S1); test set 1
    keeps S1 but shifts every load by a factor outside [0.5, 2]; test set 2
    deploys the disjoint second half (S2); test set 3 deploys S1 union S2.
    """
    pool = list(base.deployed)
    if len(pool) < 4:
        raise ScenarioError(
            f"need >= 4 deployed models to form drift scenarios, got {len(pool)}"
        )
    s1 = pool[: len(pool) // 2]
    s2 = pool[len(pool) // 2 :]
    shifted = tuple(
        replace(d, arrival_rate_rps=d.arrival_rate_rps * LOAD_SHIFT_FACTORS[i % 2])
        for i, d in enumerate(s1)
    )

    def mk(name: str, deployed, seed_offset: int) -> ScenarioSpec:
        return replace(
            base,
            deployed=tuple(deployed),
            seed=base.seed + seed_offset,
            name=f"{base.name}_{name}",
        )

    return DriftScenarios(
        training=mk("training", s1, 0),
        test1=mk("test1", shifted, 1),
        test2=mk("test2", s2, 2),
        test3=mk("test3", s1 + s2, 3),
    )


ARRIVAL_CSV_HEADER = ["request_id", "model_id", "arrival_time_ms", "deadline_ms"]


def arrival_csv_rows(events: list[RequestEvent]):
    for e in events:
        yield [e.request_id, e.model_id, repr(e.arrival_time_ms), repr(e.deadline_ms)]


# --- scenario file I/O -------------------------------------------------

def scenario_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "name": spec.name,
        "duration_s": spec.duration_s,
        "batching_window_ms": spec.batching_window_ms,
        "max_batch_size": spec.max_batch_size,
        "concurrency_cap": spec.concurrency_cap,
        "seed": spec.seed,
        "colocation_mode": spec.colocation_mode.kind,
        "ewma_alpha": spec.colocation_mode.alpha,
        "oracle": {
            "beta_l2": spec.oracle.beta_l2,
            "beta_dram": spec.oracle.beta_dram,
            "beta_sm": spec.oracle.beta_sm,
            "noise_sigma": spec.oracle.noise_sigma,
            "seed": spec.oracle.seed,
        },
        "deployed": [
            {
                "model_id": d.model_id,
                "arrival_rate_rps": d.arrival_rate_rps,
                "slo_ms": d.slo_ms,
            }
            for d in spec.deployed
        ],
    }


def scenario_from_dict(data: dict, table: ProfileTable | None = None) -> ScenarioSpec:
    """Parse a scenario config dict; slo_ms null/missing uses the default."""
    deployed = []
    for d in data["deployed"]:
        slo = d.get("slo_ms")
        if slo is None:
            if table is None:
                raise ScenarioError(
                    f"{d['model_id']}: slo_ms omitted but no profile table given"
                )
            slo = default_slo_ms(table, d["model_id"])
        deployed.append(
            DeployedModel(
                model_id=d["model_id"],
                arrival_rate_rps=float(d["arrival_rate_rps"]),
                slo_ms=float(slo),
            )
        )
    kind = data.get("colocation_mode", "static")
    mode = STATIC_MODE if kind == "static" else ewma_mode(float(data.get("ewma_alpha", 0.5)))
    orc = data.get("oracle", {})
    return ScenarioSpec(
        deployed=tuple(deployed),
        duration_s=float(data["duration_s"]),
        batching_window_ms=float(data.get("batching_window_ms", 2.0)),
        max_batch_size=int(data.get("max_batch_size", 8)),
        concurrency_cap=int(data.get("concurrency_cap", 2)),
        seed=int(data.get("seed", 0)),
        colocation_mode=mode,
        oracle=InterferenceOracle(
            beta_l2=float(orc.get("beta_l2", 1.0)),
            beta_dram=float(orc.get("beta_dram", 1.5)),
            beta_sm=float(orc.get("beta_sm", 0.5)),
            noise_sigma=float(orc.get("noise_sigma", 0.05)),
            seed=int(orc.get("seed", 0)),
        ),
        name=str(data.get("name", "scenario")),
    )


def load_scenario(path: str | Path, table: ProfileTable | None = None) -> ScenarioSpec:
    with Path(path).open(encoding="utf-8") as f:
        data = json.load(f)
    spec = scenario_from_dict(data, table)
    if table is not None:
        missing = [d.model_id for d in spec.deployed if d.model_id not in table.models()]
        if missing:
            raise ScenarioError(f"models not in profile table: {missing}")
    return spec


def save_scenario(spec: ScenarioSpec, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(scenario_to_dict(spec), indent=2) + "\n", encoding="utf-8")
