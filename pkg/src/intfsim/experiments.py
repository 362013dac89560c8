"""Experiment harnesses: feature-mode comparison (static vs. EWMA),
drift evaluation (offline vs. SGD vs. RLS), oracle calibration, and the
sequential-vs-concurrent latency comparison."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from . import predict
from .colocation import (
    Mode,
    Sample,
    STATIC_MODE,
    ewma_mode,
    samples_from_outcomes,
)
from .metrics import percentile
from .oracle import InterferenceOracle
from .profiles import ProfileTable
from .simcore import GpuState, run_scenario
from .batcher import BatchRequest
from .workload import (
    DeployedModel,
    RequestEvent,
    ScenarioSpec,
    drift_scenarios,
    rate_for_utilization,
)

EWMA_ALPHAS = (1.0 / 3.0, 0.5, 2.0 / 3.0)


# --- static vs. EWMA feature comparison ---------------------------------

@dataclass(frozen=True)
class ModeRow:
    mode: Mode
    report: predict.EvalReport


def split_samples(
    samples: list[Sample], split: float = 0.75, how: str = "chrono", seed: int = 0
) -> tuple[list[Sample], list[Sample]]:
    """75/25 split; chronological by default, "random" shuffles first."""
    if not (0.0 < split < 1.0):
        raise ValueError(f"split {split} outside (0, 1)")
    samples = list(samples)
    if how == "random":
        rng = np.random.default_rng(seed)
        rng.shuffle(samples)
    elif how != "chrono":
        raise ValueError(f"unknown split mode {how!r}")
    cut = int(round(split * len(samples)))
    train, test = samples[:cut], samples[cut:]
    if not train or not test:
        raise ValueError(f"too few samples ({len(samples)}) to split {split}")
    return train, test


def ewma_experiment(
    scenarios: list[ScenarioSpec],
    table: ProfileTable,
    alphas: tuple[float, ...] = EWMA_ALPHAS,
    split: float = 0.75,
    split_how: str = "chrono",
) -> list[ModeRow]:
    """Relative-error comparison of static vs. EWMA co-location features.

    Each scenario is simulated once; per-batch colo histories are replayed
    under every feature mode, so all modes see identical ground truth.
    """
    modes = [STATIC_MODE] + [ewma_mode(a) for a in alphas]
    per_mode: dict[str, list[Sample]] = {m.label(): [] for m in modes}
    for spec in scenarios:
        result = run_scenario(spec, table)
        for mode in modes:
            per_mode[mode.label()].extend(
                samples_from_outcomes(result.outcomes, table, mode, scenario=spec.name)
            )
    rows = []
    for mode in modes:
        samples = per_mode[mode.label()]
        train, test = split_samples(samples, split, split_how)
        model = predict.fit_ols(train)
        rows.append(ModeRow(mode=mode, report=predict.evaluate(model, test)))
    return rows


HIGH_CHURN_COMBOS = (
    ("vit_b16", "roberta_b", "convnext_b"),
    ("vgg19", "roberta_b", "convnext_b"),
    ("vit_b16", "vgg19", "roberta_b"),
)


def high_churn_suite(
    table: ProfileTable,
    seed: int,
    oracle: InterferenceOracle | None = None,
    rho: float = 0.30,
    window_ms: float = 40.0,
    duration_s: float = 10.0,
) -> list[ScenarioSpec]:
    """Scenario suite with frequent co-location churn.

    Heavy model trios with unequal batch durations at moderate occupancy:
    a long batch's peers arrive and depart several times during its life,
    so the dispatch-time snapshot is often unrepresentative. The wide
    batching window keeps batch sizes (and hence contention) high without
    saturating the GPU.
    """
    oracle = oracle or InterferenceOracle(noise_sigma=0.02, seed=seed)
    suites = []
    for i, models in enumerate(HIGH_CHURN_COMBOS):
        deployed = tuple(
            DeployedModel(
                m,
                rate_for_utilization(table, m, rho=rho, batch_size=8),
                slo_ms=50 * table.get(m, 1).solo_duration_ms,
            )
            for m in models
        )
        suites.append(
            ScenarioSpec(
                deployed=deployed,
                duration_s=duration_s,
                batching_window_ms=window_ms,
                concurrency_cap=2,
                seed=seed + i,
                oracle=oracle,
                name=f"churn_{i}",
            )
        )
    return suites


# --- drift experiment ----------------------------------------------------

DRIFT_METHODS = ("offline", "sgd", "rls")


@dataclass(frozen=True)
class DriftCell:
    dataset: str
    method: str
    mse: float
    n_samples: int


def drift_experiment(
    base: ScenarioSpec,
    table: ProfileTable,
    eta: float = 0.01,
    lam: float = 0.99,
    feature_mode: Mode = ewma_mode(0.5),
    max_test_samples: int = 300,
) -> list[DriftCell]:
    """Offline vs. SGD vs. RLS prediction error across the drift datasets.

    All three methods warm-start from the same OLS fit on the training set;
    the training row is scored with frozen parameters for every method, so
    it is identical by construction. Test sets are scored prequentially for
    the online methods, truncated to a fixed sample budget so each dataset
    weighs the adaptation transient equally.
    """
    family = drift_scenarios(base)
    datasets: dict[str, list[Sample]] = {}
    for name, spec in family.named():
        spec = replace(spec, colocation_mode=feature_mode)
        result = run_scenario(spec, table)
        samples = result.samples
        if name != "TrainingSet" and max_test_samples:
            samples = samples[:max_test_samples]
        datasets[name] = samples

    train = datasets["TrainingSet"]
    model0 = predict.fit_ols(train)
    X_train = np.array([s.x for s in train])

    cells = []
    train_report = predict.evaluate(model0, train)
    for method in DRIFT_METHODS:
        cells.append(
            DriftCell("TrainingSet", method, train_report.mse, train_report.n_samples)
        )
    for name in ("TestSet1", "TestSet2", "TestSet3"):
        samples = datasets[name]
        for method in DRIFT_METHODS:
            if method == "offline":
                rep = predict.evaluate(model0, samples)
            elif method == "sgd":
                rep = predict.evaluate(
                    predict.SgdState(model0.copy(), eta=eta), samples, online=True
                )
            else:
                rep = predict.evaluate(
                    predict.rls_init(model0, lam=lam, X_train=X_train),
                    samples,
                    online=True,
                )
            cells.append(DriftCell(name, method, rep.mse, rep.n_samples))
    return cells


def default_drift_base(
    table: ProfileTable,
    seed: int,
    rho: float = 0.30,
    duration_s: float = 8.0,
    window_ms: float = 40.0,
) -> ScenarioSpec:
    """Base scenario deploying every profiled model at moderate occupancy.

    The wide batching window keeps batches large enough to contend, so the
    drift datasets differ meaningfully in their interference behavior.
    Models are ordered by aggregate resource footprint at the maximum batch
    size, so the training half of the drift split holds the light models and
    the unseen half holds the heavy contenders.
    """

    def footprint(model_id: str) -> tuple[float, str]:
        return (sum(table.get(model_id, table.max_batch_size).throughputs()), model_id)

    deployed = []
    for m in sorted(table.models(), key=footprint):
        rate = rate_for_utilization(table, m, rho=rho, batch_size=8)
        deployed.append(
            DeployedModel(m, rate, slo_ms=50 * table.get(m, 1).solo_duration_ms)
        )
    return ScenarioSpec(
        deployed=tuple(deployed),
        duration_s=duration_s,
        batching_window_ms=window_ms,
        concurrency_cap=2,
        seed=seed,
        oracle=InterferenceOracle(noise_sigma=0.02, seed=seed),
        name="drift",
    )


def mean_drift_table(cell_lists: list[list[DriftCell]]) -> dict[tuple[str, str], float]:
    """Seed-averaged MSE keyed by (dataset, method)."""
    acc: dict[tuple[str, str], list[float]] = {}
    for cells in cell_lists:
        for c in cells:
            acc.setdefault((c.dataset, c.method), []).append(c.mse)
    return {k: float(np.mean(v)) for k, v in acc.items()}


# --- oracle calibration ----------------------------------------------------

def full_overlap_ratios(
    table: ProfileTable,
    model_a: str = "roberta_b",
    model_b: str = "roberta_b",
    batch_size: int = 8,
    n_pairs: int = 200,
    oracle: InterferenceOracle | None = None,
) -> list[float]:
    """Interference ratios from repeatedly co-running two batches that start
    together, the stress pattern behind the oracle's calibration target."""
    oracle = oracle or InterferenceOracle()
    ratios = []
    ids = itertools.count()
    req_ids = itertools.count()
    for _ in range(n_pairs):
        state = GpuState(concurrency_cap=2, oracle=oracle)
        for model in (model_a, model_b):
            members = tuple(
                RequestEvent(next(req_ids), model, 0.0, float("inf"))
                for _ in range(batch_size)
            )
            batch = BatchRequest(
                batch_id=next(ids),
                model_id=model,
                members=members,
                formed_at_ms=0.0,
            )
            state.dispatch(batch, table)
        while state.running:
            rb = min(
                state.running,
                key=lambda r: (r.remaining_work_ms * r.current_slowdown, r.batch_id),
            )
            state.now_ms += rb.remaining_work_ms * rb.current_slowdown
            outcome = state.complete(rb)
            ratios.append(outcome.interference_ratio)
    return ratios


def calibration_p95(table: ProfileTable, **kwargs) -> float:
    return percentile(full_overlap_ratios(table, **kwargs), 95)


# --- sequential vs. concurrent latency --------------------------------------

def symmetric_stress_scenario(
    table: ProfileTable,
    model_ids: list[str],
    rho_total: float,
    seed: int,
    concurrency_cap: int,
    duration_s: float = 2.0,
    oracle: InterferenceOracle | None = None,
) -> ScenarioSpec:
    """Identical load evenly spread over the given models, sized so total
    offered work is rho_total x single-batch-slot capacity."""
    deployed = []
    for m in model_ids:
        rate = rate_for_utilization(table, m, rho=rho_total / len(model_ids))
        deployed.append(
            DeployedModel(m, rate, slo_ms=20 * table.get(m, 1).solo_duration_ms)
        )
    return ScenarioSpec(
        deployed=tuple(deployed),
        duration_s=duration_s,
        batching_window_ms=1.0,
        concurrency_cap=concurrency_cap,
        seed=seed,
        oracle=oracle or InterferenceOracle(seed=seed),
        name=f"stress_cap{concurrency_cap}",
    )


def p99_latency(records) -> float:
    return percentile([r.latency_ms for r in records], 99)
