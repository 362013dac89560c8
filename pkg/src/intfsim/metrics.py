"""Per-request latency accounting, SLO satisfaction, and percentile stats."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RequestRecord:
    request_id: int
    model_id: str
    arrival_ms: float
    batch_id: int
    dispatch_ms: float
    completion_ms: float
    slo_met: bool

    @property
    def latency_ms(self) -> float:
        return self.completion_ms - self.arrival_ms

    @property
    def queueing_ms(self) -> float:
        return self.dispatch_ms - self.arrival_ms


def percentile(values, p: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    values = sorted(values)
    if not values:
        raise ValueError("percentile of empty list")
    if not (0.0 <= p <= 100.0):
        raise ValueError(f"percentile p={p} outside [0, 100]")
    rank = max(1, math.ceil(p / 100.0 * len(values)))
    return values[rank - 1]


@dataclass(frozen=True)
class ModelLatencyReport:
    model_id: str
    n_requests: int
    slo_satisfaction: float
    p50_latency_ms: float
    p95_latency_ms: float
    p99_latency_ms: float


def slo_report(
    records: list[RequestRecord], warmup_fraction: float = 0.0
) -> dict[str, ModelLatencyReport]:
    """Per-model SLO satisfaction and latency percentiles.

    warmup_fraction trims requests arriving in the first fraction of the
    observed arrival span (steady-state measurement).
    """
    if not records:
        raise ValueError("slo_report on empty record list")
    if warmup_fraction:
        t0 = min(r.arrival_ms for r in records)
        t1 = max(r.arrival_ms for r in records)
        cutoff = t0 + warmup_fraction * (t1 - t0)
        trimmed = [r for r in records if r.arrival_ms >= cutoff]
        records = trimmed or records
    by_model: dict[str, list[RequestRecord]] = {}
    for r in records:
        by_model.setdefault(r.model_id, []).append(r)
    report = {}
    for model_id, recs in sorted(by_model.items()):
        lats = [r.latency_ms for r in recs]
        report[model_id] = ModelLatencyReport(
            model_id=model_id,
            n_requests=len(recs),
            slo_satisfaction=sum(r.slo_met for r in recs) / len(recs),
            p50_latency_ms=percentile(lats, 50),
            p95_latency_ms=percentile(lats, 95),
            p99_latency_ms=percentile(lats, 99),
        )
    return report


REQUEST_CSV_HEADER = [
    "request_id",
    "model_id",
    "arrival_ms",
    "dispatch_ms",
    "completion_ms",
    "latency_ms",
    "queueing_ms",
    "slo_met",
]


def request_csv_rows(records: list[RequestRecord]):
    for r in records:
        yield [
            r.request_id,
            r.model_id,
            repr(r.arrival_ms),
            repr(r.dispatch_ms),
            repr(r.completion_ms),
            repr(r.latency_ms),
            repr(r.queueing_ms),
            int(r.slo_met),
        ]


REPORT_CSV_HEADER = [
    "model_id",
    "n_requests",
    "slo_satisfaction",
    "p50_latency_ms",
    "p95_latency_ms",
    "p99_latency_ms",
]


def report_csv_rows(report: dict[str, ModelLatencyReport]):
    for model_id in sorted(report):
        rep = report[model_id]
        yield [
            rep.model_id,
            rep.n_requests,
            repr(rep.slo_satisfaction),
            repr(rep.p50_latency_ms),
            repr(rep.p95_latency_ms),
            repr(rep.p99_latency_ms),
        ]
