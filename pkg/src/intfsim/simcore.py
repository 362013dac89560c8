"""Discrete-event engine: batches execute on a simulated GPU under a
concurrency cap, with a piecewise-constant interference slowdown over
co-location segments."""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .batcher import BatchRequest, PendingQueue
from .colocation import Mode, samples_from_outcomes
from .metrics import RequestRecord
from .oracle import InterferenceOracle, oracle_slowdown
from .profiles import ModelProfile, ProfileTable
from .workload import ScenarioSpec, generate_arrivals


class SimulationError(RuntimeError):
    """Internal invariant violation in the event loop."""


@dataclass
class Segment:
    t_begin: float
    t_end: float | None  # None while the segment is open
    slowdown: float
    colo: np.ndarray  # (l2, dram, sm) sums of co-located peers


@dataclass
class RunningBatch:
    batch: BatchRequest
    profile: ModelProfile
    start_time_ms: float
    total_work_ms: float
    progress_ms: float = 0.0
    segments: list[Segment] = field(default_factory=list)
    completion_gen: int = 0  # invalidates superseded completion events

    @property
    def batch_id(self) -> int:
        return self.batch.batch_id

    @property
    def remaining_work_ms(self) -> float:
        return self.total_work_ms - self.progress_ms

    @property
    def current_slowdown(self) -> float:
        return self.segments[-1].slowdown

    def close_segment(self, now_ms: float) -> None:
        seg = self.segments[-1]
        if seg.t_end is not None:
            raise SimulationError(f"batch {self.batch_id}: segment already closed")
        if now_ms == seg.t_begin:
            # zero-length interval (e.g. a completion and a dispatch at the
            # same instant): not a real co-location segment, drop it
            self.segments.pop()
            return
        seg.t_end = now_ms
        self.progress_ms += (seg.t_end - seg.t_begin) / seg.slowdown

    def open_segment(self, now_ms: float, slowdown: float, colo: np.ndarray) -> None:
        self.segments.append(Segment(t_begin=now_ms, t_end=None, slowdown=slowdown, colo=colo))


@dataclass
class BatchOutcome:
    batch_id: int
    model_id: str
    batch_size: int
    start_ms: float
    measured_duration_ms: float
    profiled_ms: float
    completion_time_ms: float
    segments: list[Segment]

    @property
    def interference_ratio(self) -> float:
        return self.measured_duration_ms / self.profiled_ms

    @property
    def colo_history(self) -> list[np.ndarray]:
        """One colo-sum snapshot per segment, dispatch snapshot first."""
        return [seg.colo for seg in self.segments]

    @property
    def n_segments(self) -> int:
        return len(self.segments)


# event kinds, in tie-break order at equal timestamps
_COMPLETION = 0
_WINDOW = 1
_ARRIVAL = 2


class GpuState:
    """Simulated GPU: running set under a concurrency cap plus event queue."""

    def __init__(self, concurrency_cap: int, oracle: InterferenceOracle):
        self.now_ms = 0.0
        self.concurrency_cap = concurrency_cap
        self.oracle = oracle
        self.running: list[RunningBatch] = []
        self.events: list[tuple[float, int, int, int, object]] = []
        self.outcomes: list[BatchOutcome] = []
        self._push_seq = itertools.count()

    # -- event queue -----------------------------------------------------

    def push_event(self, time_ms: float, kind: int, key: int, payload) -> None:
        if time_ms < self.now_ms - 1e-9:
            raise SimulationError(
                f"event at {time_ms} scheduled in the past (now={self.now_ms})"
            )
        heapq.heappush(self.events, (time_ms, kind, key, next(self._push_seq), payload))

    # -- colo bookkeeping --------------------------------------------------

    def colo_sums_for(self, rb: RunningBatch) -> np.ndarray:
        total = np.zeros(3)
        for other in self.running:
            if other is not rb:
                total += other.profile.throughputs()
        return total

    def _reseat(self, rb: RunningBatch) -> None:
        """Open a fresh segment for rb from now and reschedule its completion."""
        colo = self.colo_sums_for(rb)
        noise = self.oracle.noise_draw(rb.batch_id, len(rb.segments))
        slowdown = oracle_slowdown(rb.profile.throughputs(), colo, self.oracle, noise)
        rb.open_segment(self.now_ms, slowdown, colo)
        rb.completion_gen += 1
        done_at = self.now_ms + rb.remaining_work_ms * slowdown
        self.push_event(done_at, _COMPLETION, rb.batch_id, (rb, rb.completion_gen))

    def _colo_changed(self, survivors: list[RunningBatch]) -> None:
        for rb in survivors:
            rb.close_segment(self.now_ms)
            self._reseat(rb)

    # -- operations --------------------------------------------------------

    def can_dispatch(self) -> bool:
        return len(self.running) < self.concurrency_cap

    def dispatch(self, batch: BatchRequest, table: ProfileTable) -> RunningBatch:
        """Start a batch now; every running peer re-derives its slowdown."""
        if not self.can_dispatch():
            raise SimulationError(
                f"dispatch of batch {batch.batch_id} at concurrency cap "
                f"{self.concurrency_cap}"
            )
        profile = table.get(batch.model_id, batch.batch_size)
        rb = RunningBatch(
            batch=batch,
            profile=profile,
            start_time_ms=self.now_ms,
            total_work_ms=profile.solo_duration_ms,
        )
        survivors = list(self.running)
        self.running.append(rb)
        self._reseat(rb)
        self._colo_changed(survivors)
        return rb

    def complete(self, rb: RunningBatch) -> BatchOutcome:
        rb.close_segment(self.now_ms)
        if abs(rb.progress_ms - rb.total_work_ms) > 1e-6 * rb.total_work_ms:
            raise SimulationError(
                f"batch {rb.batch_id} completed with progress {rb.progress_ms} "
                f"!= work {rb.total_work_ms}"
            )
        self.running.remove(rb)
        measured = self.now_ms - rb.start_time_ms
        if all(seg.slowdown == 1.0 for seg in rb.segments):
            # under unit slowdown throughout, measured time equals profiled
            # work by identity; bypass absolute-time subtraction error
            measured = rb.total_work_ms
        outcome = BatchOutcome(
            batch_id=rb.batch_id,
            model_id=rb.batch.model_id,
            batch_size=rb.batch.batch_size,
            start_ms=rb.start_time_ms,
            measured_duration_ms=measured,
            profiled_ms=rb.total_work_ms,
            completion_time_ms=self.now_ms,
            segments=rb.segments,
        )
        self.outcomes.append(outcome)
        self._colo_changed(list(self.running))
        return outcome

    def advance_to_next_event(self):
        """Jump to the earliest event and return (time, kind, key, payload)."""
        if not self.events:
            raise SimulationError("advance with an empty event queue")
        time_ms, kind, key, _, payload = heapq.heappop(self.events)
        if time_ms < self.now_ms - 1e-9:
            raise SimulationError(f"event at {time_ms} is in the past ({self.now_ms})")
        self.now_ms = max(self.now_ms, time_ms)
        return time_ms, kind, key, payload


@dataclass
class ScenarioResult:
    outcomes: list[BatchOutcome]
    records: list[RequestRecord]
    samples: list  # colocation.Sample per batch, under spec.colocation_mode


def run_scenario(spec: ScenarioSpec, table: ProfileTable) -> ScenarioResult:
    """Drive arrivals -> batcher -> FIFO dispatch queue -> GPU to quiescence."""
    missing = [d.model_id for d in spec.deployed if d.model_id not in table.models()]
    if missing:
        raise SimulationError(f"deployed models not in profile table: {missing}")

    arrivals = generate_arrivals(spec)
    slo_by_model = {d.model_id: d.slo_ms for d in spec.deployed}

    state = GpuState(spec.concurrency_cap, spec.oracle)
    batch_ids = itertools.count()
    queues = {
        d.model_id: PendingQueue(
            model_id=d.model_id,
            window_ms=spec.batching_window_ms,
            max_batch_size=spec.max_batch_size,
            _ids=batch_ids,
        )
        for d in spec.deployed
    }
    armed_gen: dict[str, int] = {m: -1 for m in queues}
    dispatch_queue: deque[BatchRequest] = deque()
    records: list[RequestRecord] = []
    running_members: dict[int, BatchRequest] = {}

    for req in arrivals:
        state.push_event(req.arrival_time_ms, _ARRIVAL, req.request_id, req)

    def arm_window(model_id: str) -> None:
        q = queues[model_id]
        if q.window_deadline_ms is not None and armed_gen[model_id] != q.generation:
            armed_gen[model_id] = q.generation
            state.push_event(
                q.window_deadline_ms, _WINDOW, _queue_key(model_id), (model_id, q.generation)
            )

    def take_batch(batch: BatchRequest | None) -> None:
        if batch is not None:
            dispatch_queue.append(batch)

    def try_dispatch() -> None:
        while dispatch_queue and state.can_dispatch():
            batch = dispatch_queue.popleft()
            rb = state.dispatch(batch, table)
            running_members[rb.batch_id] = batch

    def record_requests(outcome: BatchOutcome) -> None:
        batch = running_members.pop(outcome.batch_id)
        slo = slo_by_model[batch.model_id]
        for req in batch.members:
            latency = outcome.completion_time_ms - req.arrival_time_ms
            records.append(
                RequestRecord(
                    request_id=req.request_id,
                    model_id=req.model_id,
                    arrival_ms=req.arrival_time_ms,
                    batch_id=outcome.batch_id,
                    dispatch_ms=outcome.start_ms,
                    completion_ms=outcome.completion_time_ms,
                    slo_met=latency <= slo,
                )
            )

    while state.events:
        _, kind, _, payload = state.advance_to_next_event()
        if kind == _COMPLETION:
            rb, gen = payload
            if gen != rb.completion_gen or rb not in state.running:
                continue  # superseded by a later re-projection
            outcome = state.complete(rb)
            record_requests(outcome)
        elif kind == _WINDOW:
            model_id, gen = payload
            q = queues[model_id]
            if gen != q.generation:
                continue  # window was reset since this event was scheduled
            take_batch(q.poll_window(state.now_ms))
            arm_window(model_id)
        else:  # arrival
            req = payload
            take_batch(queues[req.model_id].enqueue(req, state.now_ms))
            arm_window(req.model_id)
        try_dispatch()

    if state.running or dispatch_queue or any(q.waiting for q in queues.values()):
        raise SimulationError("simulation drained its event queue before quiescence")

    state.outcomes.sort(key=lambda o: (o.completion_time_ms, o.batch_id))
    records.sort(key=lambda r: r.request_id)
    samples = samples_from_outcomes(
        state.outcomes, table, spec.colocation_mode, scenario=spec.name
    )
    return ScenarioResult(outcomes=state.outcomes, records=records, samples=samples)


def _queue_key(model_id: str) -> int:
    from .profiles import _stable_id

    return _stable_id(model_id)


OUTCOME_CSV_HEADER = [
    "batch_id",
    "model_id",
    "batch_size",
    "start_ms",
    "measured_ms",
    "profiled_ms",
    "interference_ratio",
    "n_segments",
]


def outcome_csv_rows(outcomes: list[BatchOutcome]):
    for o in outcomes:
        yield [
            o.batch_id,
            o.model_id,
            o.batch_size,
            repr(o.start_ms),
            repr(o.measured_duration_ms),
            repr(o.profiled_ms),
            repr(o.interference_ratio),
            o.n_segments,
        ]


SEGMENT_CSV_HEADER = [
    "batch_id",
    "segment_index",
    "t_begin_ms",
    "t_end_ms",
    "slowdown",
    "colo_l2",
    "colo_dram",
    "colo_sm",
]


def segment_csv_rows(outcomes: list[BatchOutcome]):
    for o in outcomes:
        for i, seg in enumerate(o.segments):
            yield [
                o.batch_id,
                i,
                repr(seg.t_begin),
                repr(seg.t_end),
                repr(seg.slowdown),
                repr(float(seg.colo[0])),
                repr(float(seg.colo[1])),
                repr(float(seg.colo[2])),
            ]
