"""Per-model dynamic batching: hold the first queued request up to a
waiting window, dispatch early when the maximum batch size is reached."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .workload import RequestEvent


class BatcherError(ValueError):
    """Raised on misuse of a pending queue."""


@dataclass(frozen=True)
class BatchRequest:
    batch_id: int
    model_id: str
    members: tuple[RequestEvent, ...]
    formed_at_ms: float

    @property
    def batch_size(self) -> int:
        return len(self.members)

    @property
    def member_request_ids(self) -> list[int]:
        return [r.request_id for r in self.members]


@dataclass
class PendingQueue:
    model_id: str
    window_ms: float
    max_batch_size: int = 8
    waiting: list[RequestEvent] = field(default_factory=list)
    window_deadline_ms: float | None = None
    # bumped whenever the window is armed or cancelled; lets the event loop
    # discard stale expiry events
    generation: int = 0
    _ids: "itertools.count" = field(default_factory=itertools.count)

    def _form_batch(self, size: int, now_ms: float) -> BatchRequest:
        members = tuple(self.waiting[:size])
        del self.waiting[:size]
        self.generation += 1
        if self.waiting:
            self.window_deadline_ms = now_ms + self.window_ms
        else:
            self.window_deadline_ms = None
        return BatchRequest(
            batch_id=next(self._ids),
            model_id=self.model_id,
            members=members,
            formed_at_ms=now_ms,
        )

    def enqueue(self, req: RequestEvent, now_ms: float) -> BatchRequest | None:
        """Append a request; emit a full batch immediately if at capacity."""
        if req.model_id != self.model_id:
            raise BatcherError(
                f"request for {req.model_id!r} sent to queue {self.model_id!r}"
            )
        was_empty = not self.waiting
        self.waiting.append(req)
        if was_empty:
            self.window_deadline_ms = now_ms + self.window_ms
            self.generation += 1
        if len(self.waiting) >= self.max_batch_size:
            return self._form_batch(self.max_batch_size, now_ms)
        return None

    def poll_window(self, now_ms: float) -> BatchRequest | None:
        """Flush waiting requests once the window deadline has passed.

        Overflow beyond max_batch_size stays queued and re-arms a fresh
        window at now_ms.
        """
        if not self.waiting or self.window_deadline_ms is None:
            return None
        if now_ms < self.window_deadline_ms:
            return None
        size = min(len(self.waiting), self.max_batch_size)
        return self._form_batch(size, now_ms)
