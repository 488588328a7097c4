"""Future-event set, simulation clock and seeded random streams."""
from __future__ import annotations

import heapq
from typing import Any, NamedTuple

import numpy as np

from .errors import SchedulingInPast

ARRIVAL = "arrival"
COMPLETION = "completion"
COOLDOWN_END = "cooldown_end"


class EventRecord(NamedTuple):
    time: float
    seq: int
    kind: str
    target: Any  # server id, or the batch spec for arrivals


class Engine:
    """Binary-heap event queue ordered by ``(time, seq)``.

    Cancellation is lazy: cancelled sequence numbers are skipped when they
    reach the top of the heap. ``next_event`` returns ``None`` once the queue
    is exhausted.
    """

    __slots__ = ("now", "dispatched", "_heap", "_seq", "_cancelled")

    def __init__(self):
        self.now = 0.0
        self.dispatched = 0
        self._heap = []
        self._seq = 0
        self._cancelled = set()

    def schedule(self, time: float, kind: str, target: Any = None) -> int:
        if time < self.now:
            raise SchedulingInPast(f"cannot schedule at {time} < now={self.now}")
        seq = self._seq
        self._seq = seq + 1
        heapq.heappush(self._heap, EventRecord(time, seq, kind, target))
        return seq

    def cancel(self, handle: int) -> None:
        self._cancelled.add(handle)

    def next_event(self) -> EventRecord | None:
        heap = self._heap
        cancelled = self._cancelled
        while heap:
            ev = heapq.heappop(heap)
            if cancelled and ev.seq in cancelled:
                cancelled.discard(ev.seq)
                continue
            self.now = ev.time
            self.dispatched += 1
            return ev
        return None

    def peek_time(self) -> float | None:
        heap = self._heap
        while heap and heap[0].seq in self._cancelled:
            self._cancelled.discard(heapq.heappop(heap).seq)
        return heap[0].time if heap else None

    def __len__(self):
        return len(self._heap) - len(self._cancelled)


# Named streams. Changing r, the dispatch policy or the service law must
# never perturb the arrival sample path, so every consumer owns a stream.
STREAMS = {
    "arrivals": 0,
    "service": 1,
    "removal": 2,
    "eligibility": 3,
    "dispatch": 4,
}


def stream(seed: int, name: str, *index: int, replication: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, replication, name, *index)``."""
    key = (replication, STREAMS[name], *index)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


class DrawBuffer:
    """Pulls scalar draws from a distribution in fixed-size blocks."""

    __slots__ = ("dist", "rng", "block", "_it")

    def __init__(self, dist, rng: np.random.Generator, block: int = 4096):
        self.dist = dist
        self.rng = rng
        self.block = block
        self._it = iter(())

    def __call__(self) -> float:
        try:
            return next(self._it)
        except StopIteration:
            self._it = iter(np.asarray(self.dist.sample(self.rng, self.block), dtype=float).tolist())
            return next(self._it)
