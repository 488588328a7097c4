"""Distributed-buffer model: each server owns a FIFO buffer.

The ``r`` servers of a batch are fixed at arrival by a dispatch policy and
never revisited. A freed server only looks at the head of its own buffer, so
it may sit idle while jobs wait elsewhere.
"""
from __future__ import annotations

from collections import deque
from typing import Callable, Sequence

import numpy as np

from .central import BUSY, COOLDOWN, IDLE, TRACE_COLUMNS, QueueModel
from .errors import InvalidRequestDegree

DISTRIBUTED_TRACE_COLUMNS = TRACE_COLUMNS + ["buffer_of_server"]

# A policy receives (loads, eligible server ids, r, batch) and returns r
# distinct server ids; the order fixes the job labels within the batch.
DispatchPolicy = Callable[[Sequence[int], Sequence[int], int, object], list]


def least_loaded(loads, eligible, r, batch=None):
    return sorted(eligible, key=lambda s: (loads[s], s))[:r]


class UniformRandom:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def __call__(self, loads, eligible, r, batch=None):
        picks = self.rng.choice(len(eligible), size=r, replace=False)
        return [eligible[i] for i in picks.tolist()]


class RoundRobin:
    def __init__(self):
        self.next = 0

    def __call__(self, loads, eligible, r, batch=None):
        ordered = sorted(eligible)
        start = next((i for i, s in enumerate(ordered) if s >= self.next), 0)
        chosen = [ordered[(start + j) % len(ordered)] for j in range(r)]
        self.next = chosen[-1] + 1
        return chosen


class Scripted:
    """Replays a fixed list of server choices, one entry per batch."""

    def __init__(self, choices: Sequence[Sequence[int]]):
        self.choices = [list(c) for c in choices]
        self.i = 0

    def __call__(self, loads, eligible, r, batch=None):
        chosen = self.choices[self.i]
        self.i += 1
        return chosen


def make_policy(name: str, rng: np.random.Generator | None = None):
    if name == "least-loaded":
        return least_loaded
    if name == "uniform-random":
        return UniformRandom(rng if rng is not None else np.random.default_rng(0))
    if name == "round-robin":
        return RoundRobin()
    raise ValueError(f"unknown dispatch policy {name!r}")


class DistributedQueue(QueueModel):
    kind = "distributed"

    def __init__(self, n, k, service, removal=None, engine=None, *, policy=least_loaded, **kwargs):
        super().__init__(n, k, service, removal, engine, **kwargs)
        self.queues = [deque() for _ in range(n)]
        self.qlen = [0] * n
        self.policy = policy

    def loads(self):
        return [self.qlen[s] + (self.mode[s] == BUSY) for s in range(self.n)]

    def dispatch(self, batch):
        eligible = sorted(batch.eligible) if batch.eligible is not None else list(range(self.n))
        if batch.r < batch.k or batch.r > len(eligible):
            raise InvalidRequestDegree(
                f"batch {batch.id}: request degree {batch.r} outside [{batch.k}, {len(eligible)}]"
            )
        if batch.r == len(eligible):
            chosen = eligible
        else:
            chosen = list(self.policy(self.loads(), eligible, batch.r, batch))
        if len(set(chosen)) != batch.r or any(s not in eligible for s in chosen):
            raise InvalidRequestDegree(f"policy returned invalid servers {chosen} for r={batch.r}")
        return chosen

    def on_arrival(self, batch):
        chosen = self.dispatch(batch)
        self.arrivals += 1
        batch.queued_at = set()
        # job labels follow the dispatch order
        for label, s in enumerate(chosen):
            if self.mode[s] == IDLE and not self.qlen[s]:
                self._start(s, batch, label)
            else:
                batch.touched.add(s)
                batch.queued_at.add(s)
                self.queues[s].append((batch, label))
                self.qlen[s] += 1

    def _refill(self, s):
        q = self.queues[s]
        while q:
            batch, label = q.popleft()
            if batch.departed:
                continue
            self.qlen[s] -= 1
            batch.queued_at.discard(s)
            self._start(s, batch, label)
            return

    def _drop_queued(self, batch):
        for s in batch.queued_at:
            self.qlen[s] -= 1
        batch.queued_at.clear()
        batch.unassigned = 0

    def buffer_len(self):
        return sum(self.qlen)

    def _trace_row(self, ev, server, bid):
        row = super()._trace_row(ev, server, bid)
        row.append(self.qlen[server] if server is not None else None)
        return row

    def snapshot(self):
        servers = []
        for s in range(self.n):
            if self.mode[s] == BUSY:
                servers.append((self.job[s].id, self.job_index[s]))
            elif self.mode[s] == COOLDOWN:
                servers.append("cooldown")
            else:
                servers.append(None)
        buffers = [[b.id for b, _ in q if not b.departed] for q in self.queues]
        return {"servers": servers, "buffers": buffers}
