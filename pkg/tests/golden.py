"""Hand-encoded walk-throughs of the two illustrative scheduling examples.

Servers are 0-based here (the walk-throughs number them 1..4). Batches A, B, C
have ids 0, 1, 2 and job labels 0, 1, 2 in the order their jobs were placed.
Service durations are scripted per server so the completions happen in the
documented order.
"""
from __future__ import annotations

from redq.central import Batch, CentralizedQueue
from redq.distributed import DistributedQueue, Scripted
from redq.engine import ARRIVAL


class ScriptedService:
    def __init__(self, durations):
        self.durations = {s: list(d) for s, d in durations.items()}

    def __call__(self, s):
        return self.durations[s].pop(0)


A, B, C = 0, 1, 2

# (time, arrival batch id or None, expected snapshot after the event)
EXAMPLE1_SERVICE = {0: [3, 100], 1: [4, 100], 2: [100, 1], 3: [100]}
EXAMPLE1_ARRIVALS = [0.0, 1.0, 2.0]
EXAMPLE1_STEPS = [
    # A arrives, three idle servers take A1..A3
    ("arrival", 0.0, {"servers": [(A, 0), (A, 1), (A, 2), None], "buffer": []}),
    # B arrives, only server 4 idle: it takes B1
    ("arrival", 1.0, {"servers": [(A, 0), (A, 1), (A, 2), (B, 0)], "buffer": [(B, 2)]}),
    ("arrival", 2.0, {"servers": [(A, 0), (A, 1), (A, 2), (B, 0)], "buffer": [(B, 2), (C, 3)]}),
    # server 1 finishes A1 and takes the earliest waiting job, B2
    ("completion", 3.0, {"servers": [(B, 1), (A, 1), (A, 2), (B, 0)], "buffer": [(B, 1), (C, 3)]}),
    # server 2 finishes A2: A is served, A3 leaves server 3; servers 2, 3 take B3, C1
    ("completion", 4.0, {"servers": [(B, 1), (B, 2), (C, 0), (B, 0)], "buffer": [(C, 2)]}),
    # server 3 finishes C1 and may not serve C again, so it idles
    ("completion", 5.0, {"servers": [(B, 1), (B, 2), None, (B, 0)], "buffer": [(C, 2)]}),
]

EXAMPLE2_SERVICE = {0: [2], 1: [3, 100], 2: [100, 100], 3: [100]}
EXAMPLE2_ARRIVALS = [0.0, 1.0]
EXAMPLE2_DISPATCH = [[0, 1, 2], [3, 2, 1]]  # B1 -> server 4, B2 -> 3, B3 -> 2
EXAMPLE2_STEPS = [
    ("arrival", 0.0, {"servers": [(A, 0), (A, 1), (A, 2), None], "buffers": [[], [], [], []]}),
    # B goes to buffers 2, 3, 4; server 4 is idle and starts B1 at once
    ("arrival", 1.0, {"servers": [(A, 0), (A, 1), (A, 2), (B, 0)], "buffers": [[], [B], [B], []]}),
    # server 1 finishes A1 with nothing in its own buffer
    ("completion", 2.0, {"servers": [None, (A, 1), (A, 2), (B, 0)], "buffers": [[], [B], [B], []]}),
    # server 2 finishes A2: A3 is removed; servers 2 and 3 start B3 and B2
    ("completion", 3.0, {"servers": [None, (B, 2), (B, 1), (B, 0)], "buffers": [[], [], [], []]}),
]


def _drive(model, arrivals, k, r):
    for i, t in enumerate(arrivals):
        model.engine.schedule(t, ARRIVAL, Batch(i, t, k, r))
    states = []
    while (ev := model.engine.next_event()) is not None:
        model.handle_event(ev)
        states.append((ev.kind, ev.time, model.snapshot()))
        if len(states) == len(arrivals) + 3:
            break
    return states


def example1_states(removal=None):
    model = CentralizedQueue(4, 2, ScriptedService(EXAMPLE1_SERVICE), removal, trace=True)
    return _drive(model, EXAMPLE1_ARRIVALS, 2, 3)


def example2_states():
    model = DistributedQueue(
        4, 2, ScriptedService(EXAMPLE2_SERVICE), policy=Scripted(EXAMPLE2_DISPATCH), trace=True
    )
    states = _drive(model, EXAMPLE2_ARRIVALS, 2, 3)
    return states[: len(EXAMPLE2_STEPS)]


def golden_mismatches(states, expected):
    """List of (step, got, want) where a snapshot differs."""
    out = []
    for i, want in enumerate(expected):
        got = states[i] if i < len(states) else None
        if got is None or got[0] != want[0] or got[1] != want[1] or got[2] != want[2]:
            out.append((i, got, want))
    return out
