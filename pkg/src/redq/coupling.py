"""Coupled replay of two systems under one abstract event sequence.

With memoryless service every server runs a timer even while idle (a firing
at an idle server is a no-op), so the future of both systems is driven by a
race between the arrival process and ``n`` timers. Which process fires next
can then be treated as an arbitrary choice, and batch-count dominance is
checked exactly along every sequence.

Events are encoded as integers: ``ARRIVAL`` (-1) or a timer index
``0..n-1``. Files use one event per line, ``A`` or ``T<i>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numba
import numpy as np

from .errors import InvalidRequestDegree, ParseError

ARRIVAL = -1

# Arrival then a firing at index 1: with r1=1 that index is idle in system 1,
# with r2=2 it is busy in system 2, so b1 = (1, 1) and b2 = (1, 0).
STRICTNESS_WITNESS = (ARRIVAL, 1)


@dataclass
class ReplayTrace:
    events: list
    b1: list
    b2: list
    first_violation: int | None  # first z with b1[z] < b2[z]

    @property
    def holds(self) -> bool:
        return self.first_violation is None

    @property
    def strict_somewhere(self) -> bool:
        return any(x > y for x, y in zip(self.b1, self.b2))


def parse_events(lines: Iterable[str], n: int | None = None) -> list[int]:
    events = []
    for lineno, raw in enumerate(lines, start=1):
        tok = raw.strip()
        if not tok or tok.startswith("#"):
            continue
        if tok == "A":
            events.append(ARRIVAL)
        elif tok[0] == "T" and tok[1:].isdigit():
            i = int(tok[1:])
            if n is not None and i >= n:
                raise ParseError(f"timer index {i} >= n={n}", line=lineno)
            events.append(i)
        else:
            raise ParseError(f"expected 'A' or 'T<i>', got {tok!r}", line=lineno)
    return events


def read_events(path, n: int | None = None) -> list[int]:
    return parse_events(Path(path).read_text().splitlines(), n)


def format_events(events: Iterable[int]) -> str:
    return "".join("A\n" if e == ARRIVAL else f"T{e}\n" for e in events)


def random_sequences(n: int, count: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """Each event is an arrival w.p. 1/(n+1), else a uniform timer index."""
    draws = rng.integers(0, n + 1, size=(count, length), dtype=np.int16)
    draws[draws == n] = ARRIVAL
    return draws


def burst_sequences(n: int, length: int) -> list[list[int]]:
    """Deterministic adversarial corpus: bursts, idle-index hammering, drains."""
    out = []
    half = length // 2
    out.append([ARRIVAL] * half + [i % n for i in range(length - half)])
    out.append([ARRIVAL] * half + [n - 1] * (length - half))
    seq = []
    while len(seq) < length:
        seq += [ARRIVAL] * 3 + [n - 1 - (len(seq) % n)] * 2
    out.append(seq[:length])
    seq = []
    z = 0
    while len(seq) < length:
        seq += [ARRIVAL] + list(range(n - 1, -1, -1)) + [ARRIVAL] * (z % 4)
        z += 1
    out.append(seq[:length])
    out.append([ARRIVAL if z % (n + 2) == 0 else (z * 7) % n for z in range(length)])
    return out


# -- k = 1: busy-first occupancy rule --------------------------------------------


def _check_k1(n, r1, r2):
    if not 1 <= r1 < r2 <= n:
        raise InvalidRequestDegree(f"need 1 <= r1 < r2 <= n, got r1={r1}, r2={r2}, n={n}")


def replay_k1(n: int, r1: int, r2: int, events: Sequence[int]) -> ReplayTrace:
    """Replay with servers re-indexed busy-first after every service event.

    With k=1 every job in the system belongs to an unserved batch, so the
    busy servers are exactly indices ``0 .. min(r*b, n) - 1`` and a timer at
    index ``i`` completes a batch iff ``i`` lies in that range.
    """
    _check_k1(n, r1, r2)
    ev = np.asarray(events, dtype=np.int64).reshape(1, -1)
    b1, b2 = _k1_counts(n, r1, r2, ev)
    return _trace(list(events), b1[0].tolist(), b2[0].tolist())


def _k1_counts(n, r1, r2, ev):
    count, length = ev.shape
    b1 = np.zeros(count, dtype=np.int64)
    b2 = np.zeros(count, dtype=np.int64)
    out1 = np.empty((count, length), dtype=np.int64)
    out2 = np.empty((count, length), dtype=np.int64)
    for z in range(length):
        e = ev[:, z]
        arr = e == ARRIVAL
        b1 = b1 + arr - (~arr & (e < np.minimum(r1 * b1, n)))
        b2 = b2 + arr - (~arr & (e < np.minimum(r2 * b2, n)))
        out1[:, z] = b1
        out2[:, z] = b2
    return out1, out2


def check_k1(n: int, r1: int, r2: int, sequences: np.ndarray) -> np.ndarray:
    """First violating index per sequence, -1 where dominance holds."""
    _check_k1(n, r1, r2)
    b1, b2 = _k1_counts(n, r1, r2, np.asarray(sequences, dtype=np.int64))
    return _first_violation(b1, b2)


def _first_violation(b1, b2):
    bad = b1 < b2
    first = np.where(bad.any(axis=1), bad.argmax(axis=1), -1)
    return first


def _trace(events, b1, b2):
    first = next((z for z, (x, y) in enumerate(zip(b1, b2)) if x < y), None)
    return ReplayTrace(events, b1, b2, first)


# -- general k: full scheduling semantics with fixed server identities ------------


class _Rec:
    __slots__ = ("completed", "unassigned", "touched")

    def __init__(self, r):
        self.completed = 0
        self.unassigned = r
        self.touched = set()


class ReplaySystem:
    """First-come first-served redundant-request system in event-index time.

    Zero removal cost. ``step`` applies one event; a timer at an idle server
    is a no-op. ``busy_first`` re-indexes servers after each service event.
    """

    def __init__(self, n: int, k: int, r: int, busy_first: bool = False):
        self.n, self.k, self.r = n, k, r
        self.busy_first = busy_first
        self.serving = [None] * n  # batch record per server
        self.batches = []  # unserved batches in arrival order

    @property
    def count(self):
        return len(self.batches)

    def busy(self):
        return [s for s in range(self.n) if self.serving[s] is not None]

    def step(self, event):
        if event == ARRIVAL:
            batch = _Rec(self.r)
            self.batches.append(batch)
            for s in range(self.n):
                if not batch.unassigned:
                    break
                if self.serving[s] is None:
                    self._assign(s, batch)
            return
        batch = self.serving[event]
        if batch is not None:
            batch.completed += 1
            self.serving[event] = None
            freed = [event]
            if batch.completed == self.k:
                self.batches.remove(batch)
                for s in range(self.n):
                    if self.serving[s] is batch:
                        self.serving[s] = None
                        freed.append(s)
                batch.unassigned = 0
            for s in sorted(freed):
                for cand in self.batches:
                    if cand.unassigned and s not in cand.touched:
                        self._assign(s, cand)
                        break
        if self.busy_first:
            self._permute()

    def _assign(self, s, batch):
        self.serving[s] = batch
        batch.unassigned -= 1
        batch.touched.add(s)

    def _permute(self):
        order = self.busy() + [s for s in range(self.n) if self.serving[s] is None]
        relabel = {old: new for new, old in enumerate(order)}
        self.serving = [self.serving[old] for old in order]
        for batch in self.batches:
            batch.touched = {relabel[s] for s in batch.touched}


def _check_general(n, k, r_alt):
    if not 1 <= k <= r_alt <= n:
        raise InvalidRequestDegree(f"need k <= r_alt <= n, got k={k}, r_alt={r_alt}, n={n}")


def replay_reference(n, k, r_a, r_b, events, busy_first=False) -> ReplayTrace:
    """Pure-Python lockstep replay of two :class:`ReplaySystem` instances."""
    a = ReplaySystem(n, k, r_a, busy_first)
    b = ReplaySystem(n, k, r_b, busy_first)
    b1, b2 = [], []
    for e in events:
        a.step(e)
        b.step(e)
        b1.append(a.count)
        b2.append(b.count)
    return _trace(list(events), b1, b2)


def replay_general_k(n: int, k: int, r_alt: int, events: Sequence[int]) -> ReplayTrace:
    """System A uses ``r_alt``, system B sends every batch to all ``n`` servers."""
    _check_general(n, k, r_alt)
    ev = np.asarray(events, dtype=np.int64)
    out = np.empty((2, len(ev)), dtype=np.int64)
    _replay_pair(n, k, r_alt, n, ev, out)
    return _trace(list(events), out[0].tolist(), out[1].tolist())


def check_general_k(n: int, k: int, r_alt: int, sequences: np.ndarray) -> np.ndarray:
    _check_general(n, k, r_alt)
    seqs = np.ascontiguousarray(sequences, dtype=np.int64)
    return _check_many(n, k, r_alt, n, seqs)


@numba.njit(cache=True)
def _replay_pair(n, k, r_a, r_b, events, out):
    length = events.shape[0]
    cap = length + 1
    serving = np.full((2, n), -1, np.int64)
    completed = np.zeros((2, cap), np.int64)
    unassigned = np.zeros((2, cap), np.int64)
    touched = np.zeros((2, cap), np.int64)  # bitmask over servers
    alive = np.zeros((2, cap), np.bool_)
    head = np.zeros(2, np.int64)  # no slot before head can take a job
    tail = np.zeros(2, np.int64)
    count = np.zeros(2, np.int64)
    for z in range(length):
        e = events[z]
        for sy in range(2):
            r = r_a if sy == 0 else r_b
            if e < 0:
                slot = tail[sy]
                tail[sy] += 1
                completed[sy, slot] = 0
                unassigned[sy, slot] = r
                touched[sy, slot] = 0
                alive[sy, slot] = True
                count[sy] += 1
                for s in range(n):
                    if unassigned[sy, slot] == 0:
                        break
                    if serving[sy, s] < 0:
                        serving[sy, s] = slot
                        touched[sy, slot] |= 1 << s
                        unassigned[sy, slot] -= 1
            else:
                slot = serving[sy, e]
                if slot < 0:
                    continue
                completed[sy, slot] += 1
                serving[sy, e] = -1
                freed = 1 << e
                if completed[sy, slot] == k:
                    alive[sy, slot] = False
                    unassigned[sy, slot] = 0
                    count[sy] -= 1
                    for s in range(n):
                        if serving[sy, s] == slot:
                            serving[sy, s] = -1
                            freed |= 1 << s
                while head[sy] < tail[sy] and (not alive[sy, head[sy]] or unassigned[sy, head[sy]] == 0):
                    head[sy] += 1
                for s in range(n):
                    if not (freed >> s) & 1:
                        continue
                    for c in range(head[sy], tail[sy]):
                        if alive[sy, c] and unassigned[sy, c] > 0 and not (touched[sy, c] >> s) & 1:
                            serving[sy, s] = c
                            touched[sy, c] |= 1 << s
                            unassigned[sy, c] -= 1
                            break
        out[0, z] = count[0]
        out[1, z] = count[1]


@numba.njit(cache=True)
def _check_many(n, k, r_a, r_b, seqs):
    m, length = seqs.shape
    first = np.full(m, -1, np.int64)
    out = np.empty((2, length), np.int64)
    for i in range(m):
        _replay_pair(n, k, r_a, r_b, seqs[i], out)
        for z in range(length):
            if out[0, z] < out[1, z]:
                first[i] = z
                break
    return first
