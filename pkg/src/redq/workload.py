"""Arrival processes, load regimes, request degrees and eligible subsets."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .distributions import Exponential
from .engine import DrawBuffer
from .errors import InvalidRequestDegree, ParseError


class ArrivalProcess:
    def times(self, rng: np.random.Generator) -> Iterator[float]:
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError

    @property
    def rate(self) -> float | None:
        return None


@dataclass(frozen=True)
class Poisson(ArrivalProcess):
    rate_: float

    def __post_init__(self):
        if not self.rate_ > 0:
            raise ValueError(f"Poisson rate must be positive, got {self.rate_}")

    @property
    def rate(self):
        return self.rate_

    def times(self, rng):
        gap = DrawBuffer(Exponential(self.rate_), rng)
        t = 0.0
        while True:
            t += gap()
            yield t

    def spec(self):
        return f"poisson({self.rate_!r})"


@dataclass(frozen=True)
class Deterministic(ArrivalProcess):
    interval: float

    def __post_init__(self):
        if not self.interval > 0:
            raise ValueError(f"interval must be positive, got {self.interval}")

    @property
    def rate(self):
        return 1.0 / self.interval

    def times(self, rng):
        i = 1
        while True:
            yield i * self.interval
            i += 1

    def spec(self):
        return f"deterministic({self.interval!r})"


@dataclass(frozen=True)
class TraceArrivals(ArrivalProcess):
    arrival_times: tuple[float, ...]
    source: str | None = None

    def __post_init__(self):
        ts = tuple(float(t) for t in self.arrival_times)
        object.__setattr__(self, "arrival_times", ts)
        if any(t < 0 for t in ts):
            raise ValueError("trace times must be nonnegative")
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("trace times must be non-decreasing")

    def times(self, rng):
        return iter(self.arrival_times)

    def spec(self):
        if self.source is not None:
            return f"trace({self.source})"
        return "trace([" + ",".join(repr(t) for t in self.arrival_times) + "])"


@dataclass(frozen=True)
class NoArrivals(ArrivalProcess):
    def times(self, rng):
        return iter(())

    def spec(self):
        return "none"


def next_arrival(times: Iterator[float]) -> float | None:
    return next(times, None)


def read_trace_file(path) -> TraceArrivals:
    times = []
    prev = -math.inf
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            t = float(line)
        except ValueError:
            raise ParseError(f"not a decimal time: {line!r}", line=lineno) from None
        if not (t >= 0 and math.isfinite(t)):
            raise ParseError(f"time must be a nonnegative number: {line!r}", line=lineno)
        if t < prev:
            raise ParseError(f"times must be sorted ({t} after {prev})", line=lineno)
        prev = t
        times.append(t)
    return TraceArrivals(tuple(times), source=str(path))


_CALL = re.compile(r"^\s*([a-z]+)\s*\((.*)\)\s*$")


def parse_arrivals(spec, base_dir: Path | None = None) -> ArrivalProcess:
    if spec is None:
        return NoArrivals()
    if isinstance(spec, (list, tuple)):
        return TraceArrivals(tuple(spec))
    text = str(spec).strip()
    if text.lower() == "none":
        return NoArrivals()
    m = _CALL.match(text)
    if not m:
        raise ParseError(f"not an arrival spec: {text!r}")
    name, body = m.groups()
    try:
        if name == "poisson":
            return Poisson(float(body))
        if name == "deterministic":
            return Deterministic(float(body))
        if name == "trace":
            body = body.strip()
            if body.startswith("["):
                inner = body.strip("[]").strip()
                return TraceArrivals(tuple(float(x) for x in inner.split(",")) if inner else ())
            path = Path(body)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return read_trace_file(path)
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{text!r}: {exc}") from None
    raise ParseError(f"unknown arrival process {name!r}")


@dataclass(frozen=True)
class Open:
    arrivals: ArrivalProcess

    def spec(self):
        return "open"


@dataclass(frozen=True)
class Saturated:
    """``backlog`` batches present at t=0 and no further arrivals.

    Statistics cover the first ``measured_fraction * backlog`` departures,
    the window in which every server stays busy.
    """

    backlog: int = 10_000
    measured_fraction: float = 0.8

    def __post_init__(self):
        if self.backlog < 1:
            raise ValueError("saturated regime needs a backlog of at least one batch")

    @property
    def measured(self) -> int:
        return max(1, int(self.measured_fraction * self.backlog))

    def arrivals(self) -> TraceArrivals:
        return TraceArrivals((0.0,) * self.backlog)

    def spec(self):
        return f"saturated({self.backlog})"


def parse_regime(spec) -> Open | Saturated | None:
    """Returns None for ``open`` (arrivals are attached by the caller)."""
    if spec is None or spec == "open":
        return None
    if isinstance(spec, dict) and set(spec) == {"saturated"}:
        return Saturated(int(spec["saturated"]))
    m = _CALL.match(str(spec))
    if m and m.group(1) == "saturated":
        try:
            return Saturated(int(m.group(2)))
        except ValueError as exc:
            raise ParseError(f"bad backlog in {spec!r}: {exc}") from None
    if str(spec) == "saturated":
        return Saturated()
    raise ParseError(f"unknown regime {spec!r}")


# -- request degrees and eligibility ------------------------------------------


@dataclass(frozen=True)
class Fixed:
    r: int

    def degree(self, batch_index: int) -> int:
        return self.r

    def values(self):
        return (self.r,)

    def to_json(self):
        return self.r


@dataclass(frozen=True)
class PerBatchList:
    """Explicit per-batch degrees; cycles when batches outnumber entries."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(r) for r in self.degrees))
        if not self.degrees:
            raise InvalidRequestDegree("per-batch degree list is empty")

    def degree(self, batch_index: int) -> int:
        return self.degrees[batch_index % len(self.degrees)]

    def values(self):
        return self.degrees

    def to_json(self):
        return list(self.degrees)


def make_degree_policy(spec) -> Fixed | PerBatchList:
    if isinstance(spec, (Fixed, PerBatchList)):
        return spec
    if isinstance(spec, (list, tuple)):
        return PerBatchList(tuple(spec))
    return Fixed(int(spec))


def check_degree(r: int, k: int, limit: int) -> None:
    if r < k:
        raise InvalidRequestDegree(f"request degree {r} is below k={k}")
    if r > limit:
        raise InvalidRequestDegree(f"request degree {r} exceeds the {limit} eligible servers")


def request_degree_policy(policy, batch_index: int, k: int = 1, limit: int | None = None) -> int:
    r = make_degree_policy(policy).degree(batch_index)
    check_degree(r, k, limit if limit is not None else r)
    return r


def sample_eligible_set(m: int | None, n: int, rng: np.random.Generator) -> frozenset[int]:
    if m is None or m == n:
        return frozenset(range(n))
    if not 1 <= m <= n:
        raise ValueError(f"eligible-set size {m} outside [1, {n}]")
    return frozenset(rng.choice(n, size=m, replace=False).tolist())


class EligibleSets:
    """Fresh uniform m-subset per batch from the eligibility stream."""

    def __init__(self, m: int, n: int, rng: np.random.Generator, block: int = 1024):
        self.m, self.n, self.rng, self.block = m, n, rng, block
        self._it = iter(())

    def __call__(self) -> frozenset[int]:
        try:
            return next(self._it)
        except StopIteration:
            # argsort of iid uniforms gives a uniform random permutation per row
            keys = self.rng.random((self.block, self.n))
            rows = np.argpartition(keys, self.m - 1, axis=1)[:, : self.m]
            self._it = iter([frozenset(row) for row in rows.tolist()])
            return next(self._it)


def degrees_valid(values: Sequence[int], k: int, limit: int) -> None:
    for r in values:
        check_degree(r, k, limit)
