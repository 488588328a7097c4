"""Drive a queue model under a workload and collect per-run statistics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .central import Batch, CentralizedQueue
from .config import SystemConfig
from .distributed import DistributedQueue, make_policy
from .distributions import is_zero
from .engine import ARRIVAL, DrawBuffer, Engine, stream
from .workload import EligibleSets

WARMUP_FRACTION = 0.1


@dataclass
class RunResult:
    r_values: tuple
    mean_latency: float
    throughput: float
    measured: int  # departures in the measurement window
    departures: int
    arrivals: int
    end_time: float
    latencies: np.ndarray = field(repr=False)
    all_latencies: np.ndarray = field(repr=False)
    occupancy_time: np.ndarray = field(repr=False)
    trace: list | None = field(default=None, repr=False)
    model: object = field(default=None, repr=False)

    @property
    def occupancy_pmf(self) -> np.ndarray:
        total = self.occupancy_time.sum()
        return self.occupancy_time / total if total > 0 else self.occupancy_time

    @property
    def occupancy_ccdf(self) -> np.ndarray:
        """P(B > x) for x = 0, 1, ..., time-averaged over the run."""
        return np.clip(1.0 - np.cumsum(self.occupancy_pmf), 0.0, 1.0)

    @property
    def mean_occupancy(self) -> float:
        pmf = self.occupancy_pmf
        return float(np.dot(np.arange(len(pmf)), pmf))


def build_model(
    config: SystemConfig,
    replication: int = 0,
    *,
    trace: bool = False,
    record_servers: bool = False,
    policy=None,
):
    seed = config.seed
    services = [
        DrawBuffer(config.service, stream(seed, "service", s, replication=replication))
        for s in range(config.n)
    ]
    service = lambda s: services[s]()
    removal = None
    if not is_zero(config.removal):
        draws = DrawBuffer(config.removal, stream(seed, "removal", replication=replication))
        removal = lambda s: draws()
    engine = Engine()
    kwargs = dict(trace=trace, record_servers=record_servers)
    if config.buffer_mode == "distributed":
        if policy is None:
            policy = make_policy(config.dispatch, stream(seed, "dispatch", replication=replication))
        return DistributedQueue(config.n, config.k, service, removal, engine, policy=policy, **kwargs)
    return CentralizedQueue(config.n, config.k, service, removal, engine, **kwargs)


def run(
    config: SystemConfig,
    replication: int = 0,
    *,
    trace: bool = False,
    record_servers: bool = False,
    max_events: int | None = None,
    policy=None,
    observer=None,
    keep_model: bool = False,
) -> RunResult:
    """Simulate one replication.

    Open regime: stop at ``horizon.batches`` departures (or at
    ``horizon.time``) and drop the first 10% of departures as warm-up.
    Saturated regime: the backlog sits in the buffer at t=0 and the run stops
    after the measured prefix of departures.
    """
    model = build_model(config, replication, trace=trace, record_servers=record_servers, policy=policy)
    engine = model.engine
    seed, n, k = config.seed, config.n, config.k

    if config.open:
        process = config.arrivals
        target = config.horizon.batches
        t_stop = config.horizon.time
    else:
        process = config.regime.arrivals()
        target = config.regime.measured
        t_stop = None
    times = process.times(stream(seed, "arrivals", replication=replication))
    degree = config.request_degree.degree
    eligible = (
        EligibleSets(config.m, n, stream(seed, "eligibility", replication=replication))
        if config.m is not None
        else None
    )
    next_id = 0

    def schedule_next():
        nonlocal next_id
        t = next(times, None)
        if t is None:
            return
        batch = Batch(next_id, t, k, degree(next_id), eligible() if eligible is not None else None)
        next_id += 1
        engine.schedule(t, ARRIVAL, batch)

    schedule_next()
    handle = model.handle_event
    while True:
        if max_events is not None and engine.dispatched >= max_events:
            break
        ev = engine.next_event()
        if ev is None:
            break
        if t_stop is not None and ev.time > t_stop:
            break
        if ev.kind is ARRIVAL:
            schedule_next()
        handle(ev)
        if observer is not None:
            observer(model, ev)
        if target is not None and model.departures >= target:
            break
    end = t_stop if t_stop is not None else engine.now
    model.close(end)

    arr = np.asarray(model.departure_arrival, dtype=float)
    dep = np.asarray(model.departure_time, dtype=float)
    lat = dep - arr
    if config.open:
        skip = int(WARMUP_FRACTION * len(lat))
        window = lat[skip:]
        t0 = dep[skip - 1] if skip > 0 else 0.0
        span = end - t0
    else:
        window = lat[:target]
        span = dep[len(window) - 1] if len(window) else 0.0
    mean = float(window.mean()) if len(window) else float("nan")
    throughput = len(window) / span if span > 0 else float("nan")
    return RunResult(
        r_values=config.request_degree.values(),
        mean_latency=mean,
        throughput=throughput,
        measured=len(window),
        departures=model.departures,
        arrivals=model.arrivals,
        end_time=end,
        latencies=window,
        all_latencies=lat,
        occupancy_time=np.asarray(model.occupancy_time()),
        trace=model.trace_rows,
        model=model if keep_model else None,
    )


def run_replications(config: SystemConfig, replications: int | None = None, **kwargs) -> list[RunResult]:
    reps = config.replications if replications is None else replications
    return [run(config, i, **kwargs) for i in range(reps)]
