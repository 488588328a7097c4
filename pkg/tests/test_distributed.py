import pytest

from redq.central import Batch
from redq.config import Horizon, SystemConfig
from redq.distributed import DistributedQueue, RoundRobin, Scripted, UniformRandom, least_loaded, make_policy
from redq.distributions import Exponential, MixtureExponential
from redq.engine import ARRIVAL
from redq.errors import InvalidRequestDegree
from redq.simulate import run
from redq.workload import NoArrivals, Poisson, Saturated

import numpy as np

from golden import EXAMPLE2_STEPS, ScriptedService, example2_states, golden_mismatches


def test_example2_golden_trace():
    assert golden_mismatches(example2_states(), EXAMPLE2_STEPS) == []


def test_least_loaded_ties_by_id():
    assert least_loaded([3, 1, 1, 2], [0, 1, 2, 3], 2) == [1, 2]
    assert least_loaded([0, 0, 0, 0], [3, 1, 2], 2) == [1, 2]


def test_other_policies_pick_distinct_servers():
    rr = RoundRobin()
    assert rr(None, [0, 1, 2, 3], 3) == [0, 1, 2]
    assert rr(None, [0, 1, 2, 3], 3) == [3, 0, 1]
    ur = UniformRandom(np.random.default_rng(0))
    for _ in range(50):
        pick = ur(None, [0, 1, 2, 3, 4], 3)
        assert len(set(pick)) == 3
    with pytest.raises(ValueError):
        make_policy("shortest-expected-delay")


def test_bad_policy_output_rejected():
    model = DistributedQueue(4, 1, lambda s: 1.0, policy=Scripted([[0, 0]]))
    with pytest.raises(InvalidRequestDegree):
        model.on_arrival(Batch(0, 0.0, 1, 2))


def test_queued_sibling_dropped_at_departure():
    svc = ScriptedService({0: [1.0], 1: [5.0, 7.0]})
    model = DistributedQueue(2, 1, svc, policy=Scripted([[1], [0, 1]]))
    model.engine.schedule(0.0, ARRIVAL, Batch(0, 0.0, 1, 1))
    model.engine.schedule(0.5, ARRIVAL, Batch(1, 0.5, 1, 2))
    for _ in range(3):
        model.handle_event(model.engine.next_event())
    # batch 1 finished on server 0 at t=1.5; its copy queued at server 1 is gone
    assert model.departures == 1
    assert model.qlen == [0, 0]
    assert model.snapshot()["servers"] == [None, (0, 0)]
    model.handle_event(model.engine.next_event())  # t=5
    assert model.snapshot() == {"servers": [None, None], "buffers": [[], []]}


@pytest.mark.parametrize("regime", [None, Saturated(300)])
def test_full_redundancy_matches_central(regime):
    base = SystemConfig(
        n=4, k=2, request_degree=4, service=MixtureExponential(((0.3, 0.5), (0.7, 2.0))),
        arrivals=Poisson(1.0) if regime is None else NoArrivals(),
        regime=regime, horizon=Horizon(2000), seed=5,
    )
    a = run(base, trace=True)
    b = run(base.with_(buffer_mode="distributed"), trace=True)
    # buffer_len counts waiting jobs in one mode and batches in the other
    strip = lambda rows: [r[:5] + r[6:7] for r in rows]
    assert strip(b.trace) == strip(a.trace)
    assert a.mean_latency == b.mean_latency


def test_distributed_idles_where_central_would_not():
    # with k=1, r=1 and a bad static split, distributed is slower than central
    cfg = SystemConfig(n=4, k=1, request_degree=2, service=Exponential(1.0), arrivals=Poisson(2.5), horizon=Horizon(20000), seed=2)
    c = run(cfg).mean_latency
    d = run(cfg.with_(buffer_mode="distributed")).mean_latency
    assert d > c
