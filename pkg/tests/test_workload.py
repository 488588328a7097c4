import itertools

import numpy as np
import pytest

from redq.engine import stream
from redq.errors import InvalidRequestDegree, ParseError
from redq.workload import (
    Deterministic, EligibleSets, Fixed, NoArrivals, PerBatchList, Poisson, Saturated,
    TraceArrivals, parse_arrivals, parse_regime, read_trace_file, request_degree_policy,
    sample_eligible_set,
)


def test_deterministic_times():
    assert list(itertools.islice(Deterministic(0.5).times(None), 3)) == [0.5, 1.0, 1.5]


def test_poisson_mean_gap():
    t = np.fromiter(itertools.islice(Poisson(2.0).times(stream(0, "arrivals")), 10**6), float)
    assert abs(np.diff(t, prepend=0.0).mean() - 0.5) < 0.5 * 0.005


def test_trace_ties_keep_order():
    assert list(TraceArrivals((1, 1, 3)).times(None)) == [1.0, 1.0, 3.0]


def test_trace_validation():
    with pytest.raises(ValueError):
        TraceArrivals((2, 1))


def test_trace_file(tmp_path):
    p = tmp_path / "arr.txt"
    p.write_text("# times\n0.5\n1.0\n\n2.25\n")
    assert read_trace_file(p).arrival_times == (0.5, 1.0, 2.25)
    p.write_text("1\n0.5\n")
    with pytest.raises(ParseError, match="line 2"):
        read_trace_file(p)
    p.write_text("1\nabc\n")
    with pytest.raises(ParseError, match="line 2"):
        read_trace_file(p)


def test_parse_arrivals(tmp_path):
    assert parse_arrivals("poisson(2)") == Poisson(2.0)
    assert parse_arrivals("deterministic(0.5)") == Deterministic(0.5)
    assert parse_arrivals("none") == NoArrivals()
    assert parse_arrivals([0, 1, 1]).arrival_times == (0.0, 1.0, 1.0)
    (tmp_path / "t.txt").write_text("0\n3\n")
    assert parse_arrivals("trace(t.txt)", tmp_path).arrival_times == (0.0, 3.0)
    with pytest.raises(ParseError):
        parse_arrivals("bursty(3)")


def test_saturated_regime():
    s = parse_regime("saturated(100)")
    assert s == Saturated(100)
    assert s.measured == 80
    assert s.arrivals().arrival_times == (0.0,) * 100
    assert parse_regime("open") is None
    with pytest.raises(ParseError):
        parse_regime("overloaded")


def test_request_degree_policies():
    assert [request_degree_policy(Fixed(3), i, 1, 4) for i in range(3)] == [3, 3, 3]
    assert [PerBatchList([1, 4, 2]).degree(i) for i in range(3)] == [1, 4, 2]
    with pytest.raises(InvalidRequestDegree):
        request_degree_policy(Fixed(0), 0, k=1, limit=4)
    with pytest.raises(InvalidRequestDegree):
        request_degree_policy(Fixed(5), 0, k=1, limit=4)


def test_eligible_full_set():
    assert sample_eligible_set(None, 4, np.random.default_rng(0)) == frozenset(range(4))
    assert sample_eligible_set(4, 4, np.random.default_rng(0)) == frozenset(range(4))


def test_eligible_frequencies():
    sets = EligibleSets(10, 20, np.random.default_rng(1))
    counts = np.zeros(20)
    for _ in range(10**5):
        s = sets()
        assert len(s) == 10
        counts[list(s)] += 1
    assert np.all(np.abs(counts / 10**5 - 0.5) < 0.01)


def test_eligible_singletons_uniform():
    rng = np.random.default_rng(2)
    counts = np.zeros(3)
    for _ in range(30000):
        (s,) = sample_eligible_set(1, 3, rng)
        counts[s] += 1
    assert np.all(np.abs(counts / 30000 - 1 / 3) < 0.01)
