import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from redq.config import Horizon, SystemConfig, load_config
from redq.distributions import Constant, Exponential
from redq.errors import ParseError, ValidationError
from redq.workload import PerBatchList, Poisson, Saturated


def write(tmp_path, data, name="c.json"):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return p


MINIMAL = {"n": 4, "k": 1, "request_degree": 4, "service": "exp(1)", "arrivals": "poisson(2)"}


def test_minimal_defaults(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL))
    assert cfg.removal == Constant(0.0)
    assert cfg.buffer_mode == "central"
    assert cfg.seed == 0
    assert cfg.service == Exponential(1.0)
    assert cfg.arrivals == Poisson(2.0)
    assert cfg.open and cfg.arrival_rate == 2.0
    assert cfg.horizon == Horizon(100_000)


def test_k_exceeds_n(tmp_path):
    with pytest.raises(ValidationError, match="k exceeds n"):
        load_config(write(tmp_path, {**MINIMAL, "n": 2, "k": 3, "request_degree": 3}))


def test_degree_exceeds_eligible_set(tmp_path):
    with pytest.raises(ValidationError, match="request degree exceeds eligible set"):
        load_config(write(tmp_path, {**MINIMAL, "request_degree": 3, "m": 2}))


@pytest.mark.parametrize(
    "patch, key",
    [
        ({"request_degree": 0}, "request_degree"),
        ({"request_degree": 5}, "request_degree"),
        ({"buffer_mode": "ring"}, "buffer_mode"),
        ({"service": "gamma(2)"}, "service"),
        ({"replications": 0}, "replications"),
        ({"horizon": {"weeks": 2}}, "horizon"),
        ({"colour": "blue"}, "colour"),
        ({"regime": "saturated(100)"}, "arrivals"),
        ({"n": 2.5}, "n"),
    ],
)
def test_errors_name_the_key(tmp_path, patch, key):
    with pytest.raises((ParseError, ValidationError)) as info:
        load_config(write(tmp_path, {**MINIMAL, **patch}))
    assert key in str(info.value)


def test_missing_key(tmp_path):
    data = dict(MINIMAL)
    del data["service"]
    with pytest.raises(ValidationError, match="service"):
        load_config(write(tmp_path, data))


def test_json_syntax_error_reports_line(tmp_path):
    with pytest.raises(ParseError, match="line 3"):
        load_config(write(tmp_path, '{\n "n": 4,\n "k": ,\n}'))


def test_saturated_and_list_degrees(tmp_path):
    cfg = load_config(write(tmp_path, {"n": 4, "k": 1, "request_degree": [1, 4, 2], "service": "shiftexp(1,1)", "regime": "saturated(500)"}))
    assert cfg.regime == Saturated(500)
    assert cfg.request_degree == PerBatchList((1, 4, 2))
    assert not cfg.open


def test_trace_file_relative_to_config(tmp_path):
    (tmp_path / "arr.txt").write_text("0\n1\n2\n")
    cfg = load_config(write(tmp_path, {**MINIMAL, "arrivals": "trace(arr.txt)"}))
    assert cfg.arrivals.arrival_times == (0.0, 1.0, 2.0)


configs = st.builds(
    lambda n, k, extra, mode, seed, reps, sat, removal, m_extra: dict(
        n=n, k=min(k, n), request_degree=min(k, n) + extra % (n - min(k, n) + 1),
        service="mixexp(0.25:0.5,0.75:2)", buffer_mode=mode, seed=seed, replications=reps,
        removal=removal,
        **({"regime": f"saturated({sat})"} if sat else {"arrivals": "poisson(1.5)"}),
    ),
    st.integers(1, 8), st.integers(1, 8), st.integers(0, 8), st.sampled_from(["central", "distributed"]),
    st.integers(0, 2**64 - 1), st.integers(1, 20), st.sampled_from([0, 10, 1000]),
    st.sampled_from(["const(0)", "exp(10)", "uniform(0,0.5)"]), st.integers(0, 3),
)


@given(configs)
@settings(max_examples=60)
def test_round_trip(data):
    cfg = SystemConfig.from_dict(data)
    again = SystemConfig.from_dict(json.loads(cfg.to_json()))
    assert again == cfg
    assert again.to_json() == cfg.to_json()
