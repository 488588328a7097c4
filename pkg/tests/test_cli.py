import json

import pytest

from redq.cli import main, parse_range
from redq.experiments import PRESETS, run_preset


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({
        "n": 4, "k": 1, "request_degree": 2, "service": "exp(1)",
        "arrivals": "poisson(1.5)", "replications": 2, "horizon": 2000,
    }))
    return p


def test_parse_range_inclusive():
    assert parse_range("0.5:2.0:0.5") == [0.5, 1.0, 1.5, 2.0]
    assert len(parse_range("0.5:2.0:0.1")) == 16
    assert parse_range("1,2.5") == [1.0, 2.5]


def test_validate(cfg, capsys):
    assert main(["validate", str(cfg)]) == 0
    echoed = json.loads(capsys.readouterr().out)
    assert echoed["removal"] == "const(0)"
    assert echoed["buffer_mode"] == "central"


def test_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"n": 2, "k": 3, "request_degree": 3, "service": "exp(1)"}))
    assert main(["validate", str(p)]) == 2
    assert "k exceeds n" in capsys.readouterr().err


def test_run_and_seed_override(cfg, capsys, monkeypatch):
    assert main(["run", str(cfg)]) == 0
    first = capsys.readouterr().out
    assert main(["run", str(cfg)]) == 0
    assert capsys.readouterr().out == first
    monkeypatch.setenv("REDQ_SEED", "9")
    assert main(["run", str(cfg)]) == 0
    other = capsys.readouterr().out
    assert other != first
    assert '"seed": 9' in other
    assert main(["run", str(cfg), "--seed", "0"]) == 0
    assert capsys.readouterr().out == first


def test_sweep(cfg, capsys):
    assert main(["sweep", str(cfg), "--degrees", "1,2,4", "--lambdas", "0.5:1.0:0.5"]) == 0
    rows = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert rows[0].startswith("r,regime,lambda")
    assert [r.split(",")[:3] for r in rows[1:]] == [
        [r, "open:central", lam] for lam in ("0.5", "1.0") for r in ("1", "2", "4")
    ]


def test_trace(cfg, capsys):
    assert main(["trace", str(cfg), "--events", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "event_seq,time,kind,server_id,batch_id,buffer_len,in_system"
    assert len(lines) == 11


def test_classify(capsys):
    assert main(["classify", "mixexp(0.2:0.1,0.8:1)"]) == 0
    assert "verdict: HeavyEverywhere" in capsys.readouterr().out
    assert main(["classify", "gamma(2)"]) == 2


def test_replay_exit_codes(capsys, tmp_path):
    assert main(["replay", "--mode", "k1", "--n", "3", "--r", "1", "--sequences", "200", "--len", "100"]) == 0
    assert "0 violating" in capsys.readouterr().out
    p = tmp_path / "cx.txt"
    p.write_text("A\nA\nT3\nT1\nT0\nT0\n")
    assert main(["replay", "--mode", "generalk", "--n", "4", "--k", "2", "--r", "3", "--file", str(p)]) == 4
    assert "first index z=5" in capsys.readouterr().out
    assert main(["replay", "--mode", "k1", "--n", "3", "--r", "3"]) == 2


def test_presets_exist():
    assert set(PRESETS) == {"fig3", "fig4", "fig5", "fig6", "fig8", "thm3", "thm4", "thm5"}


def test_reproduce_small_is_deterministic(tmp_path):
    a = run_preset("thm5", seed=1, replications=2, batches=500, backlog=200)
    b = run_preset("thm5", seed=1, replications=2, batches=500, backlog=200)
    assert a == b
    assert a.startswith("# preset: thm5\n# config: ")
    body = [l for l in a.splitlines() if not l.startswith("#")]
    assert len(body) == 1 + 2 * 4  # header + (2 modes x 4 degrees)
    out = tmp_path / "t.csv"
    assert main(["reproduce", "thm5", "--seed", "1", "--replications", "2", "--batches", "500", "--backlog", "200", "--out", str(out)]) == 0
    assert out.read_text() == a
