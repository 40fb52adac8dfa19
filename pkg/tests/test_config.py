import json

import numpy as np
import pytest

from herdwatch import ValidationError
from herdwatch.config import (
    ACTIONS_CSV_HEADER,
    ExperimentConfig,
    format_cell,
    load_config,
    parse_config,
    read_actions_csv,
    serialize,
    write_csv,
    write_trajectory_csv,
)

MINIMAL = {
    "model": {
        "B": [[0.8, 0.2], [0.3, 0.7]],
        "P": [[1.0, 0.0], [0.0, 1.0]],
        "c": [[1.0, 2.0], [3.0, 0.5]],
        "alpha": 0.8,
    }
}


def with_blocks(**extra):
    doc = json.loads(json.dumps(MINIMAL))
    doc.update(extra)
    return json.dumps(doc)


def test_parse_minimal_defaults():
    cfg = parse_config(json.dumps(MINIMAL))
    assert cfg.model.alpha == 0.8
    assert cfg.observer is None
    assert cfg.solver.grid_points == 2001
    assert cfg.solver.herding == "frozen"
    assert cfg.solver.horizon is None
    assert cfg.sim.replicates == 1000
    assert cfg.sim.pi0 == (0.1, 0.9)
    assert cfg.paths.input_csv is None
    with pytest.raises(ValidationError):
        cfg.require_observer()


def test_parse_full_blocks():
    text = with_blocks(
        observer={"f": [0.0, 2.0], "d": 0.8, "rho": 0.9},
        solver={"grid_points": 501, "herding": "drift"},
        sim={"replicates": 10, "horizon": 20, "seed": 3, "pi0": [0.4, 0.6]},
        paths={"input_csv": "a.csv", "out_dir": "out"},
    )
    cfg = parse_config(text)
    assert cfg.require_observer().rho == 0.9
    assert cfg.solver.grid_points == 501
    assert cfg.solver.herding == "drift"
    assert cfg.sim.pi0 == (0.4, 0.6)
    assert cfg.paths.out_dir == "out"


def test_parse_rejects_unknown_keys():
    with pytest.raises(ValidationError, match="config"):
        parse_config(with_blocks(extra={}))
    bad = json.loads(json.dumps(MINIMAL))
    bad["model"]["gamma"] = 1.0
    with pytest.raises(ValidationError, match="model"):
        parse_config(json.dumps(bad))
    with pytest.raises(ValidationError, match="solver"):
        parse_config(with_blocks(solver={"grid": 10}))


def test_parse_names_bad_matrix_row():
    bad = json.loads(json.dumps(MINIMAL))
    bad["model"]["B"] = [[0.8, 0.2], [0.3, 0.6]]
    with pytest.raises(ValidationError, match=r"model\.B\[1\]"):
        parse_config(json.dumps(bad))


def test_parse_rejects_boolean_numbers():
    bad = json.loads(json.dumps(MINIMAL))
    bad["model"]["alpha"] = True
    with pytest.raises(ValidationError, match="alpha"):
        parse_config(json.dumps(bad))


def test_parse_missing_model():
    with pytest.raises(ValidationError, match="model"):
        parse_config("{}")
    with pytest.raises(ValidationError, match="JSON"):
        parse_config("{")


def test_parse_observer_defaults_and_length_check():
    cfg = parse_config(with_blocks(observer={"f": [0.0, 2.0], "d": 0.8}))
    assert cfg.require_observer().rho == 1.0
    with pytest.raises(ValidationError, match="observer"):
        parse_config(with_blocks(observer={"f": [0.0, 1.0, 2.0], "d": 0.8}))


def test_parse_sim_pi0_length():
    with pytest.raises(ValidationError, match=r"sim\.pi0"):
        parse_config(with_blocks(sim={"pi0": [0.2, 0.3, 0.5]}))


def test_serialize_roundtrip_idempotent():
    text = with_blocks(
        observer={"f": [0.0, 2.0], "d": 0.8, "rho": 0.9},
        solver={"tol": 1e-10},
    )
    once = serialize(parse_config(text))
    twice = serialize(parse_config(once))
    assert once == twice
    assert once.endswith("\n")
    assert '"observer"' in once


def test_load_config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(MINIMAL), encoding="utf-8")
    cfg = load_config(str(p))
    assert isinstance(cfg, ExperimentConfig)
    assert cfg.model.Y == 2


def test_format_cell():
    assert format_cell(3) == "3"
    assert format_cell(np.int64(-2)) == "-2"
    assert format_cell(0.1) == "0.1"
    assert format_cell(np.float64(1.0 / 3.0)) == repr(1.0 / 3.0)
    with pytest.raises(ValidationError):
        format_cell(True)


def test_write_csv_bytes(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(str(p), "a,b", [(1, 0.5), (2, 0.25)])
    assert p.read_bytes() == b"a,b\n1,0.5\n2,0.25\n"


def test_write_trajectory_csv(tmp_path, skype_policy):
    from conftest import make_skype
    from herdwatch import simulate_episode

    model, obs = make_skype()
    t = simulate_episode(model, obs, skype_policy, horizon=50, seed=3, pi0=[0.23, 0.77])
    p = tmp_path / "traj.csv"
    write_trajectory_csv(str(p), t)
    lines = p.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,x,y,a,pi1,pi2,u"
    assert len(lines) == t.steps + 1
    first = lines[1].split(",")
    assert first[0] == "1"
    assert float(first[4]) == pytest.approx(t.pis[1, 0], abs=0)


def test_read_actions_csv_roundtrip(tmp_path):
    p = tmp_path / "acts.csv"
    p.write_text("t,action\n1,2\n2,1\n3,1\n", encoding="utf-8")
    acts = read_actions_csv(str(p))
    assert acts.tolist() == [2, 1, 1]


def test_read_actions_csv_errors(tmp_path):
    p = tmp_path / "acts.csv"
    p.write_text("step,action\n1,2\n", encoding="utf-8")
    with pytest.raises(ValidationError, match=ACTIONS_CSV_HEADER):
        read_actions_csv(str(p))
    p.write_text("t,action\n1,2\n3,1\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="t"):
        read_actions_csv(str(p))
    p.write_text("", encoding="utf-8")
    with pytest.raises(ValidationError, match="empty"):
        read_actions_csv(str(p))
