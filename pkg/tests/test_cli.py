import csv
import io
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner
from hypothesis import given, settings, strategies as st

from samplizer_lab.cli import ConfigError, ExperimentConfig, dump_state, load_state, main, resolve_state
from samplizer_lab.ensembles import random_density_matrix


@pytest.fixture
def runner():
    return CliRunner()


def _json(result):
    return json.loads(result.stdout)


def test_von_neumann_maximally_mixed(runner):
    res = runner.invoke(main, ["estimate-von-neumann", "--family", "maximally-mixed", "--N", "4", "--eps", "0.5",
                               "--delta", "0.25", "--mode", "ideal-exact", "--seed", "7", "--no-timestamp"])
    assert res.exit_code == 0, res.output
    rep = _json(res)
    assert rep["schema"] == 1 and rep["status"] == "ok"
    assert rep["result"]["truth"] == pytest.approx(math.log(4))
    assert rep["result"]["abs_error"] <= rep["result"]["bound"]
    for key in ("delta_p", "eps_p", "delta_q", "delta_a", "k"):
        assert key in rep["result"]["params"]
    assert "timestamp" not in rep


def test_timestamp_present_by_default(runner):
    res = runner.invoke(main, ["estimate-von-neumann", "--N", "2"])
    assert "timestamp" in _json(res)


def test_poly_certify_log(runner):
    res = runner.invoke(main, ["poly-certify", "--kind", "log", "--delta", "0.1", "--eps", "0.01"])
    assert res.exit_code == 0
    out = _json(res)["result"]
    assert out["certified"] is True and out["degree"] > 0
    assert out["params"] == {"delta": 0.1, "eps": 0.01, "normalization": 2}
    assert all(r["pass"] and r["margin"] >= 0 and len(r["interval"]) == 2 for r in out["regions"])


def test_poly_certify_failure_exit_code(runner):
    res = runner.invoke(main, ["poly-certify", "--kind", "rectangle", "--t", "0.5", "--delta", "0.02",
                               "--eps", "1e-6", "--max-degree", "30"])
    assert res.exit_code == 3
    assert _json(res)["error"]["type"] == "CertificationError"


def test_samplizer_scaling_csv(runner):
    res = runner.invoke(main, ["samplizer-scaling", "--t", "1.0", "--steps", "4,8,16,32"])
    assert res.exit_code == 0
    rows = list(csv.DictReader(io.StringIO(res.stdout)))
    assert len(rows) == 4
    assert list(rows[0]) == ["t", "steps", "diamond_lower", "diamond_upper", "samples", "wall_ms"]
    upper = [float(r["diamond_upper"]) for r in rows]
    assert all(a > b for a, b in zip(upper, upper[1:]))
    assert all(float(r["diamond_lower"]) <= float(r["diamond_upper"]) + 1e-9 for r in rows)


def test_parameter_error_exit_code(runner):
    res = runner.invoke(main, ["estimate-von-neumann", "--eps", "1.5"])
    assert res.exit_code == 2
    assert _json(res)["status"] == "error"
    res = runner.invoke(main, ["estimate-von-neumann", "--family", "random-rank-r", "--N", "4", "--rank", "6"])
    assert res.exit_code == 2


def test_sample_budget_exit_code(runner):
    res = runner.invoke(main, ["estimate-von-neumann", "--mode", "faithful-exact", "--eps", "0.5"])
    assert res.exit_code == 2
    assert _json(res)["error"]["type"] == "SampleBudgetError"


def test_byte_identical_reports(runner, tmp_path):
    args = ["estimate-von-neumann", "--family", "random-rank-r", "--N", "4", "--rank", "2", "--mode",
            "ideal-sampled", "--seed", "123", "--no-timestamp"]
    out = tmp_path / "report.json"
    assert runner.invoke(main, args + ["--output", str(out)]).exit_code == 0
    first = out.read_bytes()
    assert runner.invoke(main, args + ["--output", str(out)]).exit_code == 0
    assert out.read_bytes() == first
    other = runner.invoke(main, args[:-2] + ["124", "--no-timestamp", "--output", str(out)])
    assert other.exit_code == 0 and out.read_bytes() != first


def test_scaling_csv_byte_identical(runner):
    args = ["samplizer-scaling", "--t", "0.5", "--steps", "4,8", "--seed", "3", "--no-timestamp"]
    assert runner.invoke(main, args).stdout == runner.invoke(main, args).stdout


def test_renyi_and_purity_commands(runner):
    res = runner.invoke(main, ["estimate-renyi", "--alpha", "2", "--family", "random-rank-r", "--N", "4",
                               "--rank", "2", "--eps", "0.7", "--seed", "1"])
    assert res.exit_code == 0, res.output
    out = _json(res)["result"]
    assert out["quantity"] == "S_2" and out["abs_error"] <= 0.7
    assert out["details"]["calls"]
    res = runner.invoke(main, ["purity", "--family", "pure", "--N", "2", "--eps", "0.5", "--delta", "0.1"])
    assert res.exit_code == 0
    assert abs(_json(res)["result"]["estimate"]) <= 0.5


def test_renyi_requires_alpha(runner):
    assert runner.invoke(main, ["estimate-renyi"]).exit_code == 2


def test_bounds_verify(runner):
    res = runner.invoke(main, ["bounds-verify", "--suite", "log-inequality", "--suite", "mixedness-entropy"])
    assert res.exit_code == 0
    suites = _json(res)["result"]["suites"]
    assert set(suites) == {"log-inequality", "mixedness-entropy"}
    assert suites["log-inequality"]["n_checked"] == 10 ** 4 and suites["log-inequality"]["pass"]


def test_state_file_formats(runner, tmp_path):
    rho = random_density_matrix(2, 2, np.random.default_rng(0))
    f = tmp_path / "rho.json"
    f.write_text(json.dumps(dump_state(rho)))
    assert np.allclose(load_state(f).data, rho.data)
    g = tmp_path / "other.json"
    g.write_text(json.dumps({"eigenvalues": [0.75, 0.25]}))
    assert np.allclose(load_state(g).data, np.diag([0.75, 0.25]))
    res = runner.invoke(main, ["estimate-von-neumann", "--state-file", str(g), "--eps", "0.5"])
    assert res.exit_code == 0
    truth = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    assert _json(res)["result"]["truth"] == pytest.approx(truth)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"matrix": [[1, 0], [0, 0]]}))
    with pytest.raises(ConfigError):
        load_state(bad)


def test_config_file_run_and_unknown_keys(runner, tmp_path):
    cfg = ExperimentConfig("estimate-von-neumann", N=4, eps=0.5, seed=7)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    direct = runner.invoke(main, ["estimate-von-neumann", "--N", "4", "--eps", "0.5", "--seed", "7",
                                  "--no-timestamp"])
    via_file = runner.invoke(main, ["run", str(path), "--no-timestamp"])
    assert via_file.exit_code == 0 and via_file.stdout == direct.stdout
    path.write_text(json.dumps({**cfg.to_dict(), "bogus": 1}))
    assert runner.invoke(main, ["run", str(path)]).exit_code == 2
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"command": "estimate-von-neumann", "colour": "red"})


@settings(max_examples=30)
@given(command=st.sampled_from(["estimate-von-neumann", "estimate-renyi", "purity"]),
       family=st.sampled_from(["maximally-mixed", "pure", "random-rank-r"]),
       n=st.integers(1, 16), eps=st.floats(0.01, 1.0), seed=st.integers(0, 2 ** 64 - 1),
       alpha=st.one_of(st.none(), st.floats(0.1, 5.0)))
def test_config_round_trip(command, family, n, eps, seed, alpha):
    cfg = ExperimentConfig(command, family, n, None, None, alpha, eps, 0.25, "ideal-sampled", seed, None, {"t": 1.0})
    back = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg


def test_state_families_are_seeded():
    a = resolve_state(ExperimentConfig("estimate-von-neumann", "random-rank-r", 4, 2, seed=5))
    b = resolve_state(ExperimentConfig("estimate-von-neumann", "random-rank-r", 4, 2, seed=5))
    assert np.array_equal(a.data, b.data) and a.rank_hint == 2
    assert resolve_state(ExperimentConfig("estimate-von-neumann", "pure", 4, seed=5)).rank == 1
