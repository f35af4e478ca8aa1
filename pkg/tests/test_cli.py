import json
import math

import numpy as np
import pytest

from rbwalk.chain import Generator
from rbwalk.cli import main
from rbwalk.serialize import read_jsonl

K3 = "0 1\n0 2\n1 0\n1 2\n2 0\n2 1\n"
PLASTIC = "0 1\n1 0\n1 2\n2 0\n"


@pytest.fixture
def graph_file(tmp_path):
    def make(text, name="g.txt"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return make


def test_build_k3(graph_file, tmp_path, capsys):
    out = tmp_path / "build.json"
    assert main(["build", "--graph", graph_file(K3), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["lambda"] == pytest.approx(2.0)
    assert doc["result"]["h_eta"] == pytest.approx(2.0)
    assert doc["config"]["seed"] == 42
    assert "lambda" in capsys.readouterr().out


def test_build_plastic(graph_file, tmp_path):
    out = tmp_path / "build.json"
    assert main(["build", "--graph", graph_file(PLASTIC), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["result"]["lambda"] == pytest.approx(1.3247179572, abs=1e-9)


def test_build_eta_scales(graph_file, tmp_path):
    out = tmp_path / "build.json"
    assert main(["build", "--graph", graph_file(K3), "--eta", "2", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["result"]
    assert res["h_eta"] == pytest.approx(2 * math.e, abs=1e-10)
    assert res["Q"][0][0] == pytest.approx(-2 * math.e, abs=1e-12)


def test_self_loop_exit_code(graph_file, capsys):
    assert main(["build", "--graph", graph_file("0 1\n1 1\n1 0\n")]) == 2
    assert "self loop at node 1" in capsys.readouterr().err


def test_parse_error_exit_code(graph_file, capsys):
    assert main(["build", "--graph", graph_file("0 1\n1 zero\n")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["build", "--graph", str(tmp_path / "nope.txt")]) == 2


def test_zero_trajectories_is_usage_error(graph_file):
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--graph", graph_file(K3), "--trajectories", "0"])
    assert err.value.code == 2


def test_bad_node_is_usage_error(graph_file):
    assert main(["simulate", "--graph", graph_file(K3), "--from", "5", "--trajectories", "10"]) == 2


def test_simulate_summary(graph_file, tmp_path):
    ens, rep = tmp_path / "e.jsonl", tmp_path / "r.json"
    code = main(["simulate", "--graph", graph_file(K3), "--trajectories", "20000", "--seed", "3",
                 "--out", str(ens), "--report", str(rep)])
    assert code == 0
    records = read_jsonl(ens)
    assert len(records) == 20000
    assert set(records[0]) == {"id", "start", "states", "holding_times", "horizon", "seed"}
    summary = json.loads(rep.read_text())["summary"]
    assert summary["within_3_sigma"]
    assert summary["jump_count_expected"] == pytest.approx(2.0)


def test_verify_k3(graph_file, tmp_path):
    out = tmp_path / "v.json"
    code = main(["verify", "--graph", graph_file(K3), "--trajectories", "50000", "--trials", "200",
                 "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    checks = {c["name"]: c for c in doc["checks"]}
    assert checks["entropy_attainment"]["observed"] == pytest.approx(2.0)
    path = checks["path_equalization_mc"]["detail"]
    assert path["paths"] == [[0, 1, 0], [0, 2, 0]]
    assert path["exact_prob_each"] == pytest.approx(0.25)


def test_verify_negative_control(graph_file, capsys):
    def corrupt(q):
        Q = np.array(q.Q)
        Q[0, 1] += 0.3
        Q[0, 0] -= 0.3
        return Generator.from_matrix(Q)

    code = main(["verify", "--graph", graph_file(K3), "--trajectories", "20000", "--trials", "100"],
                generator_hook=corrupt)
    assert code == 1
    captured = capsys.readouterr()
    assert "[FAIL] entropy_attainment" in captured.out
    assert "failing" in captured.err


def test_entropy_table(graph_file, capsys):
    assert main(["entropy", "--graph", graph_file(PLASTIC), "--delta", "1e-5"]) == 0
    out = capsys.readouterr().out
    assert "1e-05" in out and "1e-04" in out
