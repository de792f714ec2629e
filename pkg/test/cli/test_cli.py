import json
import math
from unittest.mock import patch

import numpy as np
import pytest

from subspace_qsl.bounds import subspace_dispersion
from subspace_qsl.cli import TRAJECTORY_HEADER, cmd_example_two_level, main
from subspace_qsl.errors import DegenerateLevels


@pytest.fixture
def two_level_config(tmp_path):
    path = tmp_path / "two_level.json"
    assert main(["example", "--out", str(path)]) == 0
    return str(path)


@pytest.fixture
def commuting_config(tmp_path):
    path = tmp_path / "commuting.json"
    document = {
        "hamiltonian": [[[float(i == j) * i, 0] for j in range(3)] for i in range(3)],
        "frame": [[[1, 0], [0, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 0]]],
        "label": "commuting",
    }
    path.write_text(json.dumps(document))
    return str(path)


def test_example_two_level():
    config = cmd_example_two_level(0.0, 1.0)
    np.testing.assert_allclose(config.hamiltonian.matrix, np.diag([0.0, 1.0]))
    np.testing.assert_allclose(config.frame.columns[:, 0], [1 / math.sqrt(2), 1 / math.sqrt(2)])
    with pytest.raises(DegenerateLevels):
        cmd_example_two_level(1.0, 1.0)


def test_example_to_stdout(capsys):
    assert main(["example", "--e1", "-3", "--e2", "5"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert document["hamiltonian"][0][0] == [-3.0, 0.0]
    assert document["hamiltonian"][1][1] == [5.0, 0.0]
    assert "frame" in document


def test_degenerate_example_exits_2(capsys):
    assert main(["example", "--e1", "1", "--e2", "1"]) == 2
    assert "error:" in capsys.readouterr().err


def test_bounds_two_level(two_level_config, capsys):
    assert main(["bounds", "--config", two_level_config, "--theta", str(math.pi / 2)]) == 0
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert report["v_speed"] == pytest.approx(0.5, abs=1e-12)
    assert report["per_theta"][0]["t_bound_v"] == pytest.approx(math.pi, abs=1e-10)
    assert report["per_theta"][0]["t_brachistochrone"] == pytest.approx(math.pi, abs=1e-10)
    assert "theta/V" in captured.err


def test_bounds_shifted_example(tmp_path, capsys):
    path = tmp_path / "shifted.json"
    assert main(["example", "--e1", "-3", "--e2", "5", "--out", str(path)]) == 0
    assert main(["bounds", "--config", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["omega"] == pytest.approx(8.0, abs=1e-12)
    assert report["v_speed"] == pytest.approx(4.0, abs=1e-12)
    assert report["per_theta"][0]["theta"] == pytest.approx(math.pi / 2)
    assert report["per_theta"][0]["t_bound_v"] == pytest.approx(math.pi / 8, abs=1e-12)


def test_bounds_commuting_never(commuting_config, capsys):
    assert main(["bounds", "--config", commuting_config, "--theta", "0.1", "--theta", "1.0"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["v_speed"] == 0.0
    assert [entry["t_bound_v"] for entry in report["per_theta"]] == ["never", "never"]


def test_bounds_degrees_only_change_the_table(two_level_config, capsys):
    assert main(["bounds", "--config", two_level_config, "--degrees"]) == 0
    captured = capsys.readouterr()
    assert "90 deg" in captured.err
    assert json.loads(captured.out)["per_theta"][0]["theta"] == pytest.approx(math.pi / 2)


def test_bounds_for_a_state(tmp_path, capsys):
    path = tmp_path / "state.json"
    half = 1 / math.sqrt(2)
    path.write_text(
        json.dumps({"hamiltonian": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]], "state": [[half, 0], [half, 0]]})
    )
    assert main(["bounds", "--config", str(path)]) == 0
    state = json.loads(capsys.readouterr().out)["state"]
    assert state["mandelshtam_tamm"] == pytest.approx(math.pi, abs=1e-12)
    assert state["margolus_levitin"] == pytest.approx(math.pi, abs=1e-12)


def test_bounds_rejects_bad_theta(two_level_config, capsys):
    assert main(["bounds", "--config", two_level_config, "--theta", "2.0"]) == 2
    assert "outside" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["bounds", "--config", str(tmp_path / "nope.json")]) == 2


def test_malformed_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"hamiltonian": [[0, 0], [0, 1]], "state": [[1, 0], [0, 0]]}')
    assert main(["bounds", "--config", str(path)]) == 2
    assert "hamiltonian[0][0]" in capsys.readouterr().err


def test_evolve_two_level(two_level_config, capsys):
    assert main(["evolve", "--config", two_level_config, "--t-max", str(math.pi), "--points", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == TRAJECTORY_HEADER
    assert len(lines) == 6

    rows = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    np.testing.assert_allclose(rows[:, 2], np.arcsin(np.abs(np.sin(rows[:, 0] / 2))), atol=1e-9)
    assert rows[-1, 2] == pytest.approx(math.pi / 2, abs=1e-9)
    assert np.all(rows[:, 2] <= rows[:, 3] + 1e-8)


def test_evolve_csv_round_trips(two_level_config, tmp_path):
    out = tmp_path / "trajectory.csv"
    assert main(["evolve", "--config", two_level_config, "--t-max", "2.0", "--points", "7", "--out", str(out)]) == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert rows.shape == (7, 5)
    np.testing.assert_array_equal(rows[:, 0], np.linspace(0.0, 2.0, 7))


def test_evolve_commuting(commuting_config, capsys):
    assert main(["evolve", "--config", commuting_config, "--t-max", "10", "--points", "11"]) == 0
    rows = np.loadtxt(capsys.readouterr().out.splitlines()[1:], delimiter=",")
    assert np.all(rows[:, 2] <= 1e-12)


def test_evolve_uses_the_configured_optimizer(tmp_path, capsys):
    path = tmp_path / "tuned.json"
    half = 1 / math.sqrt(2)
    document = {
        "hamiltonian": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]],
        "frame": [[[half, 0]], [[half, 0]]],
        "tolerances": {"optimizer_starts": 3, "optimizer_seed": 9},
    }
    path.write_text(json.dumps(document))
    with patch("subspace_qsl.cli.subspace_dispersion", wraps=subspace_dispersion) as dispersion:
        assert main(["evolve", "--config", str(path), "--t-max", "1", "--points", "3"]) == 0
    options = dispersion.call_args.args[2]
    assert options.num_starts == 3
    assert options.seed == 9
    rows = np.loadtxt(capsys.readouterr().out.splitlines()[1:], delimiter=",")
    np.testing.assert_allclose(rows[:, 4], 0.5 * rows[:, 0], atol=1e-10)


def test_evolve_needs_two_points(two_level_config):
    assert main(["evolve", "--config", two_level_config, "--t-max", "1", "--points", "1"]) == 2


def test_t_theta_two_level(two_level_config, capsys):
    assert main(["t-theta", "--config", two_level_config, "--theta", str(math.pi / 2)]) == 0
    document = json.loads(capsys.readouterr().out)
    crossing = document["crossings"][0]
    assert crossing["attained"]
    assert crossing["t_theta"] == pytest.approx(math.pi, abs=1e-9)
    assert document["v_speed"] == pytest.approx(0.5)


def test_t_theta_commuting(commuting_config, capsys):
    assert main(["t-theta", "--config", commuting_config, "--theta", "0.1"]) == 0
    crossing = json.loads(capsys.readouterr().out)["crossings"][0]
    assert crossing["attained"] is False
    assert crossing["t_theta"] is None


def test_t_theta_bad_horizon(two_level_config):
    assert main(["t-theta", "--config", two_level_config, "--horizon", "-1"]) == 2


def test_verify_passes(tmp_path, capsys):
    report = tmp_path / "report.json"
    argv = ["verify", "--n-max", "4", "--k-max", "2", "--trials", "4", "--seed", "1", "--out", str(report)]
    assert main(argv) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["passed"]
    assert json.loads(report.read_text())["violations"] == []


def test_verify_zero_trials_is_a_usage_error():
    with pytest.raises(SystemExit) as raised:
        main(["verify", "--trials", "0"])
    assert raised.value.code == 2


def test_verify_corrupted_hamiltonian_exits_2(capsys):
    def corrupt(matrix):
        matrix[0, -1] += 1.0
        return matrix

    assert main(["verify", "--trials", "2", "--n-max", "3"], instance_hook=corrupt) == 2
    assert "not Hermitian" in capsys.readouterr().err


def test_outputs_are_deterministic(two_level_config, capsys):
    argv = ["bounds", "--config", two_level_config, "--theta", "0.4", "--theta", "1.2"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
