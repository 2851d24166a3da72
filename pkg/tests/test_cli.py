import json

import numpy as np
import pytest

from conftest import random_ensemble
from qubitmed import cli
from qubitmed.errors import SolverExhausted
from qubitmed.fileio import ensemble_to_json
from qubitmed.reports import SWEEP_COLUMNS, sweep_csv, trine_sweep
from qubitmed import circumsphere
from qubitmed.verification import SampleReport, trine_ensemble


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def trine_file(tmp_path):
    return write(tmp_path / "trine.json", ensemble_to_json(trine_ensemble()))


@pytest.fixture
def ket0_plus_file(tmp_path):
    return write(tmp_path / "two.json", {"states": [{"prior": 0.5, "bloch": [0, 0, 1]}, {"prior": 0.5, "bloch": [1, 0, 0]}]})


def test_solve_trine(capsys, trine_file):
    code, out, _ = run(capsys, "solve", trine_file)
    assert code == 0
    rep = json.loads(out)
    assert rep["p_guess"] == 0.666666667
    assert [m["alpha"] for m in rep["measurement"]] == [0.666666667] * 3
    assert rep["certificate"]["optimal"] is True
    assert rep["detected"] == [0, 1, 2]


def test_solve_two_state(capsys, ket0_plus_file):
    code, out, _ = run(capsys, "solve", ket0_plus_file)
    assert code == 0
    assert json.loads(out)["p_guess"] == pytest.approx(0.853553, abs=1e-6)


def test_malformed_prior(capsys, tmp_path):
    path = write(tmp_path / "bad.json", {"states": [{"prior": 1.2, "bloch": [0, 0, 1]}, {"prior": -0.2, "bloch": [0, 0, 1]}]})
    code, out, err = run(capsys, "solve", path)
    assert code == 1 and out == ""
    assert "states[0].prior" in err


def test_unnormalized_and_outside_ball(capsys, tmp_path):
    path = write(tmp_path / "bad.json", {"states": [{"prior": 0.5, "bloch": [0, 0, 1]}, {"prior": 0.5, "bloch": [0, 1, 1]}]})
    code, _, err = run(capsys, "solve", path)
    assert code == 1 and "state 1" in err
    path = write(tmp_path / "bad2.json", {"states": [{"prior": 0.5, "bloch": [0, 0, 1]}, {"prior": 0.6, "bloch": [0, 0, 1]}]})
    code, _, err = run(capsys, "solve", path)
    assert code == 1 and "priors" in err


def test_invalid_json(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"states": [\n  {"prior": 0.5,,}]}')
    code, _, err = run(capsys, "solve", path)
    assert code == 1 and "line 2" in err


def test_solve_certify_round_trip(capsys, tmp_path, trine_file):
    out = tmp_path / "sol.json"
    assert run(capsys, "solve", trine_file, "--out", out)[0] == 0
    code, text, _ = run(capsys, "certify", trine_file, out)
    assert code == 0
    assert json.loads(text)["optimal"] is True


@pytest.mark.parametrize("seed", range(5))
def test_round_trip_random(capsys, tmp_path, seed):
    ens = random_ensemble(np.random.default_rng(seed), 2 + seed)
    prob = write(tmp_path / "p.json", ensemble_to_json(ens))
    sol = tmp_path / "s.json"
    assert run(capsys, "solve", prob, "--out", sol)[0] == 0
    assert run(capsys, "certify", prob, sol)[0] == 0


def test_certify_incomplete(capsys, tmp_path, ket0_plus_file):
    povm = write(tmp_path / "povm.json", {"elements": [{"state": 0, "alpha": 0.95, "n": [0, 0, 1]}, {"state": 1, "alpha": 0.95, "n": [0, 0, -1]}]})
    code, _, err = run(capsys, "certify", ket0_plus_file, povm)
    assert code == 1
    assert "completeness" in err and "1.9" in err


def test_certify_suboptimal(capsys, tmp_path, ket0_plus_file):
    povm = write(tmp_path / "povm.json", {"elements": [{"state": 0, "alpha": 1, "n": [0, 0, 1]}, {"state": 1, "alpha": 1, "n": [0, 0, -1]}]})
    code, out, _ = run(capsys, "certify", ket0_plus_file, povm)
    assert code == 3
    rep = json.loads(out)
    assert rep["optimal"] is False
    assert rep["worst"]["value"] < 0 or rep["worst"]["kind"] == "stationarity"


def test_solver_exhausted_exit_code(capsys, monkeypatch, trine_file):
    def boom(ens, tol):
        raise SolverExhausted("no candidate", oracle=(0.5, np.zeros(3)), best=None)

    monkeypatch.setattr(cli, "solve", boom)
    code, out, _ = run(capsys, "solve", trine_file)
    assert code == 2
    assert json.loads(out)["oracle"]["gamma0_star"] == 0.5


def test_oracle_compare(capsys, tmp_path):
    ens = random_ensemble(np.random.default_rng(7), 5)
    path = write(tmp_path / "five.json", ensemble_to_json(ens))
    code, out, _ = run(capsys, "oracle", path, "--compare")
    assert code == 0
    assert abs(json.loads(out)["gap"]) <= 1e-6


def test_oracle_single_state(capsys, tmp_path):
    path = write(tmp_path / "one.json", {"states": [{"prior": 1, "bloch": [0, 0, 0.5]}]})
    code, out, _ = run(capsys, "oracle", path)
    assert code == 0 and json.loads(out)["gamma0_star"] == 1.0


def test_oracle_equal_priors(capsys, tmp_path):
    ens = random_ensemble(np.random.default_rng(3), 4, equal=True)
    path = write(tmp_path / "eq.json", ensemble_to_json(ens))
    code, out, _ = run(capsys, "oracle", path)
    r = circumsphere(ens.vectors).radius_R
    assert json.loads(out)["gamma0_star"] == pytest.approx((1 + r) / 4, abs=1e-6)


def test_sample_trine(capsys, tmp_path, trine_file):
    sol = tmp_path / "sol.json"
    run(capsys, "solve", trine_file, "--out", sol)
    code, out, _ = run(capsys, "sample", trine_file, sol, "--shots", 1000000, "--seed", 5)
    assert code == 0
    rep = json.loads(out)
    assert rep["empirical_success"] == pytest.approx(2 / 3, abs=2e-3)
    again = run(capsys, "sample", trine_file, sol, "--shots", 1000000, "--seed", 5)[1]
    assert again == out


def test_sample_orthogonal(capsys, tmp_path):
    prob = write(tmp_path / "p.json", {"states": [{"prior": 0.5, "bloch": [0, 0, 1]}, {"prior": 0.5, "bloch": [0, 0, -1]}]})
    povm = write(tmp_path / "m.json", {"elements": [{"state": 0, "alpha": 1, "n": [0, 0, 1]}, {"state": 1, "alpha": 1, "n": [0, 0, -1]}]})
    code, out, _ = run(capsys, "sample", prob, povm, "--shots", 1000)
    assert code == 0 and json.loads(out)["empirical_success"] == 1.0


def test_sample_statistical_rejection(capsys, monkeypatch, tmp_path, trine_file):
    sol = tmp_path / "sol.json"
    run(capsys, "solve", trine_file, "--out", sol)
    fake = SampleReport(10, 0, np.eye(3, dtype=int) * 10, 1.0, 2 / 3, 9.0)
    monkeypatch.setattr(cli, "sample_outcomes", lambda *a: fake)
    assert run(capsys, "sample", trine_file, sol)[0] == 4


def test_bad_shots(capsys, trine_file):
    assert run(capsys, "sample", trine_file, trine_file, "--shots", 0)[0] == 1


def test_missing_arguments(capsys):
    assert run(capsys, "solve")[0] == 1


def test_sweep_small(capsys):
    code, out, _ = run(capsys, "sweep-trine", "--p-steps", 3, "--delta-steps", 3)
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert lines[-2].startswith("# max_abs_diff=")
    assert "\r" not in out and "np.float64" not in out
    first = lines[1].split(",")
    assert float(first[0]) == pytest.approx(1 / 3) and first[2] == "three_element"
    assert float(first[3]) == pytest.approx(2 / 3, abs=1e-12)


def test_sweep_out(capsys, tmp_path):
    path = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep-trine", "--p-steps", 4, "--delta-steps", 3, "--out", path)
    assert code == 0
    assert out.startswith("# max_abs_diff=")
    assert path.read_text() == sweep_csv(trine_sweep(4, 3))


def test_sweep_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, "sweep-trine", "--p-steps", 2, "--delta-steps", 2, "--out", tmp_path / "no" / "x.csv")
    assert code == 1 and "cannot write" in err


def test_sweep_bad_steps(capsys):
    assert run(capsys, "sweep-trine", "--p-steps", 1)[0] == 1


def test_tolerance_flag(capsys, trine_file):
    code, out, _ = run(capsys, "solve", trine_file, "--tolerance", 1e-8)
    assert code == 0 and json.loads(out)["p_guess"] == 0.666666667


def test_problem_tolerance_override(capsys, tmp_path):
    path = write(tmp_path / "t.json", {"states": [{"prior": 1, "bloch": [0, 0, 1]}], "tolerances": {"bogus": 1}})
    code, _, err = run(capsys, "solve", path)
    assert code == 1 and "tolerances" in err
