import csv
import io
import json
import math

import pytest

from renyi_reach.cli import dumps, emit_sweep, loads, run, sweep_columns


def _run(argv, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


BOUND_ARGS = ["bound", "--lambda-s", "0.6,0.4", "--lambda-e", "0.9,0.1", "--alpha", "2", "--r", "1,2,4"]


def test_bound_report_values():
    code, out, _ = _run(BOUND_ARGS)
    assert code == 0
    report = loads(out)
    entry = report["bounds"][0]
    assert entry["divergence_bound"] == pytest.approx(1.329136, abs=1e-6)
    assert entry["tur_bound"] == pytest.approx(0.36, abs=1e-14)
    est = entry["estimator_bounds"]
    assert est["1"] == pytest.approx(0.36, abs=1e-14)
    assert est["2"] == pytest.approx(0.0753489, abs=1e-7)
    assert est["4"] == pytest.approx(0.00493392, abs=1e-8)
    assert entry["bures_bound"] == pytest.approx(math.acos(0.844949), abs=1e-6)


def test_bound_csv():
    code, out, _ = _run(BOUND_ARGS + ["--format", "csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["divergence_bound"]) == pytest.approx(1.329136, abs=1e-6)
    assert float(rows[0]["est_bound_r2"]) == pytest.approx(0.0753489, abs=1e-7)


def test_invalid_spectrum_exits_one():
    code, out, err = _run(["bound", "--lambda-s", "0.6,0.5", "--lambda-e", "0.9,0.1"])
    assert code == 1 and out == ""
    assert "spectrum sum ≠ 1" in err and "--lambda-s" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nonsense"],
        ["bound"],
        ["bound", "--lambda-s", "0.6,0.4"],
        ["verify", "--trials", "x"],
        ["verify", "--trials", "-1"],
        ["verify", "--alpha", "1"],
        ["tur", "--outcomes", "1"],
        ["verify", "--format", "csv", "--trials", "1"],
        ["sweep", "--alpha", ""],
        ["estimate", "--grid", "0,1"],
        ["verify", "--config", "/nonexistent/file.json"],
    ],
)
def test_usage_errors_exit_one(argv):
    code, _, err = _run(argv)
    assert code == 1
    assert err.strip().count("\n") == 0 and err.strip()


def test_verify_reruns_are_byte_identical():
    argv = ["verify", "--ds", "2", "--de", "2", "--trials", "1000", "--seed", "42"]
    first = _run(argv)
    second = _run(argv)
    assert first[0] == 0
    assert first[1] == second[1]
    report = loads(first[1])
    assert report["divergence"]["violations"] == 0
    assert report["majorization"]["violations"] == 0


def test_verify_extremal_and_rows():
    code, out, _ = _run(
        ["verify", "--lambda-s", "0.6,0.4", "--lambda-e", "0.9,0.1", "--trials", "5", "--extremal",
         "--include-trials"]
    )
    assert code == 0
    report = loads(out)
    assert report["divergence"]["extremal_max_gap"] <= 1e-8
    assert any(r["trial"] == -1 for r in report["divergence_rows"])


def test_tur_command():
    code, out, _ = _run(["tur", "--lambda-s", "0.6,0.4", "--lambda-e", "0.9,0.1", "--trials", "200",
                         "--outcomes", "3"])
    assert code == 0
    assert loads(out)["summary"]["violations"] == 0


def test_saturate_command():
    code, out, _ = _run(["saturate", "--lambda-s", "0.6,0.4", "--lambda-e", "0.9,0.1", "--alpha", "0.5,2"])
    assert code == 0
    report = loads(out)
    assert report["sigma_spectrum"] == pytest.approx([0.9, 0.1], abs=1e-12)
    assert all(r["gap"] <= 1e-8 for r in report["rows"])


def test_probe_command():
    code, out, _ = _run(["probe", "--lambda-s", "0.6,0.4", "--lambda-e", "0.9,0.1", "--alpha", "2",
                         "--restarts", "1", "--budget", "200"])
    assert code == 0
    result = loads(out)["results"][0]
    assert result["gap"] >= -1e-8 and result["evaluations"] == 200


def test_estimate_command():
    code, out, _ = _run(["estimate", "--r", "2", "--shots", "2000", "--seed", "3"])
    assert code == 0
    run_ = loads(out)["runs"][0]
    assert run_["rhs"] == pytest.approx(0.0753489, abs=1e-7)
    assert run_["repetitions"] == 2 and not run_["violation"]


def test_sweep_csv_rows():
    code, out, _ = _run(["sweep", "--lambda-s", "0.6,0.4", "--lambda-e", "0.9,0.1", "--alpha", "0.5,2"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2
    assert list(rows[0]) == sweep_columns(4)
    assert float(rows[1]["div_bound"]) == pytest.approx(1.329136, abs=1e-6)
    assert rows[1]["lambda_s"] == "0.6;0.4"


def test_sweep_random_cardinality():
    rows = emit_sweep([0.5, 1.5, 2.0], dims=[(2, 2), (2, 3)], samples=4, seed=1, rmax=3)
    assert len(rows) == 3 * 2 * 4
    assert set(rows[0]) == set(sweep_columns(3))


def test_infinity_serialized_as_string():
    code, out, _ = _run(["bound", "--lambda-s", "0.5,0.5", "--lambda-e", "0.5,0.5", "--r", "1"])
    assert code == 0
    assert '"tur_bound": "inf"' in out
    assert loads(out)["bounds"][0]["tur_bound"] == math.inf
    code, out, _ = _run(["sweep", "--lambda-s", "0.5,0.5", "--lambda-e", "0.5,0.5", "--alpha", "2",
                         "--rmax", "1"])
    assert list(csv.DictReader(io.StringIO(out)))[0]["tur_bound"] == "inf"


def test_json_round_trip():
    report = {"a": 0.1 + 0.2, "b": [1e-300, math.inf, -math.inf], "c": {"1": 1 / 3}, "d": True}
    back = loads(dumps(report))
    assert back == report
    assert loads(dumps(back)) == back


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"lambda_s": [0.6, 0.4], "lambda_e": [0.9, 0.1], "alpha_grid": [0.5],
                                "repetitions": [1, 2]}))
    code, out, _ = _run(["bound", "--config", str(path)])
    assert code == 0
    entry = loads(out)["bounds"][0]
    assert entry["alpha"] == 0.5 and set(entry["estimator_bounds"]) == {"1", "2"}
    code, out, _ = _run(["bound", "--config", str(path), "--alpha", "2"])
    assert loads(out)["bounds"][0]["alpha"] == 2.0


def test_config_file_must_be_object(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2]")
    assert _run(["bound", "--config", str(path)])[0] == 1


def test_seed_from_environment(monkeypatch):
    argv = ["verify", "--trials", "20"]
    monkeypatch.setenv("RENYI_REACH_SEED", "17")
    from_env = _run(argv)[1]
    monkeypatch.delenv("RENYI_REACH_SEED")
    explicit = _run(argv + ["--seed", "17"])[1]
    default = _run(argv)[1]
    assert loads(from_env)["config"]["seed"] == 17
    assert from_env == explicit and from_env != default
    monkeypatch.setenv("RENYI_REACH_SEED", "abc")
    assert _run(argv)[0] == 1


def test_output_file(tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = _run(BOUND_ARGS + ["--output", str(target)])
    assert code == 0 and out == ""
    assert loads(target.read_text())["command"] == "bound"
