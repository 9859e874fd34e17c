import csv
import io
import json

import pytest

from hetpca.cli import main
from hetpca.harness import CSV_HEADER


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_predict_uniform_noise(capsys):
    code, out, _ = run(capsys, "predict", "--c", "10", "--theta", "1", "--sigma2", "1", "--p", "1")
    assert code == 0
    assert "subspace         0.818182" in out


def test_predict_json_below_transition(capsys):
    code, out, _ = run(capsys, "--json", "predict", "--c", "10", "--theta", "1",
                       "--sigma2", "0.01", "--sigma2", "99.01", "--p", "0.99", "--p", "0.01")
    assert code == 0
    rep = json.loads(out)
    comp = rep["components"][0]
    assert comp["subspace_recovery"] == 0.0
    assert comp["above_transition"] is False
    assert rep["overall"]["mse"] is None
    assert rep["mean_variance"] == pytest.approx(1.0)
    assert rep["mean_inverse_variance"] == pytest.approx(0.99 / 0.01 + 0.01 / 99.01)


def test_predict_noiseless(capsys):
    code, out, _ = run(capsys, "predict", "--json", "--c", "10", "--theta", "1", "--sigma2", "0", "--p", "1")
    rep = json.loads(out)
    comp = rep["components"][0]
    for k in ("subspace_recovery", "coefficient_recovery", "mixed_recovery"):
        assert comp[k] == pytest.approx(1.0, abs=1e-12)
    assert rep["mean_inverse_variance"] is None


@pytest.mark.parametrize("argv", [
    ["predict", "--c", "10", "--theta", "1", "--sigma2", "1", "--p", "0.5"],
    ["predict", "--c", "10", "--theta", "1", "--sigma2", "1", "--sigma2", "2"],
    ["predict", "--c", "ten", "--theta", "1", "--sigma2", "1"],
    ["predict", "--theta", "1"],
    ["predict", "--c", "10", "--bogus"],
    ["simulate", "--n", "3", "--d", "10", "--theta", "1", "--theta", "1", "--theta", "1", "--theta", "1", "--sigma2", "1"],
    ["sweep", "--kind", "p2-sweep", "--trials", "0"],
    ["frobnicate"],
])
def test_usage_and_validation_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_unwritable_output_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "--trials", "1", "--axis1", "0", "1", "2", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 1


def test_missing_config_exit_1(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--config", str(tmp_path / "nope.json"))
    assert code == 1


def test_simulate_deterministic(capsys):
    argv = ["simulate", "--json", "--n", "1000", "--d", "100", "--theta", "1", "--theta", "0.8",
            "--sigma2", "0.1", "--sigma2", "3.25", "--p", "0.5", "--p", "0.5", "--seed", "11"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    rep = json.loads(a)
    assert rep["spec"]["seed"] == 11
    assert rep["prediction"]["c"] == 10.0
    assert len(rep["metrics"]["subspace_sq_cos"]) == 2


def test_simulate_noiseless(capsys):
    code, out, _ = run(capsys, "simulate", "--json", "--n", "100", "--d", "20", "--theta", "1", "--sigma2", "0")
    assert code == 0
    assert json.loads(out)["metrics"]["subspace_sq_cos"][0] == pytest.approx(1.0, abs=1e-12)


def test_simulate_export(capsys, tmp_path):
    path = tmp_path / "ds.hpca"
    code, _, _ = run(capsys, "simulate", "--n", "30", "--d", "10", "--theta", "1", "--sigma2", "1",
                     "--debug-retain", "--export", str(path))
    assert code == 0
    assert path.read_bytes()[:4] == b"HPCA"
    assert (tmp_path / "ds.hpca.json").exists()


def test_sweep_csv_matches_predict(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "--threads", "2", "sweep", "--kind", "p2-sweep", "--n", "200", "--d", "20",
                     "--theta", "1", "--theta", "0.8", "--sigma2", "0.1", "--sigma2", "3.25",
                     "--trials", "2", "--axis1", "0.2", "0.2", "1", "--seed", "5", "--out", str(out))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert list(rows[0]) == CSV_HEADER
    _, pj, _ = run(capsys, "predict", "--json", "--c", "10", "--theta", "1", "--theta", "0.8",
                   "--sigma2", "0.1", "--sigma2", "3.25", "--p", "0.8", "--p", "0.2")
    rep = json.loads(pj)
    for i, comp in enumerate(rep["components"], start=1):
        r = next(r for r in rows if r["component"] == str(i) and r["metric"] == "subspace_sq_cos")
        assert float(r["asymptotic"]) == comp["subspace_recovery"]
        r = next(r for r in rows if r["component"] == str(i) and r["metric"] == "amplitude_ratio")
        assert float(r["asymptotic"]) == comp["amplitude_sq_ratio"]


def test_sweep_config_file_with_overrides(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sweep_kind": "p2-sweep", "n": 100, "d": 10, "trials": 5,
                               "amplitudes": [1.0], "axis1": [0.0, 1.0, 2]}))
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--trials", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["trials"] for r in rows} == {"1"}
    assert {r["point_index"] for r in rows} == {"0", "1"}
