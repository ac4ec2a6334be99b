import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from unitfit import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


def run_csv(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, list(csv.DictReader(io.StringIO(out))), err


# -------------------------------------------------------------------- fit

def test_fit_quality(capsys):
    code, doc, _ = run_json(capsys, "fit", "--data", "quality")
    assert code == 0
    r = doc["results"]
    assert doc["schema_version"] == 1 and doc["command"] == "fit"
    assert r["params"]["alpha"] == pytest.approx(0.3591, abs=5e-4)
    assert r["aic"] == pytest.approx(-58.079, abs=1e-2)
    assert r["ks"] == pytest.approx(0.1309, abs=1e-4)
    assert r["converged"] is True


def test_fit_flood_and_competitor(capsys):
    _, doc, _ = run_json(capsys, "fit", "--data", "flood")
    assert doc["results"]["params"]["alpha"] == pytest.approx(1.0443, abs=1e-4)
    code, doc, _ = run_json(capsys, "fit", "--data", "quality", "--dist", "topp-leone")
    assert code == 0
    assert doc["results"]["params"]["theta"] == pytest.approx(71.2975, abs=0.01)


def test_fit_json_is_key_sorted(capsys):
    _, out, _ = run(capsys, "fit", "--data", "pumps", "--method", "cvm")
    doc = json.loads(out)
    assert out == json.dumps(doc, sort_keys=True, indent=2) + "\n"


def test_fit_csv(capsys):
    code, rows, _ = run_csv(capsys, "fit", "--data", "quality", "--format", "csv")
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["params.alpha"]) == pytest.approx(0.3591, abs=5e-4)


def test_fit_mps_spacings_echoed(capsys):
    _, doc, _ = run_json(capsys, "fit", "--data", "pumps", "--method", "mps", "--mps-spacings", "n")
    assert doc["inputs_echo"]["mps_spacings"] == "n"


def test_fit_convergence_exit(tmp_path, capsys):
    p = tmp_path / "hi.txt"
    p.write_text("0.999999\n0.9999995\n")
    code, doc, err = run_json(capsys, "fit", "--data", str(p), "--method", "mom")
    assert code == cli.EXIT_CONVERGENCE == 3
    assert doc["results"]["converged"] is False
    assert doc["warnings"]


# ------------------------------------------------------------- exit codes

@pytest.mark.parametrize("argv, code", [
    (["fit", "--data", "quality", "--dist", "beta", "--method", "mps"], 1),
    (["fit", "--data", "quality", "--ci", "1.5"], 1),
    (["simulate", "--alpha", "1", "--reps", "0"], 1),
    (["dist", "--params", "1,2", "--eval", "pdf", "--at", "0.5"], 2),
    (["dist", "--params", "x", "--eval", "pdf", "--at", "0.5"], 1),
    (["datasets", "show", "nope"], 2),
    (["datasets", "show"], 1),
    (["fit", "--data", "/no/such/file.csv"], 2),
    (["bogus"], 1),
])
def test_exit_codes(argv, code, capsys):
    try:
        got = cli.main(argv)
    except SystemExit as exc:
        got = exc.code
    assert got == code
    assert capsys.readouterr().err


def test_bad_data_file_exit(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("0.3\n1.2\n")
    code, out, err = run(capsys, "fit", "--data", str(p))
    assert code == 2 and out == ""
    assert "line 2" in err


# -------------------------------------------------------------------- gof

def test_gof_quality_ad_pvalue(capsys):
    _, doc, _ = run_json(capsys, "gof", "--data", "quality", "--seed", "7")
    mc = doc["results"]["mc"]
    assert mc["ad"]["replicates"] == 10_000
    assert mc["ad"]["pvalue"] == pytest.approx(0.93, abs=0.05)


def test_gof_pumps_cvm_pvalue(capsys):
    _, doc, _ = run_json(capsys, "gof", "--data", "pumps", "--seed", "7", "--mc-reps", "10000")
    assert doc["results"]["mc"]["cvm"]["pvalue"] == pytest.approx(0.485, abs=0.05)


def test_gof_without_mc(capsys):
    code, doc, _ = run_json(capsys, "gof", "--data", "quality", "--mc-reps", "0", "--seed", "3")
    assert code == 0
    assert doc["results"]["mc"] == {}
    assert doc["results"]["ks_pvalue"] == pytest.approx(0.8586, abs=1e-3)


def test_gof_given_params_and_csv(capsys):
    code, rows, _ = run_csv(capsys, "gof", "--data", "pumps", "--params", "1.7886", "--mc-reps", "200",
                            "--seed", "1", "--format", "csv")
    assert code == 0
    assert [r["statistic"] for r in rows] == ["ks", "ad", "cvm"]
    assert all(r["mc_pvalue"] for r in rows)


def test_gof_drawn_seed_reported(capsys):
    code, doc, err = run_json(capsys, "gof", "--data", "quality", "--mc-reps", "10")
    assert doc["inputs_echo"]["seed_drawn"] is True
    assert f"seed: {doc['inputs_echo']['seed']}" in err


# ------------------------------------------------------------------- dist

def test_dist_pdf_symmetric_at_one(capsys):
    _, rows, _ = run_csv(capsys, "dist", "--params", "1", "--eval", "pdf", "--at", "0.1,0.5,0.9")
    v = [float(r["pdf"]) for r in rows]
    assert v[1] == pytest.approx(1.5)
    assert v[0] == pytest.approx(v[2], rel=1e-9)


def test_dist_hazard_bathtub(capsys):
    _, rows, _ = run_csv(capsys, "dist", "--params", "1.6", "--eval", "hazard", "--at", "0.0001:0.9999:200")
    h = np.array([float(r["hazard"]) for r in rows])
    k = int(np.argmin(h))
    assert 0 < k < h.size - 1
    assert np.all(np.diff(h[: k + 1]) < 0) and np.all(np.diff(h[k:]) > 0)


def test_dist_quantile_endpoints(capsys):
    _, rows, _ = run_csv(capsys, "dist", "--params", "1", "--eval", "quantile", "--at", "0,0.5,1")
    assert [float(r["quantile"]) for r in rows] == [0.0, pytest.approx(0.5), 1.0]


def test_dist_json_points(capsys):
    _, doc, _ = run_json(capsys, "dist", "--params", "0.8", "--eval", "cdf", "--at", "0.2:0.8:3",
                         "--format", "json")
    pts = doc["results"]["points"]
    assert [p[0] for p in pts] == pytest.approx([0.35, 0.5, 0.65])


@pytest.mark.parametrize("ev", ["mrl", "ttt"])
def test_dist_other_functions(ev, capsys):
    code, rows, _ = run_csv(capsys, "dist", "--params", "2,3", "--dist", "beta", "--eval", ev,
                            "--at", "0.2:0.8:3")
    assert code == 0 and len(rows) == 3


# --------------------------------------------------------------- datasets

def test_datasets_list(capsys):
    _, doc, _ = run_json(capsys, "datasets", "list")
    assert [d["name"] for d in doc["results"]["datasets"]] == ["dwellings", "quality", "education",
                                                                "flood", "pumps"]


def test_datasets_stats(capsys):
    _, rows, _ = run_csv(capsys, "datasets", "stats", "quality", "--format", "csv")
    r = rows[0]
    assert float(r["mean"]) == pytest.approx(0.9005)
    assert float(r["skewness"]) == pytest.approx(-0.9147, abs=1e-4)
    _, rows_b, _ = run_csv(capsys, "datasets", "stats", "quality", "--biased", "--format", "csv")
    assert abs(float(rows_b[0]["skewness"])) < abs(float(r["skewness"]))


def test_datasets_show(capsys):
    _, doc, _ = run_json(capsys, "datasets", "show", "flood")
    assert doc["results"]["n"] == 20


# ------------------------------------------------------------ simulate

def test_simulate_csv(capsys):
    code, rows, _ = run_csv(capsys, "simulate", "--alpha", "1", "--sizes", "20,40", "--reps", "20",
                            "--methods", "mle,ls", "--seed", "5", "--lilliefors-reps", "100")
    assert code == 0
    assert [(r["method"], r["n"]) for r in rows] == [("mle", "20"), ("mle", "40"), ("ls", "20"), ("ls", "40")]


# ----------------------------------------------------------- determinism

@pytest.mark.parametrize("argv", [
    ["gof", "--data", "pumps", "--mc-reps", "500", "--seed", "11"],
    ["simulate", "--alpha", "2.5", "--sizes", "20", "--reps", "50", "--methods", "mle,mps", "--seed", "4",
     "--lilliefors-reps", "100"],
])
def test_output_identical_across_threads(argv, capsys, monkeypatch):
    outs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv("UNITFIT_THREADS", threads)
        outs.append(run(capsys, *argv)[1])
    assert outs[0] == outs[1] == outs[2]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "unitfit", "dist", "--params", "1", "--eval", "cdf",
                          "--at", "0.5"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines() == ["y,cdf", "0.5,0.5"]
