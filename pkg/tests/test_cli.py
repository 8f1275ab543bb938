import csv
import json
import os
import subprocess
import sys

import pytest
import yaml

from phasebench.cli import config_hash, load_config
from phasebench.cli.main import main

FQ = {
    "kind": "fq-accuracy", "seed": 1, "n_q": [4], "channels": [{"kind": "dephasing", "eps_p": [0.0]}],
    "device": "A", "budgets": {"n_functions": 4, "n_trajectories": 5, "n_shots": 10, "routing_trials": 2},
}
MF = {
    "kind": "mf-run", "seed": 2, "n_q": [4, 5, 6], "channels": [{"kind": "relaxation", "eps_p": [0.1]}],
    "methods": ["hypergraph", "eigenshadow"], "k_grid": {"start": 0.6, "stop": 3.0, "step": 0.3},
    "budgets": {"replicates": 4},
}


def _write(tmp_path, doc, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return p


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_fq_run_noiseless(tmp_path):
    cfg = _write(tmp_path, FQ)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "fq_accuracy.csv")
    assert rows and all(float(r["accuracy"]) == 1.0 for r in rows)
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["kind"] == "fq-accuracy" and "fq_accuracy.csv" in man["files"]
    assert man["config_hash"] == config_hash(load_config(cfg))


def test_runs_are_deterministic(tmp_path):
    cfg = _write(tmp_path, MF)
    for d in ("a", "b"):
        assert main(["run", str(cfg), "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "mf_curves.csv").read_bytes()
    b = (tmp_path / "b" / "mf_curves.csv").read_bytes()
    assert a == b
    assert main(["run", str(cfg), "--out", str(tmp_path / "c"), "--threads", "3"]) == 0
    assert (tmp_path / "c" / "mf_curves.csv").read_bytes() == a


def test_mf_then_extrapolate(tmp_path):
    cfg = _write(tmp_path, MF)
    assert main(["run", str(cfg), "--out", str(tmp_path / "mf")]) == 0
    rows = _rows(tmp_path / "mf" / "mf_curves.csv")
    assert {r["method"] for r in rows} == {"hypergraph", "eigenshadow"}
    assert len(rows) == 2 * 3 * 4 * 9
    ex = dict(MF, kind="extrapolate", input_curves=str(tmp_path / "mf" / "mf_curves.csv"),
              budgets={"bootstrap": 50, "replicates": 4})
    assert main(["run", str(_write(tmp_path, ex, "ex.yaml")), "--out", str(tmp_path / "ex")]) == 0
    fits = _rows(tmp_path / "ex" / "fits.csv")
    assert fits and {"T", "C", "beta", "cov_CC"} <= set(fits[0])
    val = json.loads((tmp_path / "ex" / "validation.json").read_text())
    assert set(val) >= {"hypergraph", "eigenshadow"} or val


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PHASEBENCH_OUT", str(tmp_path / "env"))
    assert main(["run", str(_write(tmp_path, FQ))]) == 0
    assert (tmp_path / "env" / "fq_accuracy.csv").exists()


def test_validate_prints_hash(tmp_path, capsys):
    cfg = _write(tmp_path, FQ)
    assert main(["validate", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["valid"] and doc["kind"] == "fq-accuracy" and len(doc["config_hash"]) == 16


def test_hash_ignores_output_dir_not_seed(tmp_path):
    h = config_hash(load_config(_write(tmp_path, FQ)))
    assert config_hash(load_config(_write(tmp_path, dict(FQ, output_dir="elsewhere")))) == h
    assert config_hash(load_config(_write(tmp_path, dict(FQ, seed=9)))) != h
    assert config_hash(load_config(_write(tmp_path, FQ), {"seed": 9})) != h


def test_bad_eps_exit_2(tmp_path, capsys):
    bad = dict(FQ, channels=[{"kind": "dephasing", "eps_p": [2.0]}])
    assert main(["run", str(_write(tmp_path, bad))]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2 and "channels.0.eps_p" in err["message"]


@pytest.mark.parametrize("patch", [
    {"bogus": 1}, {"kind": "nope"}, {"n_q": [1]}, {"device": "Z"}, {"methods": ["magic"]},
    {"k_grid": [2.0, 1.0]}, {"alpha_rule": {"explicit": 9}}, {"budgets": {"ml_samples": 3}},
])
def test_config_rejections(tmp_path, patch):
    assert main(["validate", str(_write(tmp_path, dict(FQ, **patch)))]) == 2


def test_missing_file_and_non_mapping(tmp_path):
    assert main(["validate", str(tmp_path / "none.yaml")]) == 2
    p = tmp_path / "list.yaml"
    p.write_text("- 1\n- 2\n")
    assert main(["validate", str(p)]) == 2


def test_cap_exit_3(tmp_path):
    assert main(["run", str(_write(tmp_path, FQ)), "--max-qubits", "3", "--out", str(tmp_path / "o")]) == 3


def test_console_script(tmp_path):
    cfg = _write(tmp_path, FQ)
    exe = os.path.join(os.path.dirname(sys.executable), "phasebench")
    cmd = [exe] if os.path.exists(exe) else [sys.executable, "-m", "phasebench.cli.main"]
    out = subprocess.run(cmd + ["validate", str(cfg)], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["valid"]


def test_shadow_validate(tmp_path):
    doc = {"kind": "shadow-validate", "seed": 1, "n_q": [3], "channels": [{"kind": "dephasing", "eps_p": [0.0]}],
           "k_grid": [1.0, 2.0], "budgets": {"shadow_repetitions": 3}}
    assert main(["run", str(_write(tmp_path, doc)), "--out", str(tmp_path / "s")]) == 0
    assert _rows(tmp_path / "s" / "shadow_validation.csv")


def test_advantage_report_outputs(tmp_path):
    doc = {
        "kind": "advantage-report", "seed": 3, "n_q": [4, 5, 6, 7], "device": "C",
        "channels": [{"kind": "relaxation", "eps_p": [0.1]}], "methods": ["hypergraph"],
        "k_grid": {"start": 0.6, "stop": 3.0, "step": 0.2},
        "budgets": {"replicates": 6, "bootstrap": 100, "vm_functions": 4, "vm_shots": 100, "routing_trials": 2,
                    "n_functions": 4, "n_trajectories": 10, "n_shots": 20},
        "vm_n_q": [3, 4, 5, 6], "fq_n_q": [4, 6], "report_n_q": [4, 6, 8],
    }
    assert main(["run", str(_write(tmp_path, doc)), "--out", str(tmp_path / "a")]) == 0
    out = tmp_path / "a"
    adv = _rows(out / "advantage.csv")
    assert {int(r["n_q"]) for r in adv} == {4, 6, 8}
    assert {"observed_or_extrapolated", "config_hash", "runtime_s"} <= set(adv[0])
    fig2 = _rows(out / "plot_fig2.csv")
    assert list(fig2[0])[1:] == ["device", "channel", "eps_p", "alpha_rule", "n_q", "accuracy", "observed_or_extrapolated"]
    fig3 = _rows(out / "plot_fig3.csv")
    assert list(fig3[0])[1:7] == ["method", "channel", "eps_p", "n_q", "k", "accuracy"]
    assert "runtime_s" in _rows(out / "plot_fig5.csv")[0]
    json.loads((out / "advantage.json").read_text())
