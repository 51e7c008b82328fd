import json
import subprocess
import sys

import pytest

from vclust.cli import main

from conftest import DATA

HOUSES = ["--input", str(DATA / "houses_determination.csv"), "--input-kind", "similarity"]


def test_analyze_prints_tables(capsys):
    assert main(["analyze", "--input", str(DATA / "houses_correlation.csv"), "--input-kind", "correlation"]) == 0
    out = capsys.readouterr().out
    assert "# pca" in out and "# laplacian_spectra" in out
    assert "PC1,3.917,43.5,43.5" in out


def test_analyze_writes_files(tmp_path):
    assert main(["analyze", *HOUSES, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "determination.csv").exists()
    assert not (tmp_path / "pca.csv").exists()


def test_sweep(capsys):
    assert main(["sweep", *HOUSES, "--lo", "0.44", "--hi", "0.5", "--step", "0.01"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "epsilon,components,kind"
    assert lines[2] == "0.45,4,equivalence"
    assert lines[-1] == "0.5,5,equivalence"


def test_cluster_single_variant(capsys):
    args = ["cluster", *HOUSES, "--k", "4", "--epsilon", "0.45", "--variants", "4CL"]
    assert main(args) == 0
    assert capsys.readouterr().out.startswith("4CL: 126 sets (exhaustive), average 91.4%")


def test_cluster_requires_one_variant(capsys):
    assert main(["cluster", *HOUSES, "--k", "4", "--epsilon", "0.45"]) == 2
    assert "exactly one variant" in capsys.readouterr().err


def test_reference_mismatch_exit_code(capsys):
    assert main(["cluster", *HOUSES, "--k", "4", "--epsilon", "0.5", "--variants", "4EL"]) == 3
    assert "0.45:4" in capsys.readouterr().err


def test_experiment_with_config(tmp_path):
    cfg = {
        "input": str(DATA / "houses_determination.csv"),
        "input_kind": "similarity",
        "k": 4,
        "epsilon": [0.45],
        "pc_table": str(DATA / "houses_pc_table.csv"),
        "entropy_fraction": 40 / 126,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert main(["experiment", "--config", str(path), "--out", str(out), "--variants", "4EP,4EL45%"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["variants"] == ["4EP", "4EL45%"]
    assert manifest["config"]["entropy_fraction"] == pytest.approx(40 / 126)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "vclust", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("vclust ")
