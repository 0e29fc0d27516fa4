import json
from pathlib import Path

import numpy as np
import pytest

from adaptlin.cli import main

TINY_TOML = """\
[experiment]
name = "cli-tiny"
n_reps = 4
master_seed = 4242
alpha_grid = [0.1]
target_coord = 0

[model]
n = 90
d = 5
k = 1
sigma = 0.3
theta = "null_treatment"

[generator]
kind = "treatment_assignment"
p_exploit = 0.8
nonadaptive_law = "standard_gaussian"

[estimators]
methods = ["tale", "ols"]
sigma_mode = "known"
tale_s0 = "auto"
"""


@pytest.fixture()
def tiny_toml(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_TOML)
    return path


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in ("fig1", "fig2-low", "fig2-high", "fig1-desk"):
        assert name in out


def test_generate_and_estimate(tmp_path, tiny_toml, capsys):
    ds_path = tmp_path / "ds.csv"
    assert main(["generate", "--config", str(tiny_toml), "--out", str(ds_path), "--quiet"]) == 0
    header = ds_path.read_text().splitlines()[0]
    assert header == "y,x1,x2,x3,x4,x5"
    meta = json.loads(Path(str(ds_path) + ".meta.json").read_text())
    assert meta["adaptive_columns"] == [1]
    assert meta["generator"] == "treatment_assignment"
    assert "seed" in meta

    assert main(["estimate", "--method", "tale", "--dataset", str(ds_path),
                 "--adaptive-cols", "1", "--alpha", "0.1", "--sigma", "0.3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "method,coord,estimate,stderr,alpha,ci_lo,ci_hi"
    fields = out[1].split(",")
    assert fields[0] == "TALE" and fields[1] == "1"
    est, lo, hi = float(fields[2]), float(fields[5]), float(fields[6])
    assert lo <= est <= hi

    assert main(["estimate", "--method", "ols", "--dataset", str(ds_path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 1 + 5  # one row per coordinate, no CI levels requested


def test_generate_deterministic(tmp_path, tiny_toml):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["generate", "--config", str(tiny_toml), "--out", str(p1), "--quiet"]) == 0
    assert main(["generate", "--config", str(tiny_toml), "--out", str(p2), "--quiet"]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_experiment_runs_and_is_reproducible(tmp_path, tiny_toml, capsys):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["experiment", "--config", str(tiny_toml), "--out", str(out1),
                 "--jobs", "1", "--quiet"]) == 0
    assert main(["experiment", "--config", str(tiny_toml), "--out", str(out2),
                 "--jobs", "1", "--quiet"]) == 0
    capsys.readouterr()
    assert (out1 / "replications.csv").read_bytes() == (out2 / "replications.csv").read_bytes()


def test_report_concatenates(tmp_path, tiny_toml, capsys):
    out1 = tmp_path / "r1"
    assert main(["experiment", "--config", str(tiny_toml), "--out", str(out1),
                 "--jobs", "1", "--quiet"]) == 0
    capsys.readouterr()
    assert main(["report", str(out1), str(out1 / "summary.csv")]) == 0
    text = capsys.readouterr().out.splitlines()
    body = (out1 / "summary.csv").read_text().splitlines()
    assert text[0] == body[0]
    assert len(text) - 1 == 2 * (len(body) - 1)


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[experiment]\nname = 'x'\n")
    assert main(["experiment", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert main(["experiment", "--preset", "no-such-preset"]) == 1


def test_numerical_failure_exit_code(tmp_path):
    ds = tmp_path / "degenerate.csv"
    rng = np.random.default_rng(0)
    X = rng.standard_normal((12, 2))
    X[:, 1] = X[:, 0]  # exactly collinear
    y = rng.standard_normal(12)
    lines = ["y,x1,x2"] + [f"{y[i]},{X[i,0]},{X[i,1]}" for i in range(12)]
    ds.write_text("\n".join(lines) + "\n")
    assert main(["estimate", "--method", "ols", "--dataset", str(ds)]) == 2
