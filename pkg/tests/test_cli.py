import csv
import json
import subprocess
import sys

import pytest

from bienergy.cli import EXIT_CONFIG, EXIT_DISAGREE, EXIT_NUMERIC, EXIT_OK, RunConfig, main
from bienergy.errors import ConfigError
from bienergy.experiments import ROW_COLUMNS


def _run(tmp_path, config: dict) -> int:
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"output_dir": str(tmp_path / "out"), **config}))
    return main(["run", "--config", str(path)])


def test_list_text(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "cusp:alpha=<a>" in out
    assert "energy-identity → " in out
    assert "radial:a=<a>" in out


def test_list_json(capsys):
    assert main(["list", "--json"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert {m["id"] for m in doc["maps"]} >= {"identity", "slit", "cut", "cusp:alpha=<a>"}
    assert "energy-identity" in {e["name"] for e in doc["experiments"]}


def test_run_energy_identity(tmp_path):
    assert _run(tmp_path, {"experiment": "energy-identity", "map": "radial:a=2", "n": 3,
                           "region": "Annulus:r_in=0.5,r_out=1"}) == EXIT_OK
    doc = json.loads((tmp_path / "out" / "energy-identity.json").read_text())
    assert doc["passed"]
    assert doc["rows"][0]["diagnostics"]["gap"] <= 1e-3
    with open(tmp_path / "out" / "energy-identity.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ROW_COLUMNS


def test_run_cusp_threshold(tmp_path, capsys):
    assert _run(tmp_path, {"experiment": "cusp-threshold", "n": 3, "alphas": [2, 3, 4]}) == EXIT_OK
    doc = json.loads((tmp_path / "out" / "cusp-threshold.json").read_text())
    rows = {r["cell"]: r for r in doc["rows"]}
    assert rows["alpha=3:energy"]["borderline"]
    assert "borderline" in capsys.readouterr().out


def test_inline_flags(tmp_path):
    code = main(["run", "--experiment", "exponent-sweep", "--map", "slit:f", "--n", "3", "--p-grid", "2,3.5",
                 "--output-dir", str(tmp_path), "--format", "json"])
    assert code == EXIT_OK
    assert (tmp_path / "exponent-sweep.json").exists()
    assert not (tmp_path / "exponent-sweep.csv").exists()


@pytest.mark.parametrize(
    "config",
    [
        {"experiment": "no-such-experiment"},
        {"map": "slit:f"},
        {"experiment": "exponent-sweep", "map": "slit:f"},
        {"experiment": "exponent-sweep", "map": "slit:f", "p_grid": [2], "colour": "red"},
        {"experiment": "exponent-sweep", "map": "spiral", "p_grid": [2]},
        {"experiment": "exponent-sweep", "map": "slit:f", "p_grid": "two"},
        {"experiment": "exponent-sweep", "map": "slit:f", "p_grid": [2], "formats": ["xml"]},
        {"experiment": "cusp-threshold", "n": 3},
        {"experiment": "qc-witness", "map": "slit", "sample_budget": -5},
    ],
)
def test_config_errors_exit_2(tmp_path, config):
    assert _run(tmp_path, config) == EXIT_CONFIG


def test_missing_keys_are_listed():
    with pytest.raises(ConfigError, match="p_grid"):
        RunConfig.from_mapping({"experiment": "exponent-sweep", "map": "slit:f"})
    with pytest.raises(ConfigError, match="alphas or alpha"):
        RunConfig.from_mapping({"experiment": "cusp-threshold"})


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_disagreement_exit_1(tmp_path):
    # a forced threshold above the true one makes p = 3.5 a predicted-finite, computed-divergent cell
    assert _run(tmp_path, {"experiment": "exponent-sweep", "map": "slit:f", "n": 3, "p_grid": [3.5],
                           "threshold": 4}) == EXIT_DISAGREE


def test_numerical_failure_exit_3(tmp_path):
    assert _run(tmp_path, {"experiment": "exponent-sweep", "map": "slit:f", "n": 3, "p_grid": [2.5],
                           "max_depth": 1, "tol": 1e-14}) == EXIT_NUMERIC


def test_determinism(tmp_path):
    cfg = {"experiment": "qc-witness", "map": "cusp:alpha=2", "n": 3, "sample_budget": 600, "seed": 11}
    outs = []
    for name in ("a", "b"):
        assert _run(tmp_path, {**cfg, "output_dir": str(tmp_path / name), "formats": ["json"]}) == EXIT_OK
        outs.append((tmp_path / name / "qc-witness.json").read_bytes())
    assert outs[0] == outs[1]


def test_sample_examples(capsys):
    assert main(["sample", "identity", "0.3,-0.2,0.9", "--json"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["K_I"] == 1.0 and rec["K_O"] == 1.0
    assert main(["sample", "radial:a=2", "(0,(0.5,0))", "--json"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["K_I"] == pytest.approx(2.0, rel=1e-12)
    assert main(["sample", "slit", "-0.5,0.2,0.1", "--json"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["J"] == 1.0 and rec["K_I"] == 1.0
    assert main(["sample", "slit", "0.5,0.2,0.1"]) == EXIT_OK
    assert "K_I" in capsys.readouterr().out


def test_sample_domain_violation():
    assert main(["sample", "slit", "0.5,0,0"]) == EXIT_CONFIG
    assert main(["sample", "slit:f", "0.5,0.1,0"]) == EXIT_CONFIG
    assert main(["sample", "radial:a=2", "nonsense"]) == EXIT_CONFIG


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bienergy", "list"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "cusp:alpha=<a>" in proc.stdout
