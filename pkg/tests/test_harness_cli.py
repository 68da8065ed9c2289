import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from noisysimplex.cli import main
from noisysimplex.errors import InvalidConfig
from noisysimplex.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    config_hash,
    find_knee,
    run_experiment,
    sweep_phase_transition,
)

SMALL = dict(K=2, n=400, sigma=0.05, trials=1, point_budget=60, global_tuples=3, seeded_budget=4,
             quad_size=64, mc_mass=200, tv_mc=2000)


def read_rows(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# build=")
    return list(csv.DictReader(lines[1:]))


def test_config_validation():
    with pytest.raises(InvalidConfig):
        ExperimentConfig(K=9)
    with pytest.raises(InvalidConfig):
        ExperimentConfig(n=[100, 200], sigma=[0.1, 0.2])
    with pytest.raises(InvalidConfig):
        ExperimentConfig(sigma=-1.0)
    with pytest.raises(InvalidConfig):
        ExperimentConfig.from_dict({"K": 2, "bogus": 1})
    with pytest.raises(InvalidConfig):
        ExperimentConfig(K=2, simplex={"dim": 3, "vertices": np.eye(4, 3).tolist()})


def test_hash_ignores_output_location():
    a = ExperimentConfig(**SMALL, out="x").hash_payload()
    b = ExperimentConfig(**SMALL, out="y", workers=2).hash_payload()
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(ExperimentConfig(**{**SMALL, "seed": 1}).hash_payload())


def test_experiment_rerun_is_byte_identical(tmp_path):
    texts = []
    for d in ("a", "b"):
        cfg = ExperimentConfig(**SMALL, out=str(tmp_path / d))
        rep = run_experiment(cfg)
        texts.append((open(rep.csv_path).read(), open(rep.summary_path).read()))
    assert texts[0] == texts[1]
    rows = read_rows(tmp_path / "a" / "results.csv")
    assert list(rows[0]) == CSV_COLUMNS and rows[0]["runtime_ms"] == ""


def test_sweep_row_count(tmp_path):
    cfg = ExperimentConfig(**{**SMALL, "n": [200, 300, 400], "trials": 2}, out=str(tmp_path))
    rep = run_experiment(cfg)
    assert len(read_rows(rep.csv_path)) == 6
    assert [g["n"] for g in rep.groups] == [200, 300, 400]


def test_noiseless_sweep_is_flat(tmp_path):
    cfg = ExperimentConfig(**{**SMALL, "sigma": [0.0, 0.0], "trials": 2}, out=str(tmp_path))
    rep = sweep_phase_transition(cfg)
    curve = rep.extra["curve"]
    assert curve[0]["median_tv_error"] == curve[1]["median_tv_error"]
    assert rep.extra["knee_snr"] is None
    phase = json.loads((tmp_path / "phase.json").read_text())
    assert phase["curve"][0]["snr"] == "inf"


def test_knee_rules():
    groups = [
        {"snr": math.inf, "median_tv_error": 0.05},
        {"snr": 8.0, "median_tv_error": 0.06},
        {"snr": 2.0, "median_tv_error": 0.09},
        {"snr": 1.0, "median_tv_error": 0.2},
    ]
    assert find_knee(groups, 2.0) == (1.0, 0.05)
    assert find_knee(groups[1:], 2.0) == (1.0, 0.06)
    assert find_knee(groups[:2], 2.0)[0] is None


def test_phase_needs_a_sigma_sweep(tmp_path):
    with pytest.raises(InvalidConfig):
        sweep_phase_transition(ExperimentConfig(**SMALL, out=str(tmp_path)))


def test_cli_generate_and_localize(tmp_path, capsys):
    out = tmp_path / "y.csv"
    assert main(["generate", "--K", "3", "--sigma", "0.1", "--n", "500", "--seed", "4", "--out", str(out)]) == 0
    meta = json.loads((tmp_path / "y.csv.json").read_text())
    assert meta["provenance"]["seed"] == 4 and meta["n"] == 500
    assert main(["localize", "--in", str(out), "--delta", "0.1"]) == 0
    ball = json.loads(capsys.readouterr().out)
    assert ball["noise_bound_defined"] and ball["R_n"] > 0 and ball["m_required"] == 81887
    assert ball["sufficient"] is False


def test_cli_undefined_noise_bound(tmp_path, capsys):
    out = tmp_path / "y.csv"
    main(["generate", "--K", "2", "--sigma", "0.1", "--n", "100", "--out", str(out)])
    assert main(["localize", "--in", str(out)]) == 0
    ball = json.loads(capsys.readouterr().out)
    assert ball["R_n"] is None and ball["noise_bound_defined"] is False


def test_cli_spectrum_and_tail(tmp_path, capsys):
    sfile = tmp_path / "s.json"
    sfile.write_text(json.dumps({"dim": 1, "vertices": [[0.0], [1.0]]}))
    assert main(["spectrum", "--simplex", str(sfile), "--omega", str(2 * math.pi)]) == 0
    assert json.loads(capsys.readouterr().out)["modulus"] < 1e-15
    assert main(["tail", "--simplex", str(sfile), "--alpha", "100"]) == 0
    assert json.loads(capsys.readouterr().out)["normalized_tail"] == pytest.approx(2 / (100 * math.pi), rel=0.1)


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"K": 9}))
    assert main(["experiment", "--config", str(bad)]) == 2
    assert main(["experiment"]) == 2
    assert main(["localize", "--in", str(tmp_path / "missing.csv")]) == 1
    sfile = tmp_path / "s.json"
    sfile.write_text(json.dumps({"dim": 1, "vertices": [[0.0], [1.0]]}))
    assert main(["spectrum", "--simplex", str(sfile), "--omega", "1,2"]) == 2


def test_flat_config_supplies_defaults(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"K": 1, "n": 20, "sigma": 0.0, "seed": 3}))
    out = tmp_path / "y.csv"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    meta = json.loads((tmp_path / "y.csv.json").read_text())
    assert meta["seed"] == 3 and meta["n"] == 20 and meta["model"]["simplex"]["dim"] == 1


def test_module_entry_point(tmp_path):
    out = tmp_path / "y.csv"
    r = subprocess.run([sys.executable, "-m", "noisysimplex", "generate", "--n", "5", "--out", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert len(out.read_text().splitlines()) == 6
