import csv
import io
import json
import math

import numpy as np
import pytest

from selcorr import cli
from selcorr.correlation import CorrelationObservation, conditional_correlation_estimate
from selcorr.errors import ConvergenceError
from selcorr.experiments import BH_THRESHOLD_COLUMNS, METRICS_COLUMNS


def write_table(path, rows, header="r,n"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return str(path)


def parse_csv(text):
    reader = csv.DictReader(io.StringIO(text))
    return list(reader)


# --------------------------------------------------------------------------
# estimate
# --------------------------------------------------------------------------

def test_estimate_happy_path(tmp_path, capsys):
    path = write_table(tmp_path / "t.csv", ["0.75,20", "0.2,20", "-0.82,20", "0.61,20"])
    code = cli.main(["estimate", path, "--rule", "fixed:0.6"])
    out, err = capsys.readouterr()
    assert code == 0
    rows = parse_csv(out)
    assert list(rows[0]) == [
        "index", "r", "n", "rho_hat", "ci_lo", "ci_hi", "threshold_r", "threshold_p",
    ]
    assert [row["index"] for row in rows] == ["0", "2", "3"]  # 0.2 not selected
    for row in rows:
        assert abs(float(row["rho_hat"])) <= abs(float(row["r"]))
        assert float(row["ci_lo"]) <= float(row["ci_hi"])
        assert float(row["threshold_r"]) <= 0.6 + 1e-12
    assert "selected 3 of 4 rows" in err


def test_estimate_bh_selects_strong_rows(tmp_path, capsys):
    # eight strong correlations in a sixteen-subject table survive FDR 0.1
    strong = [0.82, 0.78, 0.85, -0.8, 0.9, 0.76, -0.88, 0.79]
    weak = [0.1, -0.15, 0.2, 0.05]
    rows = [f"{r},16" for r in strong + weak]
    path = write_table(tmp_path / "t.csv", rows)
    code = cli.main(["estimate", path, "--rule", "bh:0.1"])
    out, _ = capsys.readouterr()
    assert code == 0
    table = parse_csv(out)
    assert len(table) == 8
    for row in table:
        assert abs(float(row["rho_hat"])) <= abs(float(row["r"]))


def test_estimate_far_from_threshold_agrees_with_direct(tmp_path, capsys):
    path = write_table(tmp_path / "t.csv", ["0.9,20"])
    assert cli.main(["estimate", path, "--rule", "fixed:0.6"]) == 0
    out, _ = capsys.readouterr()
    (row,) = parse_csv(out)
    assert abs(float(row["rho_hat"]) - 0.9) < 0.02


def test_estimate_writes_out_file(tmp_path, capsys):
    path = write_table(tmp_path / "t.csv", ["0.8,25"])
    dest = tmp_path / "est.csv"
    assert cli.main(["estimate", path, "--rule", "fixed:0.6", "--out", str(dest)]) == 0
    out, err = capsys.readouterr()
    assert out == ""
    assert "selected 1 of 1 rows" in err
    assert dest.read_text().startswith("index,r,n,")


def test_estimate_rejects_correlation_of_one(tmp_path, capsys):
    path = write_table(tmp_path / "t.csv", ["0.5,20", "1.0,20"])
    code = cli.main(["estimate", path, "--rule", "fixed:0.6"])
    _, err = capsys.readouterr()
    assert code == 2
    assert "line 3" in err and "|r| < 1" in err


def test_estimate_parse_errors(tmp_path, capsys):
    bad_header = write_table(tmp_path / "a.csv", ["0.5,20"], header="rho,n")
    assert cli.main(["estimate", bad_header, "--rule", "fixed:0.6"]) == 2
    assert "header" in capsys.readouterr()[1]

    bad_fields = write_table(tmp_path / "b.csv", ["0.5,20,99"])
    assert cli.main(["estimate", bad_fields, "--rule", "fixed:0.6"]) == 2
    assert "line 2" in capsys.readouterr()[1]

    bad_number = write_table(tmp_path / "c.csv", ["high,20"])
    assert cli.main(["estimate", bad_number, "--rule", "fixed:0.6"]) == 2
    assert "not a number" in capsys.readouterr()[1]

    tiny_n = write_table(tmp_path / "d.csv", ["0.5,3"])
    assert cli.main(["estimate", tiny_n, "--rule", "fixed:0.6"]) == 2
    assert ">= 4" in capsys.readouterr()[1]

    assert cli.main(["estimate", str(tmp_path / "missing.csv"), "--rule", "fixed:0.6"]) == 2
    assert "cannot read" in capsys.readouterr()[1]


def test_estimate_empty_selection_exits_zero(tmp_path, capsys):
    path = write_table(tmp_path / "t.csv", ["0.1,20", "0.2,20"])
    code = cli.main(["estimate", path, "--rule", "fixed:0.6"])
    out, err = capsys.readouterr()
    assert code == 0
    assert len(parse_csv(out)) == 0
    assert "nothing was selected" in err


def test_estimate_shared_n_and_comments(tmp_path, capsys):
    with_n = write_table(tmp_path / "a.csv", ["0.75,30", "0.61,30"])
    assert cli.main(["estimate", with_n, "--rule", "fixed:0.6"]) == 0
    expected, _ = capsys.readouterr()

    shared = tmp_path / "b.csv"
    shared.write_text("# observed correlations\nr\n0.75\n# mid-table note\n0.61\n")
    assert cli.main(["estimate", str(shared), "--rule", "fixed:0.6", "--n", "30"]) == 0
    out, _ = capsys.readouterr()
    assert out == expected


def test_estimate_r_header_requires_n_flag(tmp_path, capsys):
    path = write_table(tmp_path / "t.csv", ["0.75"], header="r")
    assert cli.main(["estimate", path, "--rule", "fixed:0.6"]) == 2
    assert "--n" in capsys.readouterr()[1]


def test_rule_parsing_errors(tmp_path, capsys):
    path = write_table(tmp_path / "t.csv", ["0.75,20"])
    for rule in ("fixed", "quantile:0.5", "bh:2.0", "fixed:abc"):
        assert cli.main(["estimate", path, "--rule", rule]) == 2
        assert "error" in capsys.readouterr()[1]


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def test_simulate_unknown_scenario(tmp_path, capsys):
    code = cli.main(["simulate", "bootstrap", "--out", str(tmp_path)])
    _, err = capsys.readouterr()
    assert code == 2
    for name in cli.SCENARIOS:
        assert name in err


def test_simulate_deterministic(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "rho_grid": [0.3], "n_grid": [10], "replications": 50,
    }))
    for sub in ("one", "two"):
        code = cli.main([
            "simulate", "fixed-threshold", "--config", str(config),
            "--seed", "7", "--out", str(tmp_path / sub),
        ])
        assert code == 0
    for name in ("metrics.csv", "manifest.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()
    manifest = json.loads((tmp_path / "one" / "manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["config"]["master_seed"] == 7  # --seed overrides the config
    assert manifest["scenario"] == "fixed-threshold"


def test_simulate_mixture_schema(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "rho_h1_grid": [0.5], "n_grid": [16], "dims": [6, 6, 6], "replications": 3,
    }))
    out = tmp_path / "run"
    assert cli.main(["simulate", "mixture-grf", "--config", str(config), "--out", str(out)]) == 0
    lines = (out / "metrics.csv").read_text().splitlines()
    assert lines[0] == ",".join(METRICS_COLUMNS)
    assert len(lines) == 1 + 3  # one row per estimator
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["tables"]["metrics.csv"] == list(METRICS_COLUMNS)


def test_simulate_bh_convergence_sd_decreases(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "m_grid": [50, 400], "generators": ["independent"], "replications": 40,
    }))
    out = tmp_path / "run"
    assert cli.main([
        "simulate", "bh-convergence", "--config", str(config), "--out", str(out),
    ]) == 0
    lines = (out / "bh_thresholds.csv").read_text().splitlines()
    assert lines[0] == ",".join(BH_THRESHOLD_COLUMNS)
    rows = parse_csv("\n".join(lines))
    assert float(rows[0]["threshold_sd"]) > float(rows[1]["threshold_sd"])


def test_simulate_fmri_writes_all_tables(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "n_datasets": 6, "gen": {"dims": [8, 8, 8]},
    }))
    out = tmp_path / "run"
    assert cli.main(["simulate", "fmri-like", "--config", str(config), "--out", str(out)]) == 0
    for name in ("metrics.csv", "fmri_datasets.csv", "fmri_by_observed.csv", "manifest.json"):
        assert (out / name).exists()
    dataset_lines = (out / "fmri_datasets.csv").read_text().splitlines()
    assert len(dataset_lines) == 1 + 6 * 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["gen"]["dims"] == [8, 8, 8]


def test_simulate_config_dir_env(tmp_path, monkeypatch):
    config_dir = tmp_path / "configs"
    config_dir.mkdir()
    (config_dir / "tiny.json").write_text(json.dumps({
        "rho_grid": [0.4], "n_grid": [10], "replications": 20, "master_seed": 5,
    }))
    monkeypatch.setenv(cli.CONFIG_DIR_ENV, str(config_dir))
    out = tmp_path / "run"
    assert cli.main(["simulate", "fixed-threshold", "--config", "tiny.json", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 5
    assert manifest["config"]["replications"] == 20


def test_simulate_bad_config(tmp_path, capsys):
    bad_key = tmp_path / "a.json"
    bad_key.write_text(json.dumps({"rho_values": [0.4]}))
    assert cli.main(["simulate", "fixed-threshold", "--config", str(bad_key)]) == 2
    assert "rho_values" in capsys.readouterr()[1]

    bad_json = tmp_path / "b.json"
    bad_json.write_text("{not json")
    assert cli.main(["simulate", "fixed-threshold", "--config", str(bad_json)]) == 2
    assert "JSON" in capsys.readouterr()[1]

    bad_value = tmp_path / "c.json"
    bad_value.write_text(json.dumps({"replications": 0}))
    assert cli.main(["simulate", "fixed-threshold", "--config", str(bad_value)]) == 2
    assert "replications" in capsys.readouterr()[1]

    not_object = tmp_path / "d.json"
    not_object.write_text("[1, 2]")
    assert cli.main(["simulate", "fixed-threshold", "--config", str(not_object)]) == 2
    capsys.readouterr()


# --------------------------------------------------------------------------
# ccp
# --------------------------------------------------------------------------

def test_ccp_table_properties(tmp_path):
    rows = ["-0.7,20", "0.55,20", "0.6,20", "0.68,20", "0.8,20", "0.92,20"]
    path = write_table(tmp_path / "t.csv", rows)
    dest = tmp_path / "ccp.csv"
    assert cli.main(["ccp", path, "--rule", "fixed:0.6", "--out", str(dest)]) == 0

    lines = dest.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    assert any(l.startswith("# rule: fixed:0.6") for l in comments)
    assert any(l.startswith("# threshold_p:") for l in comments)
    assert any(l.startswith("# threshold_r:") for l in comments)
    assert any(l.startswith("# alpha:") for l in comments)

    table = parse_csv("\n".join(l for l in lines if not l.startswith("#")))
    observed = [float(row["observed_r"]) for row in table]
    # 0.55 fell inside the boundary; the row sitting exactly on it is kept
    assert observed == sorted(observed)
    assert 0.6 in observed
    assert 0.55 not in observed
    estimates = [float(row["rho_hat"]) for row in table]
    assert estimates == sorted(estimates)
    for row in table:
        assert float(row["ci_lo"]) <= float(row["ci_hi"])


def test_ccp_roundtrip_reparses_within_1e6(tmp_path):
    path = write_table(tmp_path / "t.csv", ["0.68,40", "0.85,40"])
    dest = tmp_path / "ccp.csv"
    assert cli.main(["ccp", path, "--rule", "fixed:0.6", "--out", str(dest)]) == 0
    table = parse_csv(
        "\n".join(l for l in dest.read_text().splitlines() if not l.startswith("#"))
    )
    for row in table:
        obs = CorrelationObservation(float(row["observed_r"]), 40)
        exact = conditional_correlation_estimate(obs, 0.6, alpha=0.05)
        assert float(row["rho_hat"]) == pytest.approx(exact.rho_hat, abs=1e-6)
        assert float(row["ci_lo"]) == pytest.approx(exact.interval[0], abs=1e-6)
        assert float(row["ci_hi"]) == pytest.approx(exact.interval[1], abs=1e-6)


def test_ccp_svg_output(tmp_path, capsys):
    path = write_table(tmp_path / "t.csv", ["0.65,20", "0.75,20", "0.9,20"])
    dest = tmp_path / "ccp.csv"
    assert cli.main(["ccp", path, "--rule", "fixed:0.6", "--out", str(dest), "--svg"]) == 0
    svg = (tmp_path / "ccp.svg").read_text()
    assert svg.lstrip().startswith("<svg")
    capsys.readouterr()

    # without a file destination there is nowhere to put the image
    assert cli.main(["ccp", path, "--rule", "fixed:0.6", "--svg"]) == 2
    assert "--svg requires --out" in capsys.readouterr()[1]


# --------------------------------------------------------------------------
# exit codes
# --------------------------------------------------------------------------

def test_solver_failure_maps_to_exit_3(tmp_path, capsys, monkeypatch):
    def explode(*args, **kwargs):
        raise ConvergenceError("bisection stalled", bracket=(0.0, 1.0))

    monkeypatch.setattr(cli, "conditional_correlation_estimate", explode)
    path = write_table(tmp_path / "t.csv", ["0.8,20"])
    assert cli.main(["estimate", path, "--rule", "fixed:0.6"]) == 3
    assert "solver error" in capsys.readouterr()[1]
