"""CLI behaviour: subcommand outputs, exit codes, determinism, round-trips."""

import csv
import json
import subprocess

import numpy as np
import pytest

from tropgt import bernoulli_design
from tropgt.cli import main
from conftest import (WORKED_DD, WORKED_MATRIX, WORKED_SCOMP_MAX)


@pytest.fixture()
def worked_instance_file(tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(json.dumps({
        "d": 37, "N": 7, "T": 5, "matrix": WORKED_MATRIX,
        "outcomes": [0, 37, 0, 29, 0], "truth": [0, 0, 37, 0, 0, 29, 37],
    }))
    return path


def _encode(values):
    return [0 if v == (1 << 62) else int(v) for v in values]


# --- design ------------------------------------------------------------------------

def test_design_writes_instance_block(tmp_path, capsys):
    out = tmp_path / "design.json"
    rc = main(["design", "--kind", "bernoulli", "--T", "6", "--N", "9",
               "--p", "0.4", "--seed", "11", "--d", "3", "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["T"] == 6 and doc["N"] == 9 and doc["d"] == 3
    expected = bernoulli_design(6, 9, 0.4, seed=11)
    assert np.array_equal(np.array(doc["matrix"], dtype=bool), expected.matrix)


def test_design_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["design", "--kind", "near-constant-column", "--T", "8", "--N", "12",
            "--nu", "0.7", "--K", "2", "--seed", "3"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_design_nu_without_k_fails(tmp_path, capsys):
    rc = main(["design", "--kind", "bernoulli", "--T", "4", "--N", "4",
               "--nu", "1.0", "--seed", "0"])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "validation"


# --- decode ------------------------------------------------------------------------

def test_decode_dd_matches_golden(worked_instance_file, capsys):
    rc = main(["decode", "--in", str(worked_instance_file), "--algo", "dd"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["estimate"] == _encode(WORKED_DD)
    assert doc["unexplained_tests"] == [1]
    assert doc["satisfying"] is False


def test_decode_scomp_max_matches_published_output(worked_instance_file, capsys):
    rc = main(["decode", "--in", str(worked_instance_file), "--algo", "scomp",
               "--tie", "max"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["estimate"] == _encode(WORKED_SCOMP_MAX)
    assert doc["satisfying"] is True


def test_decode_without_outcomes_is_a_validation_error(tmp_path, capsys):
    path = tmp_path / "matrix-only.json"
    path.write_text(json.dumps({"d": 2, "N": 2, "T": 1, "matrix": [[1, 1]]}))
    rc = main(["decode", "--in", str(path), "--algo", "comp"])
    assert rc == 2


def test_decode_missing_file(tmp_path, capsys):
    rc = main(["decode", "--in", str(tmp_path / "nope.json"), "--algo", "comp"])
    assert rc == 2


# --- bounds ------------------------------------------------------------------------

def _rows(text):
    return list(csv.DictReader(text.splitlines()))


def test_bounds_counting_csv_is_monotone(capsys):
    rc = main(["bounds", "--what", "counting", "--N", "100", "--K", "5",
               "--profile", "1,2,2", "--T-grid", "0:60:5"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)
    assert [r["T"] for r in rows] == [str(t) for t in range(0, 61, 5)]
    classical = [float(r["classical"]) for r in rows]
    tropical = [float(r["tropical"]) for r in rows]
    assert all(a <= b for a, b in zip(classical, classical[1:]))
    assert all(a <= b for a, b in zip(tropical, tropical[1:]))


def test_bounds_phi_csv(capsys):
    rc = main(["bounds", "--what", "phi", "--cells", "2", "--q", "0.5",
               "--T-grid", "0:2:1"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)
    assert float(rows[2]["phi"]) == pytest.approx(0.5)
    assert all(float(r["phi"]) <= float(r["upper_bound"]) + 1e-12 for r in rows)


def test_bounds_dd_thresholds_rows(capsys):
    rc = main(["bounds", "--what", "dd-thresholds", "--N", "8",
               "--profile", "1,1", "--nu", "1.0"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)
    assert [r["level"] for r in rows] == ["1", "2", "inf", "max"]
    assert float(rows[2]["tests_needed"]) == pytest.approx(8 * np.log(4))


def test_bounds_summands_and_converse(capsys):
    rc = main(["bounds", "--what", "comp-summands", "--N", "500",
               "--profile", "2,2,2,2,2", "--p", "0.1", "--T-grid", "50:100:50"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)
    assert set(rows[0]) == {"T", "level_1", "level_2", "level_3", "level_4",
                            "level_5", "level_inf"}
    rc = main(["bounds", "--what", "dd-converse", "--N", "500",
               "--profile", "2,2,2,2,2", "--p", "0.1", "--T-grid", "50:100:50"])
    assert rc == 0
    rows = _rows(capsys.readouterr().out)
    assert all(0.0 <= float(r["lower_bound"]) <= 1.0 for r in rows)


def test_bounds_json_format(capsys):
    rc = main(["bounds", "--what", "comp", "--N", "10", "--profile", "1",
               "--p", "0.5", "--T-grid", "2:2:1", "--format", "json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc[0]["T"] == 2


def test_bounds_missing_flags(capsys):
    rc = main(["bounds", "--what", "comp", "--T-grid", "0:10:5"])
    assert rc == 2


def test_bounds_bad_grid(capsys):
    rc = main(["bounds", "--what", "phi", "--cells", "2", "--q", "0.1",
               "--T-grid", "5:1:1"])
    assert rc == 2


# --- oracle ------------------------------------------------------------------------

def test_oracle_diagnostics_report(worked_instance_file, capsys):
    rc = main(["oracle", "--in", str(worked_instance_file), "--mode", "diagnostics"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["m_infinity"] == 3
    assert doc["m_level"]["29"] == 1 and doc["m_level"]["37"] == 1
    assert doc["min_l"] == 0 and doc["dd_succeeds"] is False
    assert doc["h"]["inf"] == 4


def test_oracle_satisfying_restricted(worked_instance_file, capsys):
    rc = main(["oracle", "--in", str(worked_instance_file), "--mode", "satisfying",
               "--restrict-profile"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["count"] == 1
    assert doc["vectors"] == [[0, 0, 37, 0, 0, 29, 37]]


def test_oracle_optimal_and_exact_error(tmp_path, capsys):
    path = tmp_path / "pool.json"
    path.write_text(json.dumps({"d": 2, "N": 2, "T": 1, "matrix": [[1, 1]],
                                "outcomes": [1], "truth": [1, 2]}))
    rc = main(["oracle", "--in", str(path), "--mode", "optimal"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert (doc["numerator"], doc["denominator"]) == (1, 2)
    rc = main(["oracle", "--in", str(path), "--mode", "exact-error",
               "--algo", "comp"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert (doc["numerator"], doc["denominator"]) == (1, 1)


def test_oracle_budget_exit_code(tmp_path, capsys):
    path = tmp_path / "big.json"
    path.write_text(json.dumps({"d": 3, "N": 30, "T": 1,
                                "matrix": [[1] * 30], "outcomes": [1]}))
    rc = main(["oracle", "--in", str(path), "--mode", "satisfying",
               "--budget", "1000"])
    assert rc == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "budget"


# --- simulate + plot ------------------------------------------------------------------

SWEEP_DOC = {
    "schema": 1, "N": 40, "trials": 60, "seed": 5,
    "prior": {"kind": "fixed-profile", "profile": [2, 2]},
    "design": {"kind": "bernoulli", "p": 0.25},
    "algorithms": ["comp", "dd", "scomp"],
    "axis": {"name": "T", "values": [15, 30, 45]},
}


@pytest.fixture(scope="module")
def results_csv(tmp_path_factory):
    base = tmp_path_factory.mktemp("sim")
    config = base / "sweep.json"
    config.write_text(json.dumps(SWEEP_DOC))
    out = base / "results.csv"
    assert main(["simulate", "--config", str(config), "--out", str(out)]) == 0
    return out


def test_simulate_csv_schema_and_determinism(results_csv, tmp_path):
    rows = list(csv.DictReader(results_csv.read_text().splitlines()))
    assert len(rows) == 9
    assert list(rows[0]) == ["axis_name", "axis_value", "algorithm", "design_kind",
                             "trials", "successes_U", "successes_K", "rate",
                             "ci_lo", "ci_hi", "seconds"]
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps(SWEEP_DOC))
    again = tmp_path / "again.csv"
    assert main(["simulate", "--config", str(config), "--out", str(again)]) == 0
    fresh = list(csv.DictReader(again.read_text().splitlines()))
    for a, b in zip(rows, fresh):
        assert {k: v for k, v in a.items() if k != "seconds"} == \
               {k: v for k, v in b.items() if k != "seconds"}


def test_simulate_seed_override_changes_counts(results_csv, tmp_path):
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps(SWEEP_DOC))
    out = tmp_path / "seeded.csv"
    assert main(["simulate", "--config", str(config), "--seed", "99",
                 "--out", str(out)]) == 0
    base = [r["successes_U"] for r in csv.DictReader(results_csv.read_text().splitlines())]
    seeded = [r["successes_U"] for r in csv.DictReader(out.read_text().splitlines())]
    assert base != seeded


def test_simulate_invalid_config(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"schema": 1}))
    assert main(["simulate", "--config", str(config)]) == 2


def test_plot_svg_is_deterministic_and_joins_bounds(results_csv, tmp_path, capsys):
    bounds_csv = tmp_path / "bounds.csv"
    assert main(["bounds", "--what", "counting", "--N", "40", "--K", "4",
                 "--profile", "2,2", "--T-grid", "15:45:15",
                 "--out", str(bounds_csv)]) == 0
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    argv = ["plot", "--results", str(results_csv), "--bounds", str(bounds_csv),
            "--title", "sweep"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    # 3 result series + 2 bound series
    assert text.count("<polyline") == 5
    assert "tropical" in text and "scomp" in text


def test_plot_renders_summand_csv_alone(tmp_path):
    # the per-level COMP bound contributions make a standalone six-series plot
    summands = tmp_path / "summands.csv"
    assert main(["bounds", "--what", "comp-summands", "--N", "500",
                 "--profile", "2,2,2,2,2", "--p", "0.1",
                 "--T-grid", "10:500:10", "--out", str(summands)]) == 0
    out = tmp_path / "summands.svg"
    assert main(["plot", "--results", str(summands), "--xlabel", "tests",
                 "--ylabel", "bound contribution", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.count("<polyline") == 6
    assert "level_inf" in text


def test_plot_log_x_axis(tmp_path):
    wide = tmp_path / "wide.csv"
    wide.write_text("T,curve\n1,0.1\n10,0.5\n100,0.9\n")
    out = tmp_path / "log.svg"
    assert main(["plot", "--results", str(wide), "--log-x", "--out", str(out)]) == 0
    assert out.read_text().count("<polyline") == 1


def test_plot_empty_results_fails(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("axis_name,axis_value,algorithm,design_kind,rate\n")
    assert main(["plot", "--results", str(empty)]) == 2


def test_plot_axis_mismatch_fails(results_csv, tmp_path, capsys):
    bad = tmp_path / "bad-bounds.csv"
    bad.write_text("p,classical\n0.1,0.5\n")
    assert main(["plot", "--results", str(results_csv), "--bounds", str(bad)]) == 2


# --- entry point -----------------------------------------------------------------------

def test_console_script_help_runs():
    proc = subprocess.run(["tropgt", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "design" in proc.stdout and "simulate" in proc.stdout


def test_usage_errors_are_json(capsys):
    rc = main(["decode", "--algo", "comp"])  # missing --in
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "validation"
    rc = main(["frobnicate"])
    assert rc == 2


def test_round_trip_design_decode_oracle(tmp_path, capsys):
    design_path = tmp_path / "design.json"
    assert main(["design", "--kind", "bernoulli", "--T", "5", "--N", "6",
                 "--p", "0.45", "--seed", "8", "--d", "2",
                 "--out", str(design_path)]) == 0
    doc = json.loads(design_path.read_text())
    # attach a truth and its outcomes, then feed the same file onward
    from tropgt import TestDesign, run_tests
    import tropgt
    design = TestDesign(np.array(doc["matrix"]))
    truth = np.array([1, tropgt.INFINITY, 2, tropgt.INFINITY, tropgt.INFINITY, 2])
    outcomes = run_tests(design, truth)
    doc["outcomes"] = [0 if v == tropgt.INFINITY else int(v) for v in outcomes]
    doc["truth"] = [1, 0, 2, 0, 0, 2]
    full_path = tmp_path / "full.json"
    full_path.write_text(json.dumps(doc))
    assert main(["decode", "--in", str(full_path), "--algo", "scomp"]) == 0
    decoded = json.loads(capsys.readouterr().out)
    assert decoded["satisfying"] is True
    assert main(["oracle", "--in", str(full_path), "--mode", "exact-error",
                 "--algo", "dd"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert 0.0 <= report["value"] <= 1.0
