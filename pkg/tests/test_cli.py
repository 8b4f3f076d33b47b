"""Command-line surface: exit codes, formats, reproducibility."""

from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fcspin import ModelParams, thermal_concurrence
from fcspin.cli import ResultRow, SweepSpec, emit_csv, emit_json, main, run_sweep


def run_cli(*args: str):
    proc = subprocess.run(
        [sys.executable, "-m", "fcspin.cli", *args],
        capture_output=True, text=True, timeout=300)
    return proc.returncode, proc.stdout, proc.stderr


# ---------------------------------------------------------------------------
# exit codes


def test_single_point_ok():
    code, out, _ = run_cli("--n", "10", "--chi", "0.5", "--b", "0.4",
                           "--T", "0.1")
    assert code == 0
    assert out.startswith("b,")


def test_bad_arguments_exit_2():
    cases = [
        ("--n", "10"),                                   # vy/chi missing
        ("--chi", "0.5", "--b", "0.1"),                  # n missing
        ("--n", "10", "--chi", "0.5", "--T", "-1"),      # negative T
        ("--n", "10", "--chi", "0.5", "--sweep", "field",
         "--from", "0", "--to", "1", "--points", "1"),   # degenerate grid
        ("--n", "40", "--chi", "0.5", "--method", "oracle"),  # oracle too big
        ("--n", "10", "--chi", "0.5", "--outputs", "bogus"),
        ("--n", "10", "--chi", "0.5", "--sweep", "field", "--points", "5"),
    ]
    for args in cases:
        code, _, err = run_cli(*args)
        assert code == 2, (args, err)


def test_numerical_failure_exits_3():
    # far below the static-path validity boundary
    code, _, err = run_cli("--n", "100", "--chi", "0.5", "--b", "0.5",
                           "--T", "0.01", "--method", "cspa")
    assert code == 3
    assert "omega" in err or "breakdown" in err.lower()


def test_soft_flags_keep_exit_zero():
    # mean-field methods flag their phase per row without failing the run
    code, out, _ = run_cli("--n", "100", "--chi", "0.5", "--b", "0.4",
                           "--T", "0.1", "--method", "mfrpa_asymptotic")
    assert code == 0
    assert "phase=" in out


def test_sweep_degrades_row_by_row():
    # on the isotropic line the ordered phase has a zero mode, so the
    # cold-side row is flagged while its neighbors stay numeric
    code, out, _ = run_cli("--n", "100", "--chi", "1.0", "--T", "0.14",
                           "--method", "mfrpa_full", "--sweep", "field",
                           "--from", "0.5", "--to", "1.5", "--points", "3",
                           "--outputs", "lnZ")
    assert code == 0
    lines = out.strip().splitlines()[1:]
    assert "error:DivergenceError" in lines[0]
    for ln in lines[1:]:
        assert math.isfinite(float(ln.split(",")[1]))


def test_sweep_past_the_validity_boundary_stays_soft():
    # every row refuses at this temperature, yet the sweep itself succeeds
    code, out, _ = run_cli("--n", "100", "--chi", "0.5", "--T", "0.02",
                           "--method", "cspa", "--sweep", "field",
                           "--from", "0.4", "--to", "0.8", "--points", "2")
    assert code == 0
    for line in out.strip().splitlines()[1:]:
        assert "breakdown" in line


# ---------------------------------------------------------------------------
# output content


def test_single_point_matches_library():
    code, out, _ = run_cli("--n", "10", "--chi", "0.5", "--b", "0.4",
                           "--T", "0.1", "--outputs", "C,nC")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "b,C,nC,flags"
    vals = row.split(",")
    p = ModelParams.from_chi(10, 0.4, 0.5)
    want = thermal_concurrence(p, 0.1).c
    assert math.isclose(float(vals[1]), want, rel_tol=1e-12)
    assert math.isclose(float(vals[2]), 10 * want, rel_tol=1e-12)


def test_sweep_reruns_are_byte_identical():
    args = ("--n", "12", "--chi", "0.5", "--T", "0.1", "--sweep", "field",
            "--from", "0.0", "--to", "1.5", "--points", "7")
    _, out1, _ = run_cli(*args)
    _, out2, _ = run_cli(*args)
    assert out1 == out2
    _, js1, _ = run_cli(*args, "--format", "json")
    _, js2, _ = run_cli(*args, "--format", "json")
    assert js1 == js2


def test_csv_column_count():
    code, out, _ = run_cli("--n", "8", "--chi", "0.5", "--T", "0.2",
                           "--sweep", "field", "--from", "0.0", "--to", "2.0",
                           "--points", "5", "--outputs", "C,sz,lnZ")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "b,C,sz,lnZ,flags"
    assert len(lines) == 6
    for line in lines[1:]:
        assert len(line.split(",")) == 5


def test_json_round_trip():
    code, out, _ = run_cli("--n", "8", "--chi", "0.5", "--T", "0.2",
                           "--sweep", "temperature", "--from", "0.05",
                           "--to", "1.0", "--points", "4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["method"] == "exact"
    assert doc["metadata"]["params"]["n"] == 8
    assert "version" in doc["metadata"] or "versions" in doc["metadata"]
    assert doc["metadata"]["grid"]["points"] == 4
    assert len(doc["rows"]) == 4
    for row in doc["rows"]:
        for c in doc["columns"]:
            assert c in row
        for name, v in row.items():
            if name != "flags":
                assert v is None or isinstance(v, (int, float))
    # floats survive a json round trip exactly
    again = json.loads(json.dumps(doc))
    assert again == doc


def test_geometric_grid_in_metadata():
    code, out, _ = run_cli("--n", "8", "--chi", "0.5", "--T", "0.2",
                           "--sweep", "field", "--from", "0.1", "--to", "1.6",
                           "--points", "5", "--geometric", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    axis = [row["b"] for row in doc["rows"]]
    ratios = [axis[i + 1] / axis[i] for i in range(len(axis) - 1)]
    assert all(math.isclose(r, ratios[0], rel_tol=1e-9) for r in ratios)


def test_units_recorded():
    code, out, _ = run_cli("--n", "8", "--chi", "0.5", "--vx", "2.5",
                           "--b", "0.3", "--T", "0.2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert "2.5" in doc["metadata"]["unit_convention"]


# ---------------------------------------------------------------------------
# phase map


def test_phase_map_columns_and_marks():
    code, out, _ = run_cli("--n", "60", "--chi", "0.5", "--sweep", "phasemap",
                           "--from", "0.05", "--to", "1.8", "--points", "8",
                           "--method", "mfrpa_asymptotic", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == ["b", "T_L_plus", "T_L_minus", "T_c", "flags"]
    for mark in ("b_c", "b_s", "b_s_finite_n"):
        assert mark in doc["metadata"]
    rows = doc["rows"]
    assert len(rows) == 8
    # T_c positive below b_c, zero at or above
    for row in rows:
        if row["b"] < doc["metadata"]["b_c"]:
            assert row["T_c"] > 0.0
        else:
            assert row["T_c"] == 0.0


def test_critical_temperature_ignores_anisotropy():
    out_a = run_cli("--n", "60", "--chi", "0.3", "--sweep", "phasemap",
                    "--from", "0.1", "--to", "0.9", "--points", "4",
                    "--method", "mfrpa_asymptotic", "--format", "json")[1]
    out_b = run_cli("--n", "60", "--chi", "0.7", "--sweep", "phasemap",
                    "--from", "0.1", "--to", "0.9", "--points", "4",
                    "--method", "mfrpa_asymptotic", "--format", "json")[1]
    tc_a = [r["T_c"] for r in json.loads(out_a)["rows"]]
    tc_b = [r["T_c"] for r in json.loads(out_b)["rows"]]
    assert tc_a == tc_b


def test_phase_map_rejects_unsupported_methods():
    code, _, _ = run_cli("--n", "60", "--chi", "0.5", "--sweep", "phasemap",
                         "--from", "0.1", "--to", "0.9", "--points", "4",
                         "--method", "cspa")
    assert code == 2


# ---------------------------------------------------------------------------
# config file


def test_config_file_mirrors_flags(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({
        "n": 10, "chi": 0.5, "b": 0.4, "T": 0.1, "outputs": "C,nC",
    }))
    _, from_cfg, _ = run_cli("--config", str(cfg))
    _, from_flags, _ = run_cli("--n", "10", "--chi", "0.5", "--b", "0.4",
                               "--T", "0.1", "--outputs", "C,nC")
    assert from_cfg == from_flags


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"n": 10, "chi": 0.5, "b": 0.4, "T": 0.1}))
    _, out, _ = run_cli("--config", str(cfg), "--b", "0.8")
    _, want, _ = run_cli("--n", "10", "--chi", "0.5", "--b", "0.8",
                         "--T", "0.1")
    assert out == want


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"n": 10, "chi": 0.5, "banana": 1}))
    code, _, _ = run_cli("--config", str(cfg))
    assert code == 2


def test_config_rejects_vy_chi_conflict(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"n": 10, "chi": 0.5, "vy": 0.5, "b": 0.1}))
    code, _, _ = run_cli("--config", str(cfg))
    assert code == 2


# ---------------------------------------------------------------------------
# emitters as a library


def test_empty_table_is_header_only():
    text = emit_csv("b", ["C", "nC"], [])
    assert text == "b,C,nC,flags\n"


def test_csv_escapes_nothing_and_joins_flags():
    rows = [ResultRow(axis_value=0.5, values={"C": 0.125, "nC": None},
                      flags=["phase=sb", "missing:nC"])]
    text = emit_csv("b", ["C", "nC"], rows)
    lines = text.strip().splitlines()
    assert lines[1] == "0.5,0.125,,phase=sb;missing:nC"


def test_json_nonfinite_becomes_null():
    rows = [ResultRow(axis_value=1.0, values={"C": math.inf}, flags=["x"])]
    doc = json.loads(emit_json({}, "b", ["C"], rows))
    assert doc["rows"][0]["C"] is None


def test_run_sweep_oracle_guard():
    p = ModelParams.from_chi(40, 0.1, 0.5)
    with pytest.raises(ValueError):
        SweepSpec(method="oracle", params=p, temperature=0.1, axis="b",
                  grid=(0.0, 1.0, 5, False), outputs=("C",))


def test_main_returns_not_raises():
    # library entry point mirrors the subprocess behavior
    assert main(["--n", "8", "--chi", "0.5", "--b", "0.2", "--T", "0.1",
                 "--out", "/dev/null"]) == 0
    assert main(["--n", "100", "--chi", "0.5", "--b", "0.5", "--T", "0.01",
                 "--method", "cspa", "--out", "/dev/null"]) == 3
