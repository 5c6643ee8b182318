import json
import math
import os
import subprocess
import sys

import pytest

from pslab.cli import main

ENV = {**os.environ, "SOURCE_DATE_EPOCH": "1700000000"}
ENV.pop("PSLAB_MAX_BITS", None)


def run(*args, env=ENV):
    proc = subprocess.run([sys.executable, "-m", "pslab", *args], capture_output=True,
                          text=True, env=env)
    return proc.returncode, proc.stdout, proc.stderr


def csv_rows(text):
    lines = text.splitlines()
    header = lines[0].split(",")
    body = [dict(zip(header, ln.split(","))) for ln in lines[1:] if not ln.startswith("#")]
    comments = dict(ln[2:].split("=", 1) for ln in lines if ln.startswith("# ") and "=" in ln)
    return header, body, comments


# --- count --------------------------------------------------------------------

def test_count_pairs():
    code, out, _ = run("count", "--alpha", "1.5", "--d", "3")
    header, rows, meta = csv_rows(out)
    assert code == 0
    assert header == ["d", "pair_count", "kap_k", "ratio", "e1", "e2"]
    assert rows[0]["pair_count"] == "4"
    assert meta["version"] == "0.1.0" and meta["timestamp"] == "2023-11-14T22:13:20Z"


def test_count_kap3_json():
    code, out, _ = run("count", "--alpha", "1.5", "--d", "3", "--k", "3", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["record"]["kap_k"] == 3 and rep["k"] == 3


@pytest.mark.parametrize("args", [
    ["count", "--alpha", "2.5", "--d", "3"],
    ["count", "--alpha", "1.5", "--d", "0"],
    ["count", "--alpha", "x", "--d", "3"],
    ["count", "--d", "3"],
    ["sweep", "--alpha", "1.5", "--d-range", "5"],
    ["verify", "--suite", "nope"],
    ["equidist", "--alpha", "1.5", "--d", "1000", "--window", "0:1.5"],
    ["bogus"],
])
def test_config_errors_exit_2(args):
    assert main(args) == 2


def test_precision_exhausted_exit_3_names_inputs():
    code, _, err = run("count", "--alpha", "1.5", "--d", "100000", "--max-bits", "64")
    assert code == 3
    assert "n=" in err and "r=" in err and "d=100000" in err
    code, _, _ = run("count", "--alpha", "1.5", "--d", "100000",
                     env={**ENV, "PSLAB_MAX_BITS": "64"})
    assert code == 3


def test_tail_count_flag():
    code, out, _ = run("count", "--alpha", "1.5", "--d", "3", "--R", "0")
    assert code == 0 and csv_rows(out)[2]["tail_E0"] == "4"


# --- sweep ----------------------------------------------------------------------

def test_sweep_empty_range_header_only():
    code, out, _ = run("sweep", "--alpha", "1.5", "--d-range", "10:9")
    assert code == 0 and out == "d,pair_count,kap_k,ratio,e1,e2\n"


def test_sweep_stride_beyond_range_single_row():
    code, out, _ = run("sweep", "--alpha", "1.5", "--d-range", "10:20:50")
    _, rows, meta = csv_rows(out)
    assert code == 0 and [r["d"] for r in rows] == ["10"]
    assert {"window_mean_ratio", "target_constant", "relative_gap", "config_hash"} <= set(meta)


def test_sweep_csv_layout_and_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", ENV["SOURCE_DATE_EPOCH"])
    args = ["sweep", "--alpha", "1.7", "--k", "3", "--d-range", "500:540"]
    out1 = tmp_path / "a.csv"
    assert main(args + ["--out", str(out1)]) == 0
    code, out2, _ = run(*args, "--workers", "1")
    text = out1.read_text()
    assert text.encode() == out2.encode()
    lines = text.splitlines()
    first_comment = next(i for i, ln in enumerate(lines) if ln.startswith("#"))
    assert all(ln.startswith("#") for ln in lines[first_comment:])
    assert "\r" not in text
    _, rows, _ = csv_rows(text)
    assert [int(r["d"]) for r in rows] == list(range(500, 541))


def test_sweep_workers_do_not_change_output():
    args = ["sweep", "--alpha", "1.5", "--k", "3", "--d-range", "3000:3030"]
    _, a, _ = run(*args, "--workers", "1")
    _, b, _ = run(*args, "--workers", "3")
    # the worker count is part of the config hash; the data rows must agree
    strip = lambda t: [ln for ln in t.splitlines() if not ln.startswith("# config_hash")]
    assert strip(a) == strip(b)


def test_sweep_json_round_trip():
    code, out, _ = run("sweep", "--alpha", "1.5", "--d-range", "100:110", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and len(rep["records"]) == 11
    again = json.loads(json.dumps(rep, sort_keys=True))
    assert again == rep
    ratio = rep["records"][0]["ratio"]
    assert ratio == rep["records"][0]["pair_count"] / 100


def test_sweep_error_terms_column():
    code, out, _ = run("sweep", "--alpha", "1.5", "--d-range", "1000:1001", "--error-terms")
    _, rows, _ = csv_rows(out)
    assert code == 0 and all(r["e1"] != "" and r["e2"] != "" for r in rows)


# --- other subcommands ------------------------------------------------------------------

def test_triplets():
    code, out, _ = run("triplets", "--alpha", "1.5", "--x", "3")
    _, rows, _ = csv_rows(out)
    assert code == 0 and rows[0]["triplet_count"] == "1"


def test_constants():
    code, out, _ = run("constants", "--alpha", "3/2", "--k", "4")
    rep = json.loads(out)
    assert code == 0
    assert math.isclose(rep["limit_constants"]["2"], 1.4621636149762012, rel_tol=1e-12)
    assert math.isclose(rep["limit_constants"]["4"] * 3, rep["limit_constants"]["2"], rel_tol=1e-12)


def test_equidist_report():
    code, out, _ = run("equidist", "--alpha", "1.5", "--d", "1000", "--r", "1",
                       "--harmonics", "1:0,0:1")
    rep = json.loads(out)
    assert code == 0
    assert [(h["h1"], h["h2"]) for h in rep["harmonics"]] == [(1, 0), (0, 1)]
    full = next(r for r in rep["regions"] if r["region"] == "full_square")
    assert full["count_min"] == full["count_max"] == rep["window"]["N"] - rep["window"]["M"]
    for axis in ("x", "y"):
        assert rep["discrepancy"][axis]["exact"] <= rep["discrepancy"][axis]["etk_bound"]


def test_verify_subset_and_failure(monkeypatch, capsys):
    code, out, _ = run("verify", "--suite", "hand", "--suite", "regions")
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and [s["suite"] for s in rep["suites"]] == ["hand", "regions"]

    import pslab.suites as suites
    monkeypatch.setitem(suites._RUNNERS, "hand",
                        lambda **_: suites.SuiteResult("hand", False, 1, "alpha=1.5 N(3): got 5, expected 4"))
    assert main(["verify", "--suite", "hand"]) == 1
    assert "suite hand failed: alpha=1.5 N(3)" in capsys.readouterr().err


def test_verify_default_run_passes():
    code, out, _ = run("verify")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert [s["suite"] for s in rep["suites"]] == ["hand", "oracle", "derivatives",
                                                    "discrepancy", "regions"]
