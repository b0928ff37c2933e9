"""Tests for the batch CLI: dispatch, formats, exit codes, determinism."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from lyapspec.cli import (
    EXIT_BUDGET,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    EXIT_USAGE,
    main,
)
from lyapspec.cocycle_io import cocycle_from_dict, cocycle_to_dict, load_cocycle
from lyapspec.pressure import pressure
from lyapspec.words import OneStepCocycle

DIAG_PAIR = {
    "d": 2,
    "k": 2,
    "matrices": [[[4.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 4.0]]],
}
TYPICAL_PAIR = {
    "d": 2,
    "k": 2,
    "matrices": [[[2.0, 0.0], [0.0, 0.5]], [[1.0, 1.0], [-1.0, 1.0]]],
}


@pytest.fixture
def diag_file(tmp_path):
    path = tmp_path / "diag.json"
    path.write_text(json.dumps(DIAG_PAIR))
    return str(path)


@pytest.fixture
def typical_file(tmp_path):
    path = tmp_path / "typical.json"
    path.write_text(json.dumps(TYPICAL_PAIR))
    return str(path)


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_pressure_record_matches_library(diag_file, capsys):
    code, out, _ = run_cli(
        ["pressure", "--cocycle", diag_file, "--q", "1,0", "--depth", "10"], capsys
    )
    assert code == EXIT_OK
    rec = json.loads(out)
    C = cocycle_from_dict(DIAG_PAIR)
    est = pressure(C, [1.0, 0.0], 10)
    assert rec["value"] == est.value
    assert rec["gradient"] == list(est.gradient)
    assert rec["n"] == 10 and rec["q"] == [1.0, 0.0]
    # q = (1,0) steps are nonnegative, so the sweep gives an upper bound
    assert rec["upper"] == est.value and rec["lower"] is None


def test_pressure_value_matches_binomial_reference(diag_file, capsys):
    code, out, _ = run_cli(
        ["pressure", "--cocycle", diag_file, "--q", "1,0", "--depth", "10"], capsys
    )
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(1.6768, abs=5e-4)


def test_pressure_csv_layout(diag_file, capsys):
    code, out, _ = run_cli(
        [
            "pressure", "--cocycle", diag_file, "--q", "1,0",
            "--depths", "4,8,12", "--format", "csv",
        ],
        capsys,
    )
    assert code == EXIT_OK
    lines = out.strip().split("\n")
    assert lines[0] == "q_1,q_2,n,value,grad_1,grad_2,upper,lower,gap"
    assert len(lines) == 4
    # brackets are empty except on the deepest row
    for row in lines[1:3]:
        assert row.endswith(",,,")
    final = lines[3].split(",")
    assert final[2] == "12"
    assert final[6] != "" and final[8] != ""
    # CSV floats round-trip exactly
    assert float(final[3]) == pressure(cocycle_from_dict(DIAG_PAIR), [1, 0], 12).value


def test_json_round_trip_bit_exact(diag_file, capsys):
    code, out, _ = run_cli(
        ["pressure", "--cocycle", diag_file, "--q", "0.3,-1.7", "--depth", "9"],
        capsys,
    )
    assert code == EXIT_OK
    rec = json.loads(out)
    assert json.loads(json.dumps(rec)) == rec


def test_output_file(diag_file, tmp_path, capsys):
    dest = tmp_path / "out.jsonl"
    code, out, _ = run_cli(
        [
            "pressure", "--cocycle", diag_file, "--q", "1,0",
            "--depth", "6", "--output", str(dest),
        ],
        capsys,
    )
    assert code == EXIT_OK and out == ""
    assert json.loads(dest.read_text())["n"] == 6


def _run_subprocess(args, env=None):
    import os

    merged = dict(os.environ)
    if env:
        merged.update(env)
    return subprocess.run(
        [sys.executable, "-m", "lyapspec.cli", *args],
        capture_output=True,
        env=merged,
    )


def test_deterministic_byte_identical_across_worker_counts(diag_file):
    outs = []
    for threads in ("1", "2", "8"):
        r = _run_subprocess(
            [
                "pressure", "--cocycle", diag_file, "--q", "1.3,-0.4",
                "--depth", "10", "--threads", threads, "--deterministic",
            ]
        )
        assert r.returncode == EXIT_OK
        outs.append(r.stdout)
    assert outs[0] == outs[1] == outs[2]


def test_nondeterministic_parallel_close(diag_file):
    r1 = _run_subprocess(
        ["pressure", "--cocycle", diag_file, "--q", "1.3,-0.4", "--depth", "10",
         "--threads", "1"]
    )
    r8 = _run_subprocess(
        ["pressure", "--cocycle", diag_file, "--q", "1.3,-0.4", "--depth", "10",
         "--threads", "8"]
    )
    v1 = json.loads(r1.stdout)["value"]
    v8 = json.loads(r8.stdout)["value"]
    assert abs(v1 - v8) <= 1e-10


def test_spectrum_alpha_repeatable(diag_file, capsys):
    code, out, _ = run_cli(
        [
            "spectrum", "--cocycle", diag_file,
            "--alpha", "1.2,0.18629436111989057",
            "--alpha", "1.0,0.3862943611198906",
            "--depth", "10",
        ],
        capsys,
    )
    assert code == EXIT_OK
    recs = [json.loads(line) for line in out.strip().split("\n")]
    assert len(recs) == 2
    assert all(r["status"] == "interior" for r in recs)


def test_spectrum_infeasible_still_exit_zero(diag_file, capsys):
    code, out, _ = run_cli(
        ["spectrum", "--cocycle", diag_file, "--alpha", "10,10"], capsys
    )
    assert code == EXIT_OK
    assert json.loads(out)["status"] == "infeasible"


def test_spectrum_csv_header(diag_file, capsys):
    code, out, _ = run_cli(
        [
            "spectrum", "--cocycle", diag_file, "--alpha", "1.0,0.3862943611198906",
            "--depth", "8", "--format", "csv",
        ],
        capsys,
    )
    assert code == EXIT_OK
    assert out.split("\n")[0] == "alpha_1,alpha_2,value,status,q_1,q_2"


def test_lyapunov_default_uniform(diag_file, capsys):
    code, out, _ = run_cli(
        ["lyapunov", "--cocycle", diag_file, "--depth", "8"], capsys
    )
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["measure"]["probs"] == [0.5, 0.5]
    assert rec["entropy"] == pytest.approx(math.log(2.0), abs=1e-12)
    assert rec["exponents"][0] >= rec["exponents"][1]


def test_lyapunov_csv(diag_file, capsys):
    code, out, _ = run_cli(
        ["lyapunov", "--cocycle", diag_file, "--depth", "6", "--measure",
         "0.25,0.75", "--format", "csv"],
        capsys,
    )
    assert code == EXIT_OK
    lines = out.strip().split("\n")
    assert lines[0] == "n,chi_1,chi_2"
    assert lines[1].split(",")[0] == "6"


def test_omega_csv_vertices(diag_file, capsys):
    code, out, _ = run_cli(
        ["omega", "--cocycle", diag_file, "--depth", "8", "--probe-count", "8",
         "--format", "csv"],
        capsys,
    )
    assert code == EXIT_OK
    lines = out.strip().split("\n")
    assert lines[0] == "alpha_1,alpha_2"
    verts = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    # hull endpoints of the diagonal pair: (log2, log2) and (log4, 0)
    l2, l4 = math.log(2.0), math.log(4.0)
    d_lo = np.abs(verts - [l2, l2]).sum(axis=1).min()
    d_hi = np.abs(verts - [l4, 0.0]).sum(axis=1).min()
    assert d_lo < 0.05 and d_hi < 0.05


def test_check_typical_search_success(typical_file, capsys):
    code, out, _ = run_cli(
        ["check-typical", "--cocycle", typical_file, "--max-period", "2",
         "--max-bridge", "3"],
        capsys,
    )
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["mode"] == "search" and rec["verdict"] == "typical"
    assert rec["found"] and rec["report"]["overall"] == "typical"


def test_check_typical_not_found_exit_four(diag_file, capsys):
    code, out, _ = run_cli(
        ["check-typical", "--cocycle", diag_file, "--max-period", "2",
         "--max-bridge", "2"],
        capsys,
    )
    assert code == EXIT_INCONCLUSIVE
    rec = json.loads(out)
    assert rec["verdict"] == "inconclusive" and not rec["found"]


def test_check_dominated_verdict_and_exit(tmp_path, capsys):
    single = {"d": 2, "k": 1, "matrices": [[[4.0, 0.0], [0.0, 1.0]]]}
    path = tmp_path / "single.json"
    path.write_text(json.dumps(single))
    code, out, _ = run_cli(
        ["check-dominated", "--cocycle", str(path), "--index", "1"], capsys
    )
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["verdict"] == "dominated"
    assert rec["decay_rate"] == pytest.approx(-math.log(4.0), abs=1e-6)


def test_check_dominated_inconclusive_exit_four(tmp_path, capsys):
    # decay too shallow to certify, too steep to rule out
    weak = {"d": 2, "k": 1, "matrices": [[[1.0005, 0.0], [0.0, 1.0]]]}
    path = tmp_path / "weak.json"
    path.write_text(json.dumps(weak))
    code, out, _ = run_cli(
        ["check-dominated", "--cocycle", str(path), "--index", "1"], capsys
    )
    assert code == EXIT_INCONCLUSIVE
    assert json.loads(out)["verdict"] == "inconclusive"


def test_crosscheck_fields(diag_file, capsys):
    code, out, _ = run_cli(
        ["crosscheck", "--cocycle", diag_file, "--q", "1,0", "--depth", "8"],
        capsys,
    )
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["family"] == "bernoulli"
    assert rec["gap"] >= -1e-8
    assert rec["best"] <= rec["pressure"] + 1e-8


def test_csv_rejected_for_reports(typical_file, capsys):
    code, _, err = run_cli(
        ["check-typical", "--cocycle", typical_file, "--format", "csv"], capsys
    )
    assert code == EXIT_USAGE
    assert "CSV" in err


def test_budget_exit_code(diag_file, capsys, monkeypatch):
    monkeypatch.setenv("COCYCLE_BUDGET", "1024")
    code, _, err = run_cli(
        ["pressure", "--cocycle", diag_file, "--q", "1,0", "--depth", "12"], capsys
    )
    assert code == EXIT_BUDGET
    assert "budget" in err


def test_missing_file_exit_two(capsys):
    code, _, err = run_cli(
        ["pressure", "--cocycle", "/nonexistent.json", "--q", "1,0"], capsys
    )
    assert code == EXIT_USAGE and err != ""


def test_singular_generator_exit_two(tmp_path, capsys):
    bad = {"d": 2, "k": 1, "matrices": [[[1.0, 0.0], [2.0, 0.0]]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, err = run_cli(
        ["pressure", "--cocycle", str(path), "--q", "1,0"], capsys
    )
    assert code == EXIT_USAGE
    assert "generator 1 is singular" in err


def test_wrong_q_length_exit_two(diag_file, capsys):
    code, _, err = run_cli(
        ["pressure", "--cocycle", diag_file, "--q", "1,0,0"], capsys
    )
    assert code == EXIT_USAGE and "length" in err


def test_depth_and_depths_conflict(diag_file, capsys):
    code, _, err = run_cli(
        ["pressure", "--cocycle", diag_file, "--q", "1,0", "--depth", "4",
         "--depths", "4,8"],
        capsys,
    )
    assert code == EXIT_USAGE and "not both" in err


def test_load_cocycle_errors(tmp_path):
    p = tmp_path / "ragged.json"
    p.write_text('{"d": 2, "k": 1, "matrices": [[[1.0, 0.0], [0.0]]]}')
    with pytest.raises(ValueError):
        load_cocycle(p)
    p = tmp_path / "broken.json"
    p.write_text('{"d": 2, "k": 1,')
    with pytest.raises(ValueError, match="line"):
        load_cocycle(p)
    p = tmp_path / "missing.json"
    p.write_text('{"d": 2, "matrices": []}')
    with pytest.raises(ValueError, match="missing"):
        load_cocycle(p)
    p = tmp_path / "shape.json"
    p.write_text('{"d": 3, "k": 1, "matrices": [[[1.0, 0.0], [0.0, 1.0]]]}')
    with pytest.raises(ValueError, match="shape"):
        load_cocycle(p)


def test_cocycle_dict_round_trip():
    C = cocycle_from_dict(DIAG_PAIR)
    assert isinstance(C, OneStepCocycle)
    again = cocycle_from_dict(cocycle_to_dict(C))
    assert np.array_equal(again.generators, C.generators)
