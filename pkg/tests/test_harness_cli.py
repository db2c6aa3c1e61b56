"""Scenario harness and command-line contract."""

import json
import subprocess
import sys

import pytest

from jetcocycles.harness import ConfigError, ScenarioConfig, run_scenario


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "jetcocycles.cli", *args],
        capture_output=True, text=True,
    )
    return proc


def quick_config(**kw):
    base = dict(dim=1, samples=2, seed=3, suites=("moyal", "lift"))
    base.update(kw)
    return ScenarioConfig(**base).validate()


# -- configuration -----------------------------------------------------------


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        ScenarioConfig(dim=0).validate()
    with pytest.raises(ConfigError):
        ScenarioConfig(jet_order=3).validate()
    with pytest.raises(ConfigError):
        ScenarioConfig(backend="symbolic").validate()
    with pytest.raises(ConfigError):
        ScenarioConfig(suites=()).validate()
    with pytest.raises(ConfigError):
        ScenarioConfig(suites=("nope",)).validate()


def test_scenario_file_round_trip(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({
        "dim": 2, "backend": "exact", "seed": 9, "samples": 2,
        "suites": ["moyal"],
        "maps": [["polynomial_perturbation", {"eps": "1/8"}],
                 ["affine", {"A": [[1, 1], [0, 1]], "b": ["1/4", "0"]}],
                 ["projective", {}]],
    }))
    cfg = ScenarioConfig.from_file(str(path))
    assert cfg.dim == 2 and cfg.seed == 9
    from fractions import Fraction
    assert cfg.maps[1][1]["b"] == [Fraction(1, 4), 0]
    report = run_scenario(cfg)
    assert report["summary"]["pass"]


def test_scenario_file_unknown_field(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dimension": 2}))
    with pytest.raises(ConfigError):
        ScenarioConfig.from_file(str(path))


# -- report contract -----------------------------------------------------------


def test_report_shape_and_uniqueness():
    report = run_scenario(quick_config())
    assert report["schema"] == 1
    ids = [(c["suite"], c["case_id"]) for c in report["cases"]]
    assert len(ids) == len(set(ids)), "every configured case appears exactly once"
    assert report["summary"]["total"] == len(ids)
    assert set(report["config"]["suites"]) == {"moyal", "lift"}
    for c in report["cases"]:
        assert set(c) == {"suite", "case_id", "maps", "point", "residual",
                          "pass", "error", "witness"}


def test_report_deterministic_excluding_timing():
    a = run_scenario(quick_config())
    b = run_scenario(quick_config())
    a.pop("timing"), b.pop("timing")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_reports_differ_across_seeds():
    a = run_scenario(quick_config(seed=1))
    b = run_scenario(quick_config(seed=2))
    pa = [c["point"] for c in a["cases"]]
    pb = [c["point"] for c in b["cases"]]
    assert pa != pb


# -- CLI ------------------------------------------------------------------------


def test_cli_list_contains_catalog():
    proc = run_cli("list")
    assert proc.returncode == 0
    assert "moebius" in proc.stdout
    assert "projective" in proc.stdout
    assert "(n+1) x (n+1) matrix" in proc.stdout


def test_cli_list_stable_output():
    a = run_cli("list")
    b = run_cli("list")
    assert a.stdout == b.stdout


def test_cli_verify_exits_zero_and_writes_report(tmp_path):
    out = tmp_path / "report.json"
    proc = run_cli("verify", "--suite", "moyal", "--dim", "1", "--seed", "7",
                   "--samples", "2", "--json", str(out))
    assert proc.returncode == 0, proc.stdout + proc.stderr
    report = json.loads(out.read_text())
    assert report["schema"] == 1
    assert report["summary"]["pass"]


def test_cli_verify_reports_are_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    args = ("verify", "--suite", "lift", "--suite", "moyal", "--dim", "1",
            "--seed", "5", "--samples", "2")
    assert run_cli(*args, "--json", str(out1)).returncode == 0
    assert run_cli(*args, "--json", str(out2)).returncode == 0
    a = json.loads(out1.read_text())
    b = json.loads(out2.read_text())
    a.pop("timing"), b.pop("timing")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_cli_empty_suites_is_usage_error(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text(json.dumps({"suites": []}))
    proc = run_cli("verify", str(path))
    assert proc.returncode == 2
    assert "suite" in proc.stderr


def test_cli_unknown_suite_is_usage_error():
    proc = run_cli("verify", "--suite", "bogus")
    assert proc.returncode == 2


def test_cli_operator_suite_residuals_literally_zero(tmp_path):
    out = tmp_path / "op.json"
    proc = run_cli("verify", "--suite", "operator_L", "--dim", "1",
                   "--backend", "exact", "--seed", "7", "--samples", "2",
                   "--json", str(out))
    assert proc.returncode == 0
    report = json.loads(out.read_text())
    for case in report["cases"]:
        if case["witness"]:
            continue
        assert case["residual"] == "0", case


def test_cli_degree_lowering_dim2(tmp_path):
    out = tmp_path / "deg.json"
    proc = run_cli("verify", "--suite", "degree_lowering", "--dim", "2",
                   "--seed", "3", "--samples", "3", "--json", str(out))
    assert proc.returncode == 0
    report = json.loads(out.read_text())
    cases = [c for c in report["cases"] if c["suite"] == "degree_lowering"]
    assert cases and all(c["pass"] for c in cases)


def test_cli_float_backend_passes():
    proc = run_cli("verify", "--backend", "float", "--tol", "1e-8",
                   "--suite", "operator_L", "--suite", "classical_cocycles",
                   "--dim", "1", "--samples", "2", "--seed", "6")
    assert proc.returncode == 0, proc.stdout + proc.stderr


def test_cli_failing_tolerance_exits_one():
    # an absurdly tight tolerance trips float-backend comparisons
    proc = run_cli("verify", "--backend", "float", "--tol", "1e-300",
                   "--suite", "classical_cocycles", "--dim", "1",
                   "--samples", "2", "--seed", "2")
    assert proc.returncode == 1


def test_cli_scenario_file_overrides_flags(tmp_path):
    path = tmp_path / "scn.json"
    path.write_text(json.dumps({"dim": 2, "suites": ["moyal"], "samples": 2, "seed": 4}))
    out = tmp_path / "r.json"
    proc = run_cli("verify", str(path), "--dim", "1", "--suite", "lift",
                   "--json", str(out))
    assert proc.returncode == 0
    report = json.loads(out.read_text())
    assert report["config"]["dim"] == 2
    assert report["config"]["suites"] == ["moyal"]


def test_cli_demo_outputs():
    flat = run_cli("demo", "flat-cubic")
    assert flat.returncode == 0
    assert "-6*xi0" in flat.stdout

    aff = run_cli("demo", "affine")
    assert aff.returncode == 0
    assert "zero operator" in aff.stdout

    moe = run_cli("demo", "moebius")
    assert moe.returncode == 0
    assert "d^2/dxi0^2" in moe.stdout and "zero operator" not in moe.stdout


def test_cli_unknown_demo():
    proc = run_cli("demo", "nope")
    assert proc.returncode == 2
