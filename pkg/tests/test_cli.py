"""End-to-end command-line behavior, run through fresh interpreters."""

import json
import subprocess
import sys

import pytest

CMD = [sys.executable, "-m", "erw"]


def run(*args, **kwargs):
    return subprocess.run(
        CMD + list(args), capture_output=True, text=True, timeout=300, **kwargs
    )


def test_no_command_prints_usage_and_fails():
    proc = run()
    assert proc.returncode == 1
    assert "usage" in proc.stderr.lower()


def test_unknown_flag_exits_one():
    proc = run("presets", "--bogus")
    assert proc.returncode == 1


def test_presets_table_and_json():
    table = run("presets")
    assert table.returncode == 0
    for name in ("hexagonal", "brick_wall", "zd3", "example6"):
        assert name in table.stdout
    as_json = run("presets", "--json")
    payload = json.loads(as_json.stdout)
    names = {entry["name"] for entry in payload["presets"]}
    assert {"triangular", "hexagonal", "example5"} <= names
    hexagonal = next(e for e in payload["presets"] if e["name"] == "hexagonal")
    assert hexagonal["pc_u"] == pytest.approx(2 / 3)
    assert hexagonal["walk_type"] == "type2"


def test_validate_preset_ok():
    proc = run("validate", "--preset", "hexagonal")
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["ok"] is True


def test_validate_file_document(tmp_path):
    doc = {
        "name": "custom",
        "walk_type": "type1",
        "u": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
    }
    path = tmp_path / "lattice.json"
    path.write_text(json.dumps(doc))
    proc = run("validate", "--file", str(path))
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["name"] == "custom"


def test_validate_degenerate_structure_exits_two(tmp_path):
    doc = {"name": "flat", "walk_type": "type1",
           "u": [[1.0, 0.0], [-1.0, 0.0], [2.0, 0.0]]}
    path = tmp_path / "flat.json"
    path.write_text(json.dumps(doc))
    proc = run("validate", "--file", str(path))
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["ok"] is False


def test_source_flags_are_exclusive(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{}")
    both = run("theory", "--preset", "zd1", "--file", str(path), "-p", "0.5")
    neither = run("theory", "-p", "0.5")
    assert both.returncode == 1
    assert neither.returncode == 1


def test_unknown_preset_exits_one():
    proc = run("theory", "--preset", "nosuch", "-p", "0.5")
    assert proc.returncode == 1
    assert "nosuch" in proc.stderr


def test_theory_reports_closed_forms():
    proc = run("theory", "--preset", "hexagonal", "-p", "0.5")
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["regime"] == "diffusive"
    assert payload["a"] == pytest.approx(0.25)
    assert payload["C_a"] == pytest.approx(2.0)
    sigma_u = payload["sigma_u"]
    assert sigma_u[0][0] == pytest.approx(0.5, abs=1e-10)
    assert sigma_u[1][1] == pytest.approx(0.5, abs=1e-10)
    assert sigma_u[0][1] == pytest.approx(0.0, abs=1e-10)
    ks = {(s["s"], s["t"]): s["matrix"] for s in payload["kernel_samples"]}
    assert ks[(1.0, 1.0)][0][0] == pytest.approx(2.0)


def test_theory_super_includes_limit_moments():
    payload = json.loads(run("theory", "--preset", "zd1", "-p", "0.8").stdout)
    assert payload["regime"] == "superdiffusive"
    assert payload["C_a"] is None  # diverges above criticality
    assert "super_moments" in payload
    assert payload["super_moments"]["second_moment"][0][0] == pytest.approx(
        5.445622105291682, rel=1e-12
    )


def test_theory_requires_p_in_open_interval():
    assert run("theory", "--preset", "zd1", "-p", "1.0").returncode == 1
    assert run("theory", "--preset", "zd1", "-p", "0").returncode == 1


def test_simulate_csv_layout_and_reproducibility():
    args = ("simulate", "--preset", "brick_wall", "-p", "0.6", "-n", "9",
            "--seed", "4", "--replicates", "3")
    first = run(*args)
    assert first.returncode == 0
    lines = first.stdout.strip().split("\n")
    assert lines[0] == "run_id,step,x0,x1"
    assert len(lines) == 1 + 3 * 10
    assert lines[1] == "0,0,0,0"
    again = run(*args)
    assert again.stdout == first.stdout


def test_simulate_single_replicate_matches_library(tmp_path):
    out = tmp_path / "trajectory.csv"
    proc = run("simulate", "--preset", "zd1", "-p", "0.7", "-n", "6",
               "--seed", "11", "-o", str(out))
    assert proc.returncode == 0
    import numpy as np

    from erw import lattice, walk
    from erw.rng import replicate_seed

    ref = walk.simulate(lattice.preset("zd1"), 0.7, 6,
                        replicate_seed(11, 0))
    rows = out.read_text().strip().split("\n")[1:]
    values = [float(r.split(",")[2]) for r in rows]
    assert np.allclose(values, ref[:, 0], atol=0.0)


def test_urn_csv():
    proc = run("urn", "-m", "3", "-p", "0.5", "-n", "6", "--seed", "2",
               "--color", "1")
    assert proc.returncode == 0
    lines = proc.stdout.strip().split("\n")
    assert lines[0] == "epoch,c0,c1,c2"
    assert lines[1] == "1,0,1,0"
    assert len(lines) == 7
    last = [int(x) for x in lines[-1].split(",")]
    assert sum(last[1:]) == 6


def test_verify_lln_writes_report(tmp_path):
    out = tmp_path / "report.json"
    proc = run("verify", "lln", "--preset", "zd1", "-p", "0.7", "-n", "200",
               "-N", "200", "--seed", "5", "-o", str(out))
    assert proc.returncode == 0
    assert proc.stdout.startswith("PASS lln")
    payload = json.loads(out.read_text())
    assert payload["pass"] is True
    assert payload["params"]["command"] == "verify lln"
    assert payload["checks"][0]["check"] == "lln"


def test_verify_equiv_runs_exact():
    proc = run("verify", "equiv", "--preset", "brick_wall", "-p", "0.3",
               "--depth", "2")
    assert proc.returncode == 0
    assert proc.stdout.startswith("PASS equiv")


def test_verify_fclt_regime_gate():
    proc = run("verify", "fclt", "--preset", "zd1", "-p", "0.9", "-n", "100",
               "-N", "1000")
    assert proc.returncode == 1
    assert "regime" in proc.stderr


def test_verify_failure_exits_two(tmp_path):
    out = tmp_path / "fail.json"
    proc = run("verify", "fclt", "--preset", "zd1", "-p", "0.5", "-n", "200",
               "-N", "1000", "--seed", "5", "--tol-cov", "1e-9", "-o", str(out))
    assert proc.returncode == 2
    assert proc.stdout.startswith("FAIL fclt")
    assert json.loads(out.read_text())["pass"] is False


def test_verify_capacity_exits_three():
    proc = run("verify", "equiv", "--preset", "example6", "-p", "0.5",
               "--depth", "6")
    assert proc.returncode == 3


def test_config_file_fills_defaults_and_flags_win(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"preset": "zd1", "p": 0.7, "n": 5, "seed": 4}))
    from_config = run("simulate", "--config", str(config))
    assert from_config.returncode == 0
    assert len(from_config.stdout.strip().split("\n")) == 7
    overridden = run("simulate", "--config", str(config), "-n", "2")
    assert len(overridden.stdout.strip().split("\n")) == 4


def test_config_rejects_unknown_keys(tmp_path):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"preset": "zd1", "horizon": 5}))
    proc = run("simulate", "--config", str(config), "-p", "0.5", "-n", "2")
    assert proc.returncode == 1
    assert "horizon" in proc.stderr


def test_verify_reports_identical_across_thread_counts(tmp_path):
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"t{threads}.json"
        proc = run("verify", "lln", "--preset", "hexagonal", "-p", "0.5",
                   "-n", "150", "-N", "300", "--seed", "6",
                   "--threads", threads, "-o", str(out))
        assert proc.returncode == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_help_is_available_everywhere():
    assert run("--help").returncode == 0
    for sub in ("presets", "validate", "theory", "simulate", "urn", "verify"):
        proc = run(sub, "--help")
        assert proc.returncode == 0
        assert "--" in proc.stdout
