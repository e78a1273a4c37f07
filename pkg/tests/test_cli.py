import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import SMALL
from pilotwave.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_OUTPUT, main
from pilotwave.files import (
    _toml_value,
    parse_config,
    parse_config_text,
    read_density_csv,
    read_pgm,
    read_stats_csv,
    verify_manifest,
)
from pilotwave.scenarios import SCENARIO_IDS, resolve


def write_config(path, scenario, **values):
    lines = [f'scenario = "{scenario}"'] + [f"{k} = {_toml_value(v)}" for k, v in values.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_list_scenarios(capsys):
    assert main(["--list-scenarios"]) == EXIT_OK
    assert capsys.readouterr().out.split() == list(SCENARIO_IDS)


@pytest.mark.parametrize("name", SCENARIO_IDS)
def test_print_defaults_round_trips(name, capsys, tmp_path):
    assert main(["--print-defaults", name]) == EXIT_OK
    text = capsys.readouterr().out
    assert parse_config_text(text) == resolve(name)
    p = tmp_path / "c.toml"
    p.write_text(text)
    assert parse_config(p).values == resolve(name).values


def test_print_defaults_unknown(capsys):
    assert main(["--print-defaults", "nope"]) == EXIT_CONFIG
    assert "unknown scenario" in capsys.readouterr().err


def test_no_command_is_a_usage_error(capsys):
    assert main([]) == EXIT_CONFIG


def test_run_writes_outputs_and_manifest(tmp_path):
    cfg = write_config(tmp_path / "c60.toml", "c60_double_slit", **{**SMALL["c60_double_slit"], "n_trajectories": 24})
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_OK
    man = json.loads((out / "manifest.json").read_text())
    assert man["scenario"] == "c60_double_slit" and man["seed"] == 0
    assert verify_manifest(out) == []
    listed = {f["path"] for f in man["files"]}
    on_disk = {p.relative_to(out).as_posix() for p in out.rglob("*") if p.is_file()} - {"manifest.json"}
    assert listed == on_disk
    frames = sorted((out / "frames").glob("*.csv"))
    assert len([f for f in frames if f.name != "index.csv"]) == 15
    assert len(list((out / "frames").glob("*.pgm"))) == 15
    traj = np.genfromtxt(out / "trajectories.csv", delimiter=",", names=True)
    assert len(np.unique(traj["index"])) == 24
    stats = read_stats_csv(out / "stats.csv")
    assert stats["figure_axis_crossings"][0] == 0
    axes, rho, names = read_density_csv(frames[0])
    img = read_pgm(frames[0].with_suffix(".pgm"))
    assert img.shape == (1, rho.size) and img.max() == 255
    # the echoed config reproduces the run
    assert parse_config(out / "config.toml") == parse_config(cfg)


def test_manifest_detects_tampering(tmp_path):
    cfg = write_config(tmp_path / "a.toml", "asym_interference", **SMALL["asym_interference"])
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_OK
    with open(out / "stats.csv", "a") as fh:
        fh.write("x,1,\n")
    assert verify_manifest(out) == ["stats.csv"]


def test_non_empty_output_needs_force(tmp_path, capsys):
    cfg = write_config(tmp_path / "a.toml", "asym_interference", **SMALL["asym_interference"])
    out = tmp_path / "out"
    out.mkdir()
    (out / "keep.txt").write_text("x")
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_OUTPUT
    assert "--force" in capsys.readouterr().err
    assert not (out / "manifest.json").exists()
    assert main(["run", str(cfg), "--out", str(out), "--force"]) == EXIT_OK
    assert verify_manifest(out) == []


def test_output_path_that_is_a_file(tmp_path):
    cfg = write_config(tmp_path / "a.toml", "asym_interference")
    (tmp_path / "f").write_text("")
    assert main(["run", str(cfg), "--out", str(tmp_path / "f")]) == EXIT_OUTPUT


def test_seed_override_and_determinism(tmp_path):
    cfg = write_config(tmp_path / "a.toml", "asym_interference", **SMALL["asym_interference"])
    for name, seed in (("x", 3), ("y", 3), ("z", 4)):
        assert main(["run", str(cfg), "--out", str(tmp_path / name), "--seed", str(seed)]) == EXIT_OK
    x, y, z = ((tmp_path / n / "stats.csv").read_bytes() for n in "xyz")
    assert x == y and x != z
    assert json.loads((tmp_path / "x" / "manifest.json").read_text())["seed"] == 3


def test_parse_error_reports_line_and_column(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('scenario = "two_body"\nm1 = = 2\n')
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_CONFIG
    err = json.loads((out / "error.json").read_text())
    assert err["exit_code"] == EXIT_CONFIG and err["error"] == "ConfigParseError"
    assert err["line"] == 2 and err["column"] >= 1
    assert not (out / "manifest.json").exists()


@pytest.mark.parametrize(
    "text,match",
    [
        ("m1 = 1.0\n", "missing key 'scenario'"),
        ('scenario = 3\n', "must be a string"),
        ('scenario = "two_body"\nschema_version = 2\n', "schema_version"),
        ('scenario = "two_body"\n[extra]\na = 1\n', "tables"),
        ('scenario = "two_body"\nm1 = -1.0\n', "lower bound m1 > 0"),
        ('scenario = "two_body"\nwhat = 1\n', "what"),
    ],
)
def test_schema_errors_exit_2(tmp_path, text, match):
    cfg = tmp_path / "c.toml"
    cfg.write_text(text)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_CONFIG
    assert match in json.loads((out / "error.json").read_text())["message"]


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "none.toml"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_numerical_failure_exits_3(tmp_path):
    cfg = write_config(tmp_path / "e.toml", "epr_b", n_points=64, n_ensemble=10)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_NUMERIC
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "ResolutionError" and err["exit_code"] == EXIT_NUMERIC


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "pilotwave.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("pilotwave ")
