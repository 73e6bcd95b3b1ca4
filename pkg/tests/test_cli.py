import json
import subprocess
import sys

import pytest

from coopsim.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main
from coopsim.scenarios import BUILTIN_NAMES, builtin_text


def test_list(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in out] == list(BUILTIN_NAMES)


def test_validate_ok(tmp_path, capsys):
    p = tmp_path / "coop1.yaml"
    p.write_text(builtin_text("coop1"))
    assert main(["validate", str(p)]) == EXIT_OK
    assert "ok" in capsys.readouterr().out


def test_validate_dangling_lane(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(builtin_text("pipeline4").replace("lane: A\n  s: 10.0", "lane: L9\n  s: 10.0"))
    assert main(["validate", str(p)]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "agents[0].lane" in err and "L9" in err


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "absent.yaml")]) == EXIT_INVALID


@pytest.mark.parametrize("argv", [[], ["fly"], ["run"], ["run", "--scenario", "coop1", "--drop", "2"],
                                  ["run", "--scenario", "coop1", "--episodes", "0"],
                                  ["run", "--scenario", "coop1", "--participants", "everyone"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_INVALID
    assert "usage" in capsys.readouterr().err


def test_unknown_scenario(capsys):
    assert main(["run", "--scenario", "nope", "--episodes", "1"]) == EXIT_INVALID
    assert "nope" in capsys.readouterr().err


def test_runtime_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = main(["run", "--scenario", "pipeline4", "--episodes", "1", "--out", str(blocker / "out")])
    assert code == EXIT_RUNTIME
    assert "error" in capsys.readouterr().err


def test_bad_latency_is_usage_error(tmp_path, capsys):
    code = main(["run", "--scenario", "pipeline4", "--episodes", "1", "--latency", "gauss:1",
                 "--out", str(tmp_path)])
    assert code == EXIT_INVALID and "latency" in capsys.readouterr().err


def test_run_coop1_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--scenario", "coop1", "--episodes", "10", "--seed", "7", "--out", str(out)]) == EXIT_OK
    assert sorted(p.name for p in out.glob("episode_*.csv")) == sorted(f"episode_{i}.csv" for i in range(10))
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seeds"] == list(range(7, 17)) and summary["n_total"] == 10
    assert (out / "detections.svg").exists()


def test_run_echoes_channel_overrides(tmp_path):
    out = tmp_path / "out"
    argv = ["run", "--scenario", "coop1", "--episodes", "1", "--latency", "det:0.3", "--drop", "0.3",
            "--out", str(out)]
    assert main(argv) == EXIT_OK
    cfg = json.loads((out / "summary.json").read_text())["config"]
    assert cfg["latency"] == "det:0.3" and cfg["drop_rate"] == 0.3
    assert cfg["overrides"] == {"latency": "det:0.3", "drop": 0.3}


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("COOPSIM_OUT", str(tmp_path / "env"))
    assert main(["run", "--scenario", "pipeline4", "--episodes", "1"]) == EXIT_OK
    assert (tmp_path / "env" / "summary.json").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "coopsim.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "coop8" in proc.stdout
