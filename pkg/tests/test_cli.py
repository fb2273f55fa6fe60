import json
import subprocess
import sys

import pytest

from krylov_ssh.cli import main
from krylov_ssh.runner import ConfigError, ExperimentConfig, initial_state, recipe_config, run_dynamics


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_evolve_writes_series_and_manifest(tmp_path):
    out = tmp_path / "evo"
    code = main(["evolve", "--gamma", "0.5,1.2", "--cells", "6", "--initial", "localized:3",
                 "--tmax", "5", "--out", str(out)])
    assert code == 0
    man = _manifest(out)
    assert man["sweep"] == "dynamics"
    assert len(man["config_hash"]) == 64
    assert man["files"] and all(len(v) == 64 for v in man["files"].values())
    header = (out / sorted(man["files"])[0]).read_text().splitlines()[0]
    assert header.startswith("t,")


def test_spectrum_subcommand(tmp_path):
    out = tmp_path / "spec"
    assert main(["spectrum", "--gamma", "0.5,2.4", "--cells", "10", "--boundary", "periodic",
                 "--out", str(out)]) == 0
    rows = _manifest(out)["rows"]
    assert {r["phase"] for r in rows} == {"pt_symmetric", "pt_broken"}


def test_kcop_and_qfi_subcommands(tmp_path):
    assert main(["kcop", "--gamma", "1.2", "--cells", "8", "--subsystems", "1,2,3", "--tmax", "4",
                 "--out", str(tmp_path / "k")]) == 0
    man = _manifest(tmp_path / "k")
    assert man["ell_to_ell_k"] == {"1": 2, "2": 4, "3": 6}
    assert "g1.2_L8" in man["scaling"]
    assert main(["qfi", "--gamma", "0,1", "--cells", "4", "--initial", "localized:3", "--tmax", "4",
                 "--out", str(tmp_path / "q")]) == 0
    assert (tmp_path / "q" / "qfi_averaged.csv").exists()


@pytest.mark.parametrize("argv", [
    ["evolve", "--gamma", "-1"],
    ["evolve", "--cells", "4", "--initial", "localized:30"],
    ["evolve", "--tmax", "1", "--dt", "0"],
    ["evolve", "--initial", "blob:3"],
])
def test_config_errors_exit_1(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 1


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"gamma_list": [0.5], "colour": "blue"}))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / "missing.json")


def test_failed_points_exit_2(tmp_path):
    # a 30-cell subsystem does not fit in the 40-dimensional Krylov space
    code = main(["kcop", "--gamma", "0.5", "--cells", "20", "--subsystems", "2,30", "--tmax", "2",
                 "--out", str(tmp_path)])
    assert code == 2
    rows = _manifest(tmp_path)["rows"]
    assert sum(1 for r in rows if r.get("error")) == 1


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"gamma_list": [0.5], "cells_list": [5], "initial": "pair:4,5", "t_max": 3.0}))
    assert main(["sweep", "--kind", "dynamics", "--config", str(cfg), "--gamma", "1.4",
                 "--out", str(tmp_path / "o")]) == 0
    assert _manifest(tmp_path / "o")["config"]["gamma_list"] == [1.4]


def test_deterministic_outputs(tmp_path):
    hashes = []
    for name in ("a", "b"):
        cfg = ExperimentConfig(gamma_list=[1.4], cells_list=[6], initial="localized:5", t_max=5.0,
                               output_dir=str(tmp_path / name))
        hashes.append(run_dynamics(cfg).manifest["files"])
    assert hashes[0] == hashes[1]


def test_recipes_validate():
    for fig in ("fig1", "fig2", "fig3", "fig6", "fig7", "fig10", "fig11", "appC", "appD", "appE"):
        kind, cfg = recipe_config(fig, "/tmp/unused")
        cfg.validate()
    with pytest.raises(ConfigError):
        recipe_config("fig99")


def test_initial_state_parser():
    assert initial_state("pair:1,2", 4)[0] == pytest.approx(2**-0.5)
    with pytest.raises(ConfigError):
        initial_state("localized", 4)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "krylov_ssh", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "reproduce" in res.stdout
