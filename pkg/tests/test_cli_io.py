"""CLI: config handling, overrides, modes, exit codes, determinism."""

import json
import numpy as np
import pytest

from tvjko import GridSpec, GridDensity
from tvjko.grid_density import write_density_csv, read_density_csv
from tvjko.cli_io import main, config_from_dict, apply_overrides, ConfigError


def _write_input(tmp_path, n=128):
    g = GridSpec(-2.0, 2.0, n)
    vals = np.maximum(1.0 - np.abs(g.centers), 0.0)
    path = tmp_path / "rho0.csv"
    write_density_csv(path, GridDensity.normalized(g, vals))
    return str(path)


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown key"):
        config_from_dict({"mode": "step", "tau": 0.1, "bogus": 1})
    with pytest.raises(ConfigError, match="solver"):
        config_from_dict({"mode": "step", "tau": 0.1,
                          "io": {"input_path": "x"},
                          "solver": {"mystery": 2}})


def test_config_requires_mode_fields():
    with pytest.raises(ConfigError, match="requires tau"):
        config_from_dict({"mode": "step", "io": {"input_path": "x"}})
    with pytest.raises(ConfigError, match="requires horizon"):
        config_from_dict({"mode": "flow", "tau": 0.1,
                          "io": {"input_path": "x"}})
    with pytest.raises(ConfigError, match="radial.dimension"):
        config_from_dict({"mode": "radial_step", "tau": 0.1,
                          "io": {"input_path": "x"}})


def test_overrides_parse_dotted_paths_and_json():
    raw = {"mode": "step", "tau": 0.1}
    apply_overrides(raw, ["solver.el_tolerance=1e-8", "io.input_path=a.csv",
                          "seed=3"])
    assert raw["solver"]["el_tolerance"] == 1e-8
    assert raw["io"]["input_path"] == "a.csv"
    assert raw["seed"] == 3
    with pytest.raises(ConfigError):
        apply_overrides({}, ["no_equals_sign"])


def test_step_mode_writes_outputs(tmp_path):
    inp = _write_input(tmp_path)
    out = tmp_path / "out"
    code = main(["step", "--override", "tau=0.02",
                 "--override", f"io.input_path={inp}",
                 "--override", f"io.output_dir={out}"])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["summary"]["converged"] is True
    assert manifest["mode"] == "step"
    rho1 = read_density_csv(out / "rho1.csv")
    assert np.sum(rho1.values) * rho1.grid.dx == pytest.approx(1.0)
    assert set(manifest["files"]) == {"certificate_cells.csv",
                                      "certificate_z.csv", "rho1.csv",
                                      "transport.csv"}


def test_mode_mismatch_is_input_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"mode": "flow", "tau": 0.1}')
    code = main(["step", "--config", str(cfg)])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("tvjko-error: code=1")
    assert err.count("\n") == 1


def test_negative_density_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,rho\n0.5,-1.0\n1.5,2.0\n")
    code = main(["step", "--override", "tau=0.1",
                 "--override", f"io.input_path={bad}",
                 "--override", f"io.output_dir={tmp_path}"])
    assert code == 1
    assert "row 2" in capsys.readouterr().err


def test_starved_solver_is_exit_two(tmp_path, capsys):
    inp = _write_input(tmp_path, n=64)
    code = main(["step", "--override", "tau=0.02",
                 "--override", "solver.max_outer_iter=1",
                 "--override", f"io.input_path={inp}",
                 "--override", f"io.output_dir={tmp_path / 'o2'}"])
    assert code == 2
    assert "code=2" in capsys.readouterr().err
    # outputs still written for post-mortem inspection
    manifest = json.loads((tmp_path / "o2" / "manifest.json").read_text())
    assert manifest["summary"]["converged"] is False


def test_validate_uniform_passes(tmp_path):
    code = main(["validate_uniform",
                 "--override", 'grid={"left": -4, "right": 4, "n_cells": 256}',
                 "--override", f"io.output_dir={tmp_path}"])
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["summary"]["passed"] is True


def test_oracle_check_and_negative_control(tmp_path, capsys):
    code = main(["oracle_check", "--override", "oracle.n_instances=4",
                 "--override", f"io.output_dir={tmp_path / 'ok'}"])
    assert code == 0
    report = (tmp_path / "ok" / "oracle_report.csv").read_text()
    assert "fail" not in report

    code = main(["oracle_check", "--override", "oracle.n_instances=4",
                 "--override", "oracle.tolerance_scale=0",
                 "--override", f"io.output_dir={tmp_path / 'zero'}"])
    assert code == 3
    assert "code=3" in capsys.readouterr().err


def test_identical_runs_are_byte_identical(tmp_path):
    inp = _write_input(tmp_path)
    argv = ["step", "--override", "tau=0.02",
            "--override", f"io.input_path={inp}",
            "--override", f"io.output_dir={tmp_path / 'd'}"]
    assert main(argv) == 0
    first = {p.name: p.read_bytes()
             for p in (tmp_path / "d").iterdir()}
    assert main(argv) == 0
    second = {p.name: p.read_bytes()
              for p in (tmp_path / "d").iterdir()}
    assert first == second
