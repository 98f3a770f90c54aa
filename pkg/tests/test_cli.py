"""Command line interface: subcommands, config files, and exit codes."""

import math
import os

import numpy as np
import pytest

from emcel.cli import main
from emcel.reports import read_table
from emcel.scale import closed_form_sticky


def run(argv, capsys=None):
    code = main(argv)
    return code


def test_paths_command_writes_table_and_figure(tmp_path, capsys):
    out = tmp_path / "walk.csv"
    code = main(
        [
            "paths",
            "--model",
            "brownian",
            "--h",
            "2^-4",
            "--paths",
            "3",
            "--t",
            "1",
            "--seed",
            "5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    printed = capsys.readouterr().out.splitlines()
    assert str(out) in printed
    assert out.exists()
    png = out.with_suffix(".png")
    assert png.exists()
    meta, cols = read_table(out)
    assert meta["experiment"] == "paths"
    assert set(cols) >= {"path", "k", "t", "state"}
    assert meta["config"]["seed"] == 5
    # 3 paths, 16 steps each -> 3 * 17 rows
    assert len(cols["state"]) == 3 * 17


def test_no_figure_flag_suppresses_the_png(tmp_path):
    out = tmp_path / "walk.csv"
    code = main(
        ["paths", "--model", "brownian", "--h", "0.25", "--out", str(out), "--no-figure"]
    )
    assert code == 0
    assert out.exists()
    assert not out.with_suffix(".png").exists()


def test_strict_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        code = main(
            [
                "paths",
                "--model",
                "sticky",
                "--h",
                "2^-5",
                "--paths",
                "2",
                "--seed",
                "3",
                "--strict",
                "--no-figure",
                "--out",
                str(out),
            ]
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_scalefactor_command_matches_the_closed_form(tmp_path):
    out = tmp_path / "steps.csv"
    code = main(
        [
            "scalefactor",
            "--model",
            "sticky",
            "--theta",
            "0.5",
            "--h",
            "2^-8",
            "--grid",
            "-0.2:0.2:41",
            "--no-figure",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    _, cols = read_table(out)
    want = np.array([closed_form_sticky(2.0**-8, y, 1.0, 0.5) for y in cols["y"]])
    assert np.allclose(cols["step"], want, atol=1e-9)
    assert np.allclose(
        cols["step_over_sqrt_h"], cols["step"] / math.sqrt(2.0**-8), atol=1e-12
    )


def test_cdf_command_reports_reference_values(tmp_path):
    out = tmp_path / "law.csv"
    code = main(
        [
            "cdf",
            "--model",
            "brownian",
            "--h",
            "2^-4",
            "--paths",
            "2000",
            "--grid",
            "-2:2:21",
            "--no-figure",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    _, cols = read_table(out)
    assert set(cols) >= {"x", "cdf_empirical", "cdf_reference"}
    emp = cols["cdf_empirical"]
    assert np.all((emp >= 0.0) & (emp <= 1.0))
    assert np.all(np.diff(emp) >= 0.0)
    assert np.max(np.abs(emp - cols["cdf_reference"])) < 0.1


def test_rate_command_emits_slopes(tmp_path, capsys):
    out = tmp_path / "rate.csv"
    code = main(
        [
            "rate",
            "--model",
            "sticky",
            "--theta",
            "0.5",
            "--h-list",
            "2^-4..2^-6",
            "--paths",
            "2000",
            "--z",
            "0.1",
            "--no-figure",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    meta, cols = read_table(out)
    assert list(cols["h"]) == [2.0**-4, 2.0**-5, 2.0**-6]
    assert {"cdf_estimate", "cdf_abs_error", "mean_estimate", "mean_abs_error"} <= set(cols)
    assert "slope-cdf" in meta and "slope-mean" in meta
    stdout = capsys.readouterr().out
    assert "slope" in stdout


def test_conda_command_tabulates_uniform_budget_error(tmp_path, capsys):
    out = tmp_path / "uniform.csv"
    code = main(
        [
            "conda",
            "--model",
            "gbm",
            "--strategy",
            "weak-euler",
            "--h-list",
            "0.1,0.01",
            "--window",
            "0.5:2",
            "--grid-points",
            "41",
            "--no-figure",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    _, cols = read_table(out)
    assert set(cols) == {"h", "sup_rel_error"}
    assert cols["sup_rel_error"][1] < cols["sup_rel_error"][0]
    assert "worst relative budget deviation" in capsys.readouterr().out


def test_config_file_drives_the_run_and_flags_override(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        """
[model]
name = "sticky"
theta = 0.5

[run]
h = "2^-5"
paths = 2
seed = 3
strict = true
figure = false
"""
    )
    out_a = tmp_path / "a.csv"
    code = main(["--config", str(cfg), "paths", "--out", str(out_a)])
    assert code == 0
    meta, _ = read_table(out_a)
    assert meta["config"]["seed"] == 3
    assert meta["config"]["theta"] == 0.5

    out_b = tmp_path / "b.csv"
    code = main(["--config", str(cfg), "paths", "--seed", "9", "--out", str(out_b)])
    assert code == 0
    meta_b, _ = read_table(out_b)
    assert meta_b["config"]["seed"] == 9


def test_custom_measure_from_config(tmp_path):
    cfg = tmp_path / "custom.toml"
    cfg.write_text(
        """
[space]
left = 0.0
right = 1.0
left_boundary = "reflecting"
right_boundary = "reflecting"

[measure]
density = 2.0
atoms = [[0.5, 1.0]]

[model]
y0 = 0.5

[run]
h = 0.01
paths = 2
figure = false
"""
    )
    out = tmp_path / "custom.csv"
    code = main(["--config", str(cfg), "paths", "--out", str(out)])
    assert code == 0
    _, cols = read_table(out)
    assert {"state", "state_folded"} <= set(cols)
    assert np.all((cols["state_folded"] >= 0.0) & (cols["state_folded"] <= 1.0))


def test_custom_measure_requires_a_start(tmp_path, capsys):
    cfg = tmp_path / "nostart.toml"
    cfg.write_text("[measure]\ndensity = 2.0\n")
    code = main(["--config", str(cfg), "paths", "--out", str(tmp_path / "x.csv")])
    assert code == 1
    assert "y0" in capsys.readouterr().err


def test_empty_custom_measure_is_a_numeric_failure(tmp_path, capsys):
    cfg = tmp_path / "empty.toml"
    cfg.write_text("[measure]\n\n[model]\ny0 = 0.0\n\n[run]\nfigure = false\n")
    code = main(
        ["--config", str(cfg), "scalefactor", "--grid", "-1:1:5", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2
    assert "numeric error" in capsys.readouterr().err


def test_unknown_model_is_an_input_error(tmp_path, capsys):
    code = main(["paths", "--model", "pendulum", "--out", str(tmp_path / "x.csv")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_bad_step_expression_is_an_input_error(tmp_path, capsys):
    code = main(
        ["paths", "--model", "brownian", "--h", "fast", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 1


def test_unknown_config_keys_are_rejected(tmp_path, capsys):
    cfg = tmp_path / "typo.toml"
    cfg.write_text("[run]\nstep = 0.1\n")
    code = main(["--config", str(cfg), "paths", "--out", str(tmp_path / "x.csv")])
    assert code == 1
    assert "step" in capsys.readouterr().err


def test_malformed_toml_is_an_input_error(tmp_path, capsys):
    cfg = tmp_path / "broken.toml"
    cfg.write_text("[run\nh = 0.1\n")
    code = main(["--config", str(cfg), "paths", "--out", str(tmp_path / "x.csv")])
    assert code == 1


def test_strategy_model_mismatch_is_an_input_error(tmp_path, capsys):
    code = main(
        [
            "scalefactor",
            "--model",
            "sticky",
            "--strategy",
            "weak-euler",
            "--out",
            str(tmp_path / "x.csv"),
        ]
    )
    assert code == 1


def test_h_ladder_expansion(tmp_path):
    out = tmp_path / "ladder.csv"
    code = main(
        [
            "rate",
            "--model",
            "brownian",
            "--h-list",
            "2^-3,2^-4",
            "--paths",
            "500",
            "--no-figure",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    _, cols = read_table(out)
    assert list(cols["h"]) == [0.125, 0.0625]
