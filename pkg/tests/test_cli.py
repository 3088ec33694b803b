#!/usr/bin/env python

"""Tests for the `oosplan` command line interface."""

import json

import click
import pytest

from click.testing import CliRunner

import oosplan as package_oosplan
from oosplan import cli
from oosplan import oosplan as api
from oosplan.scenario import bundled, load_scenario, save_scenario

from tests.instances import idle_solver


@pytest.fixture
def cli_runner():
    return CliRunner()


def test_command_line_interface_main(cli_runner):
    """Test the CLI (oosplan)"""
    main_result = cli_runner.invoke(cli.main)
    assert main_result.exit_code == 0
    assert package_oosplan.__doc__ in main_result.output


def test_command_line_interface_version(cli_runner):
    """Test the CLI (oosplan --version)"""
    version_result = cli_runner.invoke(cli.main, ["--version"])
    assert version_result.exit_code == 0
    assert package_oosplan.__version__ in version_result.output


def test_command_line_interface_main_help(cli_runner):
    """Test the CLI (oosplan --help)"""
    help_result = cli_runner.invoke(cli.main, ["--help"])
    assert help_result.exit_code == 0
    for command in ("schedule", "trade", "validate", "export-mps"):
        assert command in help_result.output


def test_validate_bundled(cli_runner):
    result = cli_runner.invoke(cli.main, ["validate", "--scenario", "usecase1"])
    assert result.exit_code == 0
    assert result.output.strip().endswith(": OK")


def test_validate_broken_file(cli_runner, tmp_path):
    scenario = load_scenario(bundled("usecase1"))
    data = scenario.to_dict()
    data["fleet"][0]["design"] = "Z9"
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data))
    result = cli_runner.invoke(cli.main, ["validate", "--scenario", str(path)])
    assert result.exit_code == 1
    assert "fleet[0].design: unknown design Z9" in result.output


def test_unknown_scenario(cli_runner):
    result = cli_runner.invoke(cli.main, ["validate", "--scenario", "nosuch"])
    assert result.exit_code == 2
    assert "neither a file nor a bundled scenario" in result.output


def test_export_mps(cli_runner, tmp_path):
    out = tmp_path / "model"
    result = cli_runner.invoke(
        cli.main,
        ["export-mps", "--scenario", "usecase1", "--fleet-size", "3"]
        + ["--out", str(out)],
    )
    assert result.exit_code == 0
    assert (out / "model.mps").exists()
    assert (out / "names.json").exists()
    assert (out / "network.txt").exists()


def test_log_level_choice(cli_runner):
    result = cli_runner.invoke(cli.main, ["--log-level", "verbose", "validate"])
    assert result.exit_code == 2


@pytest.mark.parametrize(
    "text, seeds",
    [("3", (3,)), ("0..2", (0, 1, 2)), ("5..5", (5,))],
    ids=["single", "range", "singleton range"],
)
def test_seed_range(text, seeds):
    assert cli.SeedRange().convert(text, None, None) == seeds


@pytest.mark.parametrize("text", ["a", "3..1", "-1", "1..x"])
def test_bad_seed_range(text):
    with pytest.raises(click.BadParameter):
        cli.SeedRange().convert(text, None, None)


def test_trade_reports_failed_runs(cli_runner, tmp_path):
    result = cli_runner.invoke(
        cli.main,
        [
            "trade",
            "--scenario",
            "usecase1",
            "--fleet-size",
            "3",
            "--seed",
            "0",
            "--solver-cmd",
            "{python} -c pass {mps} {solution}",
            "--out",
            str(tmp_path / "trade"),
        ],
    )
    assert result.exit_code == 0
    assert "usecase1-3 seed 0 failed" in result.output
    assert (tmp_path / "trade" / "trade_summary.csv").exists()


def test_schedule_reports_errors(cli_runner, tmp_path):
    scenario = load_scenario(bundled("usecase1")).with_fleet_size(3)
    path = tmp_path / "small.json"
    save_scenario(scenario, path)
    result = cli_runner.invoke(
        cli.main,
        [
            "schedule",
            "--scenario",
            str(path),
            "--solver-cmd",
            "no-such-solver-oosplan {mps} {solution}",
            "--out",
            str(tmp_path / "schedule"),
        ],
    )
    assert result.exit_code == 1
    assert "Error: " in result.output


def test_schedule_echoes_violations(cli_runner, tmp_path, monkeypatch):
    run_schedule = package_oosplan.run_schedule

    def idle_run(scenario, out, seed, **options):
        options["solver"] = idle_solver
        return run_schedule(scenario, out, seed, **options)

    monkeypatch.setattr(package_oosplan, "run_schedule", idle_run)
    monkeypatch.setattr(api, "validate_schedule", lambda inputs, values: ["bad"])
    scenario = load_scenario(bundled("usecase1")).with_fleet_size(3)
    path = tmp_path / "small.json"
    save_scenario(scenario, path)
    out = tmp_path / "schedule"
    result = cli_runner.invoke(
        cli.main, ["schedule", "--scenario", str(path), "--out", str(out)]
    )
    assert result.exit_code == 0
    assert f"1 violation(s) written to {out / 'violations.txt'}" in result.output
    assert (out / "violations.txt").read_text() == "bad\n"


@pytest.mark.slow
def test_schedule_with_highs(cli_runner, tmp_path):
    scenario = load_scenario(bundled("usecase1")).with_fleet_size(3)
    path = tmp_path / "small.json"
    save_scenario(scenario, path)
    out = tmp_path / "schedule"
    result = cli_runner.invoke(
        cli.main,
        ["schedule", "--scenario", str(path), "--time-limit", "600"]
        + ["--out", str(out)],
    )
    assert result.exit_code == 0
    assert "usecase1-3: " in result.output
    assert (out / "gantt.csv").exists()
    assert not (out / "violations.txt").exists()
