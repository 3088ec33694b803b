"""Console script for oosplan."""

import functools
import logging
import sys

import click

from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import oosplan

from oosplan.config import LogLevel, SolutionFormat, config
from oosplan.exceptions import OOSError
from oosplan.scenario import Scenario, bundled, bundled_names, load_scenario
from oosplan.solve.external import SolverSettings

logger = logging.getLogger(__name__)


class ScenarioPath(click.ParamType):
    """A scenario file, or the name of a bundled scenario."""

    name = "scenario"

    def convert(self, value, param, ctx) -> Path:
        if isinstance(value, Path):
            return value
        path = Path(value)
        if path.exists():
            return path
        if value in bundled_names():
            return bundled(value)
        self.fail(
            f"{value} is neither a file nor a bundled scenario "
            f"({', '.join(bundled_names())})",
            param,
            ctx,
        )


class SeedRange(click.ParamType):
    """``N`` or an inclusive range ``N..M``."""

    name = "seeds"

    def convert(self, value, param, ctx) -> Tuple[int, ...]:
        if isinstance(value, tuple):
            return value
        try:
            if ".." in value:
                first, last = (int(part) for part in value.split("..", 1))
            else:
                first = last = int(value)
        except ValueError:
            self.fail(f"{value!r} is not N or N..M", param, ctx)
        if first < 0 or last < first:
            self.fail(f"{value!r} is not a nonnegative increasing range", param, ctx)
        return tuple(range(first, last + 1))


def solver_options(command):
    """Options shared by the commands that solve."""
    options = [
        click.option(
            "--gap",
            type=click.FloatRange(min=0.0, max=1.0, max_open=True),
            default=config.gap,
            show_default=True,
            help="Relative MIP gap at which the solver stops.",
        ),
        click.option(
            "--time-limit",
            type=click.FloatRange(min=0.0, min_open=True),
            default=config.time_limit,
            show_default=True,
            help="Solver time limit per planning horizon, seconds.",
        ),
        click.option(
            "--solver-cmd",
            type=str,
            default=config.solver_cmd,
            show_default=True,
            help="Solver command template with {mps}, {solution}, {gap}, "
            "{time_limit}, {seed} and {python} fields.",
        ),
        click.option(
            "--solution-format",
            type=click.Choice([fmt.value for fmt in SolutionFormat]),
            default=config.solution_format,
            show_default=True,
            help="Format of the solution file the solver writes.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def scenario_options(command):
    options = [
        click.option(
            "--scenario",
            "scenario_path",
            type=ScenarioPath(),
            required=True,
            help="Scenario file or bundled scenario name.",
        ),
        click.option(
            "--fleet-size",
            type=click.IntRange(min=0),
            default=None,
            help="Resize the customer fleet of the scenario.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def reports_errors(command):
    """Turn library errors into ``Error: ...`` on stderr and exit status 1."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except OOSError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(1)

    return wrapper


def _solve_settings(
    gap: float, time_limit: float, solver_cmd: str, solution_format: str
) -> dict:
    settings = SolverSettings(
        solver_cmd=solver_cmd,
        solution_format=SolutionFormat(solution_format),
        timeout_grace=config.timeout_grace,
        work_dir=config.work_path,
        keep_files=config.keep_files,
    )
    return dict(gap=gap, time_limit=time_limit, settings=settings)


@click.group()
@click.option(
    "--log-level",
    type=click.Choice([level.value for level in LogLevel], case_sensitive=False),
    default=config.log_level,
    show_default=True,
    help="Logging level.",
)
@click.version_option()
@click.pass_context
def main(ctx: click.core.Context, log_level: str):
    """oosplan schedules on-orbit servicing infrastructures and trades architectures"""

    ctx.ensure_object(dict)
    config.logging_level = log_level
    logging.basicConfig(
        level=config.log_level, format="%(levelname)s %(name)s: %(message)s"
    )
    ctx.obj["config"] = config
    return 0


@main.command()
@scenario_options
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@solver_options
@click.option(
    "--out",
    type=click.Path(file_okay=False, writable=True, path_type=Path),
    default=Path("schedule"),
    show_default=True,
    help="Directory for itineraries, Gantt data and the objective breakdown.",
)
@reports_errors
def schedule(
    scenario_path: Path,
    fleet_size: Optional[int],
    seed: int,
    gap: float,
    time_limit: float,
    solver_cmd: str,
    solution_format: str,
    out: Path,
):
    """Optimize the first planning horizon of a scenario

    Every need arising within the planning horizon is known up front.
    """
    scenario = load_scenario(scenario_path, fleet_size)
    report = oosplan.run_schedule(
        scenario,
        out,
        seed,
        **_solve_settings(gap, time_limit, solver_cmd, solution_format),
    )
    breakdown = report.breakdown
    click.echo(f"{scenario.name}: {report.status}")
    click.echo(f"  profit   {breakdown.total:,.2f}")
    click.echo(f"  revenue  {breakdown.revenue:,.2f}")
    click.echo(f"  served   {len(report.served)}/{len(report.services)}")
    if report.violations:
        path = out / "violations.txt"
        click.echo(f"{len(report.violations)} violation(s) written to {path}")
    click.echo(f"Reports written to {out}")


@main.command()
@click.option(
    "--scenario",
    "scenario_paths",
    type=ScenarioPath(),
    multiple=True,
    required=True,
    help="Architecture scenario; repeat to compare several.",
)
@click.option(
    "--fleet-size",
    "fleet_sizes",
    type=click.IntRange(min=0),
    multiple=True,
    help="Customer fleet size; repeat to trade over several demand levels.",
)
@click.option("--seeds", type=SeedRange(), default=None, help="Seeds N or N..M.")
@click.option(
    "--seed",
    "extra_seeds",
    type=click.IntRange(min=0),
    multiple=True,
    help="Single seed; may be repeated.",
)
@click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=config.workers,
    show_default=True,
    help="Runs executed at once.",
)
@solver_options
@click.option(
    "--out",
    type=click.Path(file_okay=False, writable=True, path_type=Path),
    default=Path("trade"),
    show_default=True,
    help="Directory for value series and summaries.",
)
@reports_errors
def trade(
    scenario_paths: Tuple[Path, ...],
    fleet_sizes: Tuple[int, ...],
    seeds: Optional[Tuple[int, ...]],
    extra_seeds: Tuple[int, ...],
    workers: int,
    gap: float,
    time_limit: float,
    solver_cmd: str,
    solution_format: str,
    out: Path,
):
    """Run the rolling-horizon loop for every architecture and seed"""
    scenarios = _scenarios(scenario_paths, fleet_sizes)
    chosen: Optional[List[int]] = None
    if seeds is not None or extra_seeds:
        chosen = sorted(set(seeds or ()) | set(extra_seeds))
    result = oosplan.run_trade(
        scenarios,
        out,
        chosen,
        workers,
        **_solve_settings(gap, time_limit, solver_cmd, solution_format),
    )
    if not result.results and not result.failures:
        click.echo("Warning: no runs (no seeds given)", err=True)
    for name in result.architectures():
        runs = result.by_architecture(name)
        final = result.mean_series(name)[-1].value if runs else float("nan")
        click.echo(f"{name}: {len(runs)} run(s), mean final value {final:,.2f}")
    for name, seed, error in result.failures:
        click.echo(f"{name} seed {seed} failed: {error}", err=True)
    click.echo(f"Reports written to {out}")


def _scenarios(paths: Iterable[Path], fleet_sizes: Tuple[int, ...]) -> List[Scenario]:
    scenarios = []
    for path in paths:
        scenario = load_scenario(path)
        if fleet_sizes:
            scenarios += [scenario.with_fleet_size(size) for size in fleet_sizes]
        else:
            scenarios.append(scenario)
    return scenarios


@main.command()
@scenario_options
@reports_errors
def validate(scenario_path: Path, fleet_size: Optional[int]):
    """Check a scenario file and report every problem found"""
    problems = oosplan.validate_scenario(scenario_path, fleet_size)
    errors = [p for p in problems if not p.startswith("warning: ")]
    for problem in problems:
        click.echo(problem, err=True)
    if errors:
        click.echo(f"{scenario_path}: {len(errors)} problem(s)", err=True)
        sys.exit(1)
    click.echo(f"{scenario_path}: OK")


@main.command(name="export-mps")
@scenario_options
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option(
    "--out",
    type=click.Path(file_okay=False, writable=True, path_type=Path),
    default=Path("model"),
    show_default=True,
    help="Directory for model.mps, names.json and network.txt.",
)
@reports_errors
def export_mps(scenario_path: Path, fleet_size: Optional[int], seed: int, out: Path):
    """Write the first planning-horizon model as MPS without solving it"""
    scenario = load_scenario(scenario_path, fleet_size)
    mps = oosplan.export_mps(scenario, out, seed)
    click.echo(f"Model written to {mps}")


if __name__ == "__main__":
    sys.exit(main())  # pragma: no cover
