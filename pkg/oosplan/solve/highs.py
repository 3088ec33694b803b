"""Bundled MILP backend: HiGHS through scipy, speaking the file protocol."""

import logging

import click
import numpy as np

from pathlib import Path

from scipy.optimize import Bounds, LinearConstraint, milp

from oosplan.solve.mps import read_mps
from oosplan.solve.solution import SolveStatus, write_generic

logger = logging.getLogger(__name__)


def solve_file(mps: Path, solution: Path, gap: float, time_limit: float) -> SolveStatus:
    """Solve an MPS file and write the generic solution file."""
    data = read_mps(mps)
    c, matrix, row_lower, row_upper, lower, upper, integrality = data.to_arrays()
    if not data.columns:
        write_generic(solution, SolveStatus.optimal, 0.0, 0.0)
        return SolveStatus.optimal
    constraints = None
    if data.rows:
        constraints = LinearConstraint(matrix, row_lower, row_upper)
    result = milp(
        c,
        integrality=integrality,
        bounds=Bounds(lower, upper),
        constraints=constraints,
        options=dict(mip_rel_gap=gap, time_limit=time_limit, disp=False),
    )
    x = getattr(result, "x", None)
    if result.status == 0:
        status = SolveStatus.optimal
    elif result.status == 1 and x is not None:
        status = SolveStatus.feasible_at_limit
    elif result.status == 2:
        status = SolveStatus.infeasible
    else:
        status = SolveStatus.error
    logger.info("HiGHS: %s", result.message)
    if status in (SolveStatus.optimal, SolveStatus.feasible_at_limit):
        write_generic(
            solution,
            status,
            float(result.fun),
            getattr(result, "mip_gap", None),
            data.columns,
            np.asarray(x, dtype=float),
        )
    else:
        write_generic(solution, status)
    return status


@click.command()
@click.argument("mps", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("solution", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--gap", type=float, default=0.01, show_default=True)
@click.option("--time-limit", type=float, default=7200.0, show_default=True)
def main(mps: Path, solution: Path, gap: float, time_limit: float):
    """Solve MPS with HiGHS and write a generic solution file to SOLUTION"""
    status = solve_file(mps, solution, gap, time_limit)
    click.echo(status.value)
    return 0


if __name__ == "__main__":
    main()
