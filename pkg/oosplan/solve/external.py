"""File-based protocol to any MILP solver that reads MPS."""

import logging
import math
import os
import shlex
import subprocess
import sys
import time

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional

import numpy as np

from oosplan.config import Config, SolutionFormat, config
from oosplan.exceptions import BackendUnavailable, ProtocolError
from oosplan.model.milp import MilpModel
from oosplan.solve.mps import write_mps
from oosplan.solve.solution import (
    PARSERS,
    RawSolution,
    Solution,
    SolveStatus,
    repair_integrality,
)
from oosplan.solve.workspace import solver_workspace

if TYPE_CHECKING:
    from oosplan.model.builder import PlanningInputs

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SolverSettings:
    """
    How the solver process is run.

    :param solver_cmd: Command template with ``{python}``, ``{mps}``,
        ``{solution}``, ``{gap}``, ``{time_limit}`` and ``{seed}`` fields.
    :param solution_format: Format of the solution file the solver writes.
    :param timeout_grace: Seconds the process may outlive its time limit.
    :param work_dir: Parent of the per-run workspaces, None for a temp dir.
    :param keep_files: Keep the workspaces after the run.
    """

    solver_cmd: str
    solution_format: SolutionFormat = SolutionFormat.generic
    timeout_grace: float = 60.0
    work_dir: Optional[Path] = None
    keep_files: bool = False

    @classmethod
    def from_config(cls, settings: Config) -> "SolverSettings":
        return cls(
            solver_cmd=settings.solver_cmd,
            solution_format=settings.output_format,
            timeout_grace=settings.timeout_grace,
            work_dir=settings.work_path,
            keep_files=settings.keep_files,
        )


@dataclass
class SolveRequest:
    model: MilpModel
    gap: float = 0.01
    time_limit: float = 7200.0
    seed: int = 0
    settings: SolverSettings = field(
        default_factory=lambda: SolverSettings.from_config(config)
    )
    inputs: Optional["PlanningInputs"] = None

    def __post_init__(self):
        if not 0.0 <= self.gap < 1.0:
            raise ValueError(f"gap must lie in [0, 1), got {self.gap}")
        if self.time_limit <= 0:
            raise ValueError(f"time limit must be positive, got {self.time_limit}")


def build_command(
    template: str,
    mps: Path,
    solution: Path,
    gap: float,
    time_limit: float,
    seed: int = 0,
) -> List[str]:
    """Fill the solver command template and split it into arguments."""
    command = template.format(
        python=shlex.quote(sys.executable),
        mps=shlex.quote(str(mps)),
        solution=shlex.quote(str(solution)),
        gap=gap,
        time_limit=time_limit,
        seed=seed,
    )
    return shlex.split(command)


def _environment() -> dict:
    env = dict(os.environ)
    package_root = str(Path(__file__).resolve().parents[2])
    paths = [package_root]
    paths += [p for p in env.get("PYTHONPATH", "").split(os.pathsep) if p]
    env["PYTHONPATH"] = os.pathsep.join(paths)
    return env


def solve_external(request: SolveRequest) -> Solution:
    """
    Solve ``request.model`` with the configured solver command.

    The model is written as MPS to a private workspace, the solver is run on
    it and its solution file is parsed. Returned values are checked
    independently of the solver: integer columns are rounded within 1e-6,
    every row is re-evaluated and the reported objective is compared with
    the model's own evaluation. A solution failing a check is demoted to
    ``Error``.

    :raises BackendUnavailable: If the solver executable cannot be started.
    :raises ProtocolError: If the solver writes no readable solution.
    """
    settings = request.settings
    model = request.model
    with solver_workspace(settings.work_dir, settings.keep_files) as workspace:
        mps_path = workspace / "model.mps"
        solution_path = workspace / "model.sol"
        write_mps(model, mps_path)
        command = build_command(
            settings.solver_cmd,
            mps_path,
            solution_path,
            request.gap,
            request.time_limit,
            request.seed,
        )
        logger.info("Running solver: %s", " ".join(command))
        started = time.perf_counter()
        try:
            completed = subprocess.run(
                command,
                capture_output=True,
                text=True,
                cwd=workspace,
                env=_environment(),
                timeout=request.time_limit + settings.timeout_grace,
            )
        except (FileNotFoundError, PermissionError) as e:
            raise BackendUnavailable(f"Cannot run solver {command[0]!r}: {e}")
        except subprocess.TimeoutExpired:
            wall_time = time.perf_counter() - started
            logger.warning("Solver killed after %.1f s", wall_time)
            return Solution(
                SolveStatus.error, wall_time=wall_time, message="solver timed out"
            )
        wall_time = time.perf_counter() - started
        output = completed.stdout + completed.stderr
        logger.debug("Solver output:\n%s", output)

        if not solution_path.exists():
            status_less = settings.solution_format is SolutionFormat.gurobi
            if completed.returncode == 0 and status_less:
                return Solution(SolveStatus.infeasible, wall_time=wall_time)
            raise ProtocolError(
                f"Solver exited with code {completed.returncode} "
                "without writing a solution",
                output,
            )
        text = solution_path.read_text()
        try:
            raw = PARSERS[settings.solution_format](text)
        except (ValueError, IndexError, KeyError) as e:
            raise ProtocolError(f"Unreadable solution file: {e}", output + text)
    solution = verify(raw, model, wall_time, request.time_limit)
    logger.info(
        "Solver finished: %s, objective %s, %.2f s",
        solution.status.value,
        solution.objective,
        wall_time,
    )
    return solution


def verify(
    raw: RawSolution, model: MilpModel, wall_time: float, time_limit: float
) -> Solution:
    """Turn a parsed solution file into a checked :class:`Solution`."""
    status = raw.status
    if status is None:
        if wall_time >= time_limit:
            status = SolveStatus.feasible_at_limit
        else:
            status = SolveStatus.optimal
    if status in (SolveStatus.infeasible, SolveStatus.error):
        return Solution(status, gap=raw.gap, wall_time=wall_time)

    index = {model.column_name(j): j for j in range(model.num_variables)}
    values = np.zeros(model.num_variables)
    for name, value in raw.values.items():
        if name not in index:
            raise ProtocolError(f"Solution names unknown column {name}")
        values[index[name]] = value

    def demote(message: str) -> Solution:
        logger.warning("Solution demoted to Error: %s", message)
        return Solution(
            SolveStatus.error, gap=raw.gap, wall_time=wall_time, message=message
        )

    if raw.objective is not None:
        reported = -raw.objective
        evaluated = model.evaluate(values)
        if abs(reported - evaluated) > RESIDUAL_TOLERANCE * max(1.0, abs(evaluated)):
            return demote(
                f"reported objective {reported!r} but values give {evaluated!r}"
            )
    repaired = repair_integrality(values, model.integrality, RESIDUAL_TOLERANCE)
    if repaired is None:
        return demote("integer columns not within 1e-6 of integrality")
    violations = model.violations(repaired, RESIDUAL_TOLERANCE)
    if violations:
        return demote(f"{len(violations)} violated rows, first: {violations[0]}")
    objective = model.evaluate(repaired)
    if not math.isfinite(objective):
        return demote("non-finite objective")
    return Solution(
        status, objective=objective, values=repaired, gap=raw.gap, wall_time=wall_time
    )
