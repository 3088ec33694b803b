"""Solver results and the solution file formats they arrive in."""

import math

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np

from oosplan.config import SolutionFormat


class SolveStatus(Enum):
    """Outcome of a solve"""

    optimal = "Optimal"
    feasible_at_limit = "FeasibleAtLimit"
    infeasible = "Infeasible"
    error = "Error"


@dataclass
class Solution:
    """
    Verified solution of a planning model.

    :param status: Solve outcome.
    :param objective: Profit of ``values``, $; NaN without a solution.
    :param values: Value of every model column, integers rounded.
    :param gap: Relative gap reported by the solver, when known.
    :param wall_time: Seconds spent solving.
    :param message: Why the solution was demoted, or the solver's words.
    """

    status: SolveStatus
    objective: float = math.nan
    values: Optional[np.ndarray] = None
    gap: Optional[float] = None
    wall_time: float = 0.0
    message: str = ""

    @property
    def is_feasible(self) -> bool:
        return self.status in (SolveStatus.optimal, SolveStatus.feasible_at_limit)


@dataclass
class RawSolution:
    """Solution file content before verification."""

    status: Optional[SolveStatus] = None
    objective: Optional[float] = None
    gap: Optional[float] = None
    values: Dict[str, float] = field(default_factory=dict)


def parse_generic(text: str) -> RawSolution:
    """
    Parse ``# status``, ``# objective`` and ``# gap`` headers followed by one
    ``NAME VALUE`` line per column.
    """
    raw = RawSolution()
    for line in text.splitlines():
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "#":
            if len(tokens) < 3:
                continue
            key, value = tokens[1], tokens[2]
            if key == "status":
                raw.status = SolveStatus(value)
            elif key == "objective":
                raw.objective = float(value)
            elif key == "gap":
                raw.gap = None if value == "none" else float(value)
            continue
        name, value = tokens
        raw.values[name] = float(value)
    if raw.status is None:
        raise ValueError("missing '# status' header")
    return raw


def parse_gurobi(text: str) -> RawSolution:
    """Parse a Gurobi ``.sol`` file; it carries no status."""
    raw = RawSolution()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "Objective value" in line:
                raw.objective = float(line.split("=")[1])
            continue
        name, value = line.split()
        raw.values[name] = float(value)
    return raw


def parse_cbc(text: str) -> RawSolution:
    """
    Parse a CBC solution file.

    The first line states the status and objective; each following line is
    ``index name value reduced_cost``, possibly prefixed by ``**`` when the
    value is infeasible. Columns at zero may be omitted.
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty CBC solution")
    header = lines[0].strip()
    raw = RawSolution()
    if "objective value" in header:
        raw.objective = float(header.rsplit("objective value", 1)[1].split()[0])
    if header.startswith("Optimal"):
        raw.status = SolveStatus.optimal
    elif "nfeasible" in header:
        raw.status = SolveStatus.infeasible
    elif header.startswith("Stopped"):
        raw.status = SolveStatus.feasible_at_limit
    else:
        raw.status = SolveStatus.error
    for line in lines[1:]:
        tokens = line.replace("**", " ").split()
        raw.values[tokens[1]] = float(tokens[2])
    if raw.status is SolveStatus.feasible_at_limit and not raw.values:
        raw.status = SolveStatus.error
    return raw


PARSERS: Dict[SolutionFormat, Callable[[str], RawSolution]] = {
    SolutionFormat.generic: parse_generic,
    SolutionFormat.gurobi: parse_gurobi,
    SolutionFormat.cbc: parse_cbc,
}


def write_generic(
    file_path: Path,
    status: SolveStatus,
    objective: Optional[float] = None,
    gap: Optional[float] = None,
    names: Sequence[str] = (),
    values: Optional[Iterable[float]] = None,
) -> None:
    """Write a solution in the generic ``NAME VALUE`` format."""
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w") as solution_file:
        solution_file.write(f"# status {status.value}\n")
        if objective is not None:
            solution_file.write(f"# objective {objective!r}\n")
        solution_file.write(f"# gap {'none' if gap is None else repr(gap)}\n")
        if values is not None:
            for name, value in zip(names, values):
                solution_file.write(f"{name} {float(value)!r}\n")


def repair_integrality(
    values: np.ndarray, integrality: np.ndarray, tolerance: float = 1e-6
) -> Optional[np.ndarray]:
    """
    Round integer columns lying within ``tolerance`` of an integer.

    :returns: The repaired values, or None if any integer column is further
        from integrality.
    """
    repaired = np.array(values, dtype=float)
    mask = integrality.astype(bool)
    rounded = np.round(repaired[mask])
    if np.any(np.abs(repaired[mask] - rounded) > tolerance):
        return None
    repaired[mask] = rounded
    return repaired
