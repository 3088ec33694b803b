"""Solver boundary: MPS files, external solvers and the exhaustive oracle."""

from oosplan.solve.exhaustive import solve_exhaustive
from oosplan.solve.external import (
    SolverSettings,
    SolveRequest,
    build_command,
    solve_external,
)
from oosplan.solve.mps import MpsData, format_number, read_mps, write_mps
from oosplan.solve.solution import Solution, SolveStatus

__all__ = [
    "MpsData",
    "Solution",
    "SolveRequest",
    "SolveStatus",
    "SolverSettings",
    "build_command",
    "format_number",
    "read_mps",
    "solve_exhaustive",
    "solve_external",
    "write_mps",
]
