#!/usr/bin/env python

"""Tests for the `oosplan.solve` external solver protocol and HiGHS backend."""

import sys

from pathlib import Path

import numpy as np
import pytest

from click.testing import CliRunner

from oosplan.config import DEFAULT_SOLVER_CMD, SolutionFormat
from oosplan.exceptions import BackendUnavailable, ProtocolError
from oosplan.model import Assign, MilpModel, Sense, assemble
from oosplan.report import validate_schedule
from oosplan.solve import SolverSettings, SolveRequest, build_command, solve_external
from oosplan.solve import highs
from oosplan.solve.external import verify
from oosplan.solve.mps import write_mps
from oosplan.solve.solution import (
    RawSolution,
    Solution,
    SolveStatus,
    parse_cbc,
    parse_generic,
    parse_gurobi,
    repair_integrality,
)

from tests.instances import (
    depot,
    grid,
    highs_settings,
    idle_values,
    need,
    planning_inputs,
    servicer,
)

CUSTOMERS = {"A": -160.0, "B": -150.0}

WRITES_WRONG_OBJECTIVE = (
    "{python} -c \"import sys; open(sys.argv[2], 'w')"
    ".write('# status Optimal\\n# objective 123\\n')\" {mps} {solution}"
)
WRITES_GARBAGE = (
    "{python} -c \"import sys; open(sys.argv[2], 'w').write('junk')\" {mps} {solution}"
)
WRITES_NOTHING = "{python} -c pass {mps} {solution}"


def inspection_inputs():
    time_grid = grid(30)
    return planning_inputs(
        [(servicer("S", ["T2"]), "A", {"bipropellant": 500.0})],
        CUSTOMERS,
        [need("i1", "B", "Inspection", 0, time_grid)],
        time_grid,
    )


def solve(model, tmp_path, inputs=None, **kwargs) -> Solution:
    settings = kwargs.pop("settings", highs_settings(tmp_path))
    request = SolveRequest(
        model, gap=0.0, time_limit=60.0, settings=settings, inputs=inputs, **kwargs
    )
    return solve_external(request)


def infeasible_model() -> MilpModel:
    model = MilpModel()
    x = model.add_variable("x", upper=1.0)
    model.add_constraint("demand", {x: 1.0}, Sense.ge, 2.0)
    return model


def test_highs_serves_the_inspection(tmp_path):
    inputs = inspection_inputs()
    model = assemble(inputs)
    solution = solve(model, tmp_path, inputs)
    assert solution.status is SolveStatus.optimal
    # revenue less 4 days of delay and 30 days of operations
    assert solution.objective == pytest.approx(10e6 - 4 * 5000.0 - 30 * 13000.0)
    assert model.violations(solution.values) == []
    values = model.values_by_index(solution.values)
    assert values[Assign("i1", "S", 4)] == 1.0
    assert validate_schedule(inputs, values) == []


def test_solution_dominates_declining_everything(tmp_path):
    inputs = inspection_inputs()
    model = assemble(inputs)
    solution = solve(model, tmp_path, inputs)
    assert solution.objective >= model.evaluate(idle_values(inputs, model))


def test_zero_demand_costs_only_operations(tmp_path):
    fleet = [
        (servicer("S", ["T1"]), "A", {"bipropellant": 500.0}),
        (depot(), "DEPOT", {"monopropellant": 100.0}),
    ]
    inputs = planning_inputs(fleet, CUSTOMERS, time_grid=grid(30))
    solution = solve(assemble(inputs), tmp_path, inputs)
    assert solution.objective == pytest.approx(-2 * 13000.0 * 30, rel=1e-12)


def test_depot_out_of_stationkeeping_propellant(tmp_path):
    fleet = [(depot(), "DEPOT", {"monopropellant": 1.0})]
    inputs = planning_inputs(fleet, CUSTOMERS, time_grid=grid(30))
    solution = solve(assemble(inputs), tmp_path, inputs)
    assert solution.status is SolveStatus.infeasible
    assert solution.values is None
    assert not solution.is_feasible


def test_infeasible_model(tmp_path):
    solution = solve(infeasible_model(), tmp_path)
    assert solution.status is SolveStatus.infeasible


def test_missing_backend(tmp_path):
    settings = SolverSettings(
        solver_cmd="no-such-solver-oosplan {mps} {solution}", work_dir=tmp_path
    )
    with pytest.raises(BackendUnavailable):
        solve(infeasible_model(), tmp_path, settings=settings)


@pytest.mark.parametrize(
    "solver_cmd", [WRITES_GARBAGE, WRITES_NOTHING], ids=["garbage", "nothing"]
)
def test_protocol_errors(solver_cmd, tmp_path):
    settings = SolverSettings(solver_cmd=solver_cmd, work_dir=tmp_path)
    with pytest.raises(ProtocolError):
        solve(infeasible_model(), tmp_path, settings=settings)


def test_wrong_objective_is_demoted(tmp_path):
    inputs = inspection_inputs()
    settings = SolverSettings(solver_cmd=WRITES_WRONG_OBJECTIVE, work_dir=tmp_path)
    solution = solve(assemble(inputs), tmp_path, inputs, settings=settings)
    assert solution.status is SolveStatus.error
    assert "objective" in solution.message


def test_workspace_kept_on_request(tmp_path):
    settings = SolverSettings(
        solver_cmd=DEFAULT_SOLVER_CMD, work_dir=tmp_path, keep_files=True
    )
    solve(infeasible_model(), tmp_path, settings=settings)
    (workspace,) = tmp_path.glob("oosplan-*")
    assert (workspace / "model.mps").exists()
    assert (workspace / "model.sol").exists()


def test_workspace_removed_by_default(tmp_path):
    solve(infeasible_model(), tmp_path)
    assert not list(tmp_path.glob("oosplan-*"))


def test_build_command():
    folder = Path("/tmp/solver runs")
    command = build_command(
        DEFAULT_SOLVER_CMD, folder / "model.mps", folder / "model.sol", 0.01, 60.0
    )
    assert command[0] == sys.executable
    assert command[1:4] == ["-m", "oosplan.solve.highs", "/tmp/solver runs/model.mps"]
    assert command[4] == "/tmp/solver runs/model.sol"
    assert command[5:] == ["--gap", "0.01", "--time-limit", "60.0"]


def test_highs_command_line(tmp_path):
    model = MilpModel()
    x = model.add_variable("x", upper=4.0)
    model.add_objective_term("revenue", x, 2.0)
    mps = tmp_path / "model.mps"
    solution = tmp_path / "model.sol"
    write_mps(model, mps)
    result = CliRunner().invoke(highs.main, [str(mps), str(solution), "--gap", "0"])
    assert result.exit_code == 0
    assert result.output.strip() == "Optimal"
    raw = parse_generic(solution.read_text())
    assert raw.status is SolveStatus.optimal
    assert raw.objective == pytest.approx(-8.0)
    assert raw.values == {"C0000001": pytest.approx(4.0)}


def test_highs_without_columns(tmp_path):
    mps = tmp_path / "empty.mps"
    write_mps(MilpModel(), mps)
    status = highs.solve_file(mps, tmp_path / "empty.sol", 0.01, 10.0)
    assert status is SolveStatus.optimal


def test_parse_generic():
    raw = parse_generic(
        "# status FeasibleAtLimit\n# objective -1.5\n# gap 0.02\n\nC0000001 1.0\n"
    )
    assert raw.status is SolveStatus.feasible_at_limit
    assert raw.objective == -1.5
    assert raw.gap == 0.02
    assert raw.values == {"C0000001": 1.0}
    assert parse_generic("# status Infeasible\n# gap none\n").gap is None
    with pytest.raises(ValueError):
        parse_generic("C0000001 1.0\n")


def test_parse_gurobi():
    raw = parse_gurobi(
        "# Solution for model OOSPLAN\n# Objective value = -12.5\nC0000001 1\n"
        "C0000002 0.5\n"
    )
    assert raw.status is None
    assert raw.objective == -12.5
    assert raw.values == {"C0000001": 1.0, "C0000002": 0.5}


@pytest.mark.parametrize(
    "text, status, values",
    [
        (
            "Optimal - objective value -9590000.00000000\n"
            "      0 C0000001               1                       0\n"
            "**    1 C0000002             0.5                       0\n",
            SolveStatus.optimal,
            {"C0000001": 1.0, "C0000002": 0.5},
        ),
        ("Infeasible - objective value 0.00000000\n", SolveStatus.infeasible, {}),
        ("Stopped on time - objective value -5\n", SolveStatus.error, {}),
    ],
    ids=["optimal", "infeasible", "stopped without values"],
)
def test_parse_cbc(text, status, values):
    raw = parse_cbc(text)
    assert raw.status is status
    assert raw.values == values


def test_repair_integrality():
    integrality = np.array([1, 0], dtype=np.uint8)
    repaired = repair_integrality(np.array([0.9999999, 0.5]), integrality)
    np.testing.assert_array_equal(repaired, [1.0, 0.5])
    assert repair_integrality(np.array([0.6, 0.5]), integrality) is None


@pytest.fixture
def capped() -> MilpModel:
    model = MilpModel()
    x = model.add_variable("x", upper=4.0)
    y = model.add_variable("y", upper=1.0, integer=True)
    model.add_constraint("cap", {x: 1.0, y: -4.0}, Sense.le)
    model.add_objective_term("revenue", x, 1.0)
    return model


def test_verify_without_status(capped):
    raw = RawSolution(values={"C0000001": 4.0, "C0000002": 1.0})
    at_limit = verify(raw, capped, wall_time=10.0, time_limit=5.0)
    assert at_limit.status is SolveStatus.feasible_at_limit
    assert at_limit.objective == 4.0
    assert verify(raw, capped, 1.0, 5.0).status is SolveStatus.optimal


@pytest.mark.parametrize(
    "values, message",
    [
        ({"C0000001": 2.0, "C0000002": 0.5}, "integer"),
        ({"C0000001": 4.0, "C0000002": 0.0}, "violated"),
    ],
    ids=["fractional", "row violated"],
)
def test_verify_demotes(capped, values, message):
    raw = RawSolution(status=SolveStatus.optimal, values=values)
    demoted = verify(raw, capped, 1.0, 5.0)
    assert demoted.status is SolveStatus.error
    assert message in demoted.message


def test_verify_rejects_unknown_columns(capped):
    raw = RawSolution(status=SolveStatus.optimal, values={"C0000009": 1.0})
    with pytest.raises(ProtocolError):
        verify(raw, capped, 1.0, 5.0)


def test_solution_format_choices():
    assert {fmt.value for fmt in SolutionFormat} == {"generic", "gurobi", "cbc"}
