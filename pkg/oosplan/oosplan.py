"""Main module."""

import json
import logging

from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from oosplan.demand import ServiceNeed, write_demand_history
from oosplan.exceptions import ScenarioError
from oosplan.horizon import (
    Plan,
    RunSetup,
    TradeResult,
    compare_architectures,
    plan_horizon,
    planning_inputs,
    realize_demand,
)
from oosplan.model.builder import PlanningInputs, assemble
from oosplan.model.milp import MilpModel
from oosplan.report import (
    ScheduleReport,
    validate_schedule,
    write_gantt,
    write_itineraries,
    write_objective,
    write_trade,
)
from oosplan.scenario import Scenario, load_scenario
from oosplan.solve.mps import write_mps

logger = logging.getLogger(__name__)


def forecast(setup: RunSetup, seed: int = 0) -> List[ServiceNeed]:
    """Needs of the first planning horizon, all known at the start date."""
    end = setup.initial_state.date + setup.horizon.planning
    return [need for need in realize_demand(setup, seed) if need.occurrence < end]


def plan_first_horizon(setup: RunSetup, seed: int = 0) -> Plan:
    state = setup.initial_state
    return plan_horizon(
        setup, state, forecast(setup, seed), state.date + setup.horizon.planning, seed
    )


def run_schedule(
    scenario: Scenario, out_dir: Path, seed: int = 0, **options
) -> ScheduleReport:
    """
    Operational scheduling: optimize one planning horizon and report it.

    Writes ``itinerary_<vehicle>.csv``, ``gantt.csv``, ``objective.json`` and
    ``demand_history.csv`` to ``out_dir``, plus ``violations.txt`` when the
    schedule fails the independent checks.

    :param seed: Seed of the need realization.
    :param options: Solver overrides, see :meth:`Scenario.setup`.
    :raises PlanningInfeasible: If no feasible schedule is found.
    """
    setup = scenario.setup(**options)
    plan = plan_first_horizon(setup, seed)
    report = ScheduleReport.from_plan(plan.inputs, plan.model, plan.solution)
    report.violations = validate_schedule(plan.inputs, plan.values)
    write_itineraries(report, out_dir)
    write_gantt(report.gantt(), out_dir / "gantt.csv")
    write_objective(report, out_dir / "objective.json")
    write_demand_history(report.services, out_dir / "demand_history.csv")
    if report.violations:
        with open(out_dir / "violations.txt", "w") as violations_file:
            violations_file.write("\n".join(report.violations) + "\n")
        logger.warning(
            "Schedule of %s fails %d check(s), see %s",
            scenario.name,
            len(report.violations),
            out_dir / "violations.txt",
        )
    logger.info(
        "Scheduled %s: %s, profit %.2f, %d/%d needs served",
        scenario.name,
        report.status,
        report.breakdown.total,
        len(report.served),
        len(report.services),
    )
    return report


def run_trade(
    scenarios: Sequence[Scenario],
    out_dir: Path,
    seeds: Optional[Sequence[int]] = None,
    workers: int = 1,
    **options,
) -> TradeResult:
    """
    Strategic planning: rolling-horizon runs of every scenario on shared needs.

    :param seeds: Need realizations; the first scenario's seeds when None.
    :param workers: Runs executed at once.
    """
    if seeds is None:
        seeds = scenarios[0].seeds if scenarios else []
    setups = [scenario.setup(**options) for scenario in scenarios]
    trade = compare_architectures(setups, list(seeds), workers)
    write_trade(trade, out_dir)
    return trade


def build_model(setup: RunSetup, seed: int = 0) -> Tuple[PlanningInputs, MilpModel]:
    """Model of the first planning horizon, without solving it."""
    state = setup.initial_state
    end = state.date + setup.horizon.planning
    inputs = planning_inputs(setup, state, forecast(setup, seed), end)
    return inputs, assemble(inputs)


def export_mps(scenario: Scenario, out_dir: Path, seed: int = 0) -> Path:
    """
    Write the first planning-horizon model as ``model.mps``.

    Column and row names are mapped back to their variables and constraints in
    ``names.json``; the network goes to ``network.txt``.
    """
    inputs, model = build_model(scenario.setup(), seed)
    mps = out_dir / "model.mps"
    out_dir.mkdir(parents=True, exist_ok=True)
    write_mps(model, mps)
    with open(out_dir / "names.json", "w") as names_file:
        json.dump(model.name_map(), names_file, indent=2)
        names_file.write("\n")
    inputs.network.to_edge_list(out_dir / "network.txt")
    return mps


def validate_scenario(file_path: Path, fleet_size: Optional[int] = None) -> List[str]:
    """
    Lint a scenario file.

    :returns: Problems found, empty when the scenario is usable. Transfers
        omitted from the network are reported as warnings in the list too.
    """
    try:
        scenario = load_scenario(file_path, fleet_size)
    except ScenarioError as e:
        return e.problems
    return [f"warning: {w}" for w in scenario.static_network().warnings]
