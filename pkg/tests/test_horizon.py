#!/usr/bin/env python

"""Tests for the `oosplan.horizon` module."""

import pytest

from oosplan.exceptions import PlanningInfeasible, StateCorruption
from oosplan.horizon import (
    ActionKind,
    CommittedSchedule,
    HorizonConfig,
    Plan,
    Trigger,
    commit,
    compare_architectures,
    plan_horizon,
    propagate,
    run,
)
from oosplan.model import FlowX
from oosplan.network import TimeGrid
from oosplan.report import write_actions
from oosplan.solve import Solution, SolveStatus, solve_external
from oosplan.state import InProgressService, InfrastructureState, VehicleState

from tests.instances import (
    depot,
    highs_settings,
    need,
    operating_rate,
    run_setup,
    servicer,
)


@pytest.fixture
def fleet():
    return [
        (servicer("S", ["T1"]), "A", {"bipropellant": 500.0}),
        (depot(), "DEPOT", {"monopropellant": 100.0}),
    ]


def test_quiet_run(fleet):
    setup = run_setup(fleet)
    result = run(setup, needs=[])
    replans = result.schedule.replans
    assert [r.date for r in replans] == [0, 60]
    assert [r.trigger for r in replans] == [Trigger.start, Trigger.quiet_timer]
    depots = [state.vehicles["DEPOT"] for state in result.schedule.states]
    assert [state.date for state in result.schedule.states] == [0, 60, 120]
    assert depots[1].cargo["monopropellant"] == pytest.approx(100.0 - 8.4)
    assert depots[2].cargo["monopropellant"] == pytest.approx(100.0 - 16.8)
    assert result.final_state.date == 120


def test_value_of_quiet_run(fleet):
    setup = run_setup(fleet)
    result = run(setup, needs=[])
    # servicer: 50e6 + 90000 + 100000 + 11300 * 2600
    # depot: 200e6 + 23000 + 11300 * 2100
    assert result.investment == pytest.approx(303_323_000.0)
    assert result.values[0].date == 0
    assert result.values[0].value == pytest.approx(-result.investment)
    rate = operating_rate([vehicle for vehicle, _, _ in fleet])
    for point in result.values:
        assert point.revenue == 0.0
        assert point.cost == pytest.approx(rate * point.date)
    assert result.values[-1].date == 120
    assert result.payback is None
    summary = result.summary()
    assert summary["replans"] == 2
    assert summary["served"] == summary["declined"] == 0


def test_random_need_triggers_replan(fleet):
    setup = run_setup(fleet)
    grid = setup.grid
    late = need("r1", "B", "Repositioning", 30, grid)
    result = run(setup, needs=[late])
    replans = result.schedule.replans
    assert [r.date for r in replans] == [0, 30, 90]
    assert [r.trigger for r in replans] == [
        Trigger.start,
        Trigger.random_need,
        Trigger.quiet_timer,
    ]
    assert replans[1].needs == ("r1",)
    assert [r.visible for r in replans] == [0, 1, 0]
    assert not result.schedule.records["r1"].served
    assert [r.need.id for r in result.schedule.declined] == ["r1"]


def test_deterministic_needs_seen_ahead(fleet):
    setup = run_setup(fleet)
    grid = setup.grid
    refueling = need("f1", "B", "Refueling", 40, grid)
    result = run(setup, needs=[refueling])
    assert [r.visible for r in result.schedule.replans] == [1, 1]


@pytest.fixture
def in_progress_state():
    grid = TimeGrid(dt=2, T=10, n=2, horizon=30)
    running = need("p1", "A", "Refueling", -20, grid)
    vehicles = {
        "S": VehicleState("S", "A", {"bipropellant": 500.0, "T1": 1.0}),
    }
    return InfrastructureState(0, vehicles, [InProgressService(running, "S", -16)])


def test_propagate_in_progress(in_progress_state):
    setup = run_setup(
        [(servicer("S", ["T1"]), "A", {"bipropellant": 500.0})],
        HorizonConfig(30, 30, 30),
    )
    plan = plan_horizon(setup, in_progress_state, [], 30)
    early = propagate(in_progress_state, plan, 4)
    assert early.date == 4
    assert [s.need.id for s in early.in_progress] == ["p1"]
    assert early.vehicles["S"].node == "A"
    later = propagate(in_progress_state, plan, 10)
    assert later.in_progress == []
    assert later.vehicles["S"].cargo == {"bipropellant": 500.0, "T1": 1.0}
    # the original state is untouched
    assert in_progress_state.date == 0
    assert len(in_progress_state.in_progress) == 1


def test_propagate_bounds(in_progress_state):
    setup = run_setup(
        [(servicer("S", ["T1"]), "A", {"bipropellant": 500.0})],
        HorizonConfig(30, 30, 30),
    )
    plan = plan_horizon(setup, in_progress_state, [], 30)
    for until in (0, 40):
        with pytest.raises(ValueError):
            propagate(in_progress_state, plan, until)


def test_corrupted_plan_is_refused(fleet):
    setup = run_setup(fleet)
    plan = plan_horizon(setup, setup.initial_state, [], 60)
    departing = FlowX("S", "A", "A", 0, "bipropellant")
    assert plan.values[departing] == pytest.approx(500.0)
    plan.values[departing] = -5.0
    with pytest.raises(StateCorruption):
        propagate(setup.initial_state, plan, 10)


def test_infeasible_planning_horizon(fleet):
    def refuse(request):
        return Solution(SolveStatus.infeasible, message="no plan")

    setup = run_setup(fleet, solver=refuse)
    with pytest.raises(PlanningInfeasible) as excinfo:
        run(setup, needs=[])
    assert excinfo.value.diagnostics["status"] == "Infeasible"


@pytest.mark.parametrize(
    "lengths", [(60, 90, 120), (60, 0, 120), (130, 60, 120)], ids=str
)
def test_horizon_config_order(lengths):
    with pytest.raises(ValueError):
        HorizonConfig(*lengths)


def test_horizon_config_grid():
    with pytest.raises(ValueError):
        HorizonConfig(65, 60, 120).check_grid(TimeGrid(dt=2, T=10, n=2, horizon=120))


def test_committed_actions_chain(tmp_path):
    """One servicer is re-planned every 10 days and inspects B once."""
    horizon = HorizonConfig(planning=30, control=10, scheduling=30)
    setup = run_setup(
        [(servicer("S", ["T2"]), "A", {"bipropellant": 500.0})],
        horizon,
        solver=solve_external,
        name="highs",
        gap=0.0,
        time_limit=60.0,
        settings=highs_settings(tmp_path),
    )
    inspection = need("i1", "B", "Inspection", 0, setup.grid)
    result = run(setup, needs=[inspection])
    schedule = result.schedule
    assert [r.date for r in schedule.replans] == [0, 10, 20]
    assert schedule.records["i1"].start == 4
    services = [a for a in schedule.actions if a.kind is ActionKind.service]
    assert [(a.need, a.start, a.origin) for a in services] == [("i1", 4, "B")]
    moves = sorted(
        (a for a in schedule.actions if a.kind is not ActionKind.service),
        key=lambda a: a.start,
    )
    assert moves[0].start == 0 and moves[-1].end == 30
    for before, after in zip(moves, moves[1:]):
        assert before.end == after.start
        assert before.destination == after.origin
    revenue = [f for f in schedule.cash_flows if f.component == "revenue"]
    assert [(f.date, f.amount) for f in revenue] == [(4, pytest.approx(10e6))]
    assert schedule.breakdown().delay == pytest.approx(4 * 5000.0)


def test_compare_architectures(fleet):
    one = run_setup(fleet, name="one")
    two = run_setup(fleet[:1], name="two")
    trade = compare_architectures([one, two], seeds=[1, 2], workers=2)
    assert trade.failures == []
    assert trade.architectures() == ["one", "two"]
    for seed in (1, 2):
        paired = [r for r in trade.results if r.seed == seed]
        assert len(paired) == 2
        assert set(paired[0].schedule.records) == set(paired[1].schedule.records)
    runs = trade.by_architecture("one")
    assert [r.seed for r in runs] == [1, 2]
    mean = trade.mean_series("one")
    assert [p.date for p in mean] == [p.date for p in runs[0].values]
    expected = (runs[0].values[-1].value + runs[1].values[-1].value) / 2
    assert mean[-1].value == pytest.approx(expected)
    assert trade.mean_series("three") == []


def test_failed_runs_are_recorded(fleet):
    def refuse(request):
        return Solution(SolveStatus.infeasible)

    good = run_setup(fleet, name="good")
    broken = run_setup(fleet, name="broken", solver=refuse)
    trade = compare_architectures([good, broken], seeds=[3])
    assert [r.name for r in trade.results] == ["good"]
    assert [(name, seed) for name, seed, _ in trade.failures] == [("broken", 3)]


def test_nothing_to_compare(fleet):
    trade = compare_architectures([run_setup(fleet)], seeds=[])
    assert trade.results == [] and trade.failures == []


@pytest.mark.slow
def test_year_of_replanning(tmp_path):
    """
    Every hand-off passes on exactly what the previous plan carried, and the
    action log can be replayed plan by plan.
    """
    plans = []

    def recording(request):
        solution = solve_external(request)
        plans.append(Plan(request.inputs, request.model, solution))
        return solution

    horizon = HorizonConfig(planning=60, control=30, scheduling=370)
    setup = run_setup(
        [
            (servicer("S", ["T2", "T4"]), "A", {"bipropellant": 800.0}),
            (depot(), "DEPOT", {"bipropellant": 3000.0, "monopropellant": 200.0}),
        ],
        horizon,
        solver=recording,
        name="year",
        gap=0.01,
        time_limit=60.0,
        settings=highs_settings(tmp_path),
    )
    needs = [
        need("i1", "B", "Inspection", 20, setup.grid),
        need("r1", "A", "Repositioning", 100, setup.grid),
        need("r2", "B", "Retirement", 200, setup.grid),
    ]
    result = run(setup, needs=needs)
    schedule = result.schedule
    assert len(schedule.replans) >= 3
    assert result.final_state.date == 370
    triggers = [r.trigger for r in schedule.replans]
    assert triggers.count(Trigger.random_need) == 2
    assert len(plans) == len(schedule.replans)

    replayed = CommittedSchedule()
    for k, plan in enumerate(plans):
        assert plan.inputs.state == schedule.states[k]
        handed = schedule.states[k + 1]
        commit(replayed, plan, handed.date)
        if handed.date == 370:
            continue
        for vehicle, arc in plan.moves():
            if arc.start != handed.date or vehicle not in handed.vehicles:
                continue
            carried = plan.cargo(vehicle, arc)
            assert handed.vehicles[vehicle].node == arc.origin
            assert handed.vehicles[vehicle].cargo == {
                c: amount for c, amount in carried.items() if amount > 1e-9
            }

    write_actions(schedule.actions, tmp_path / "committed.csv")
    write_actions(replayed.actions, tmp_path / "replayed.csv")
    committed = (tmp_path / "committed.csv").read_text()
    assert committed == (tmp_path / "replayed.csv").read_text()

    for vehicle in ("S", "DEPOT"):
        moves = sorted(
            (
                a
                for a in schedule.actions
                if a.vehicle == vehicle and a.kind is not ActionKind.service
            ),
            key=lambda a: a.start,
        )
        assert moves[0].start == 0 and moves[-1].end == 370
        for before, after in zip(moves, moves[1:]):
            assert before.end == after.start
            assert before.destination == after.origin
