#!/usr/bin/env python

"""Tests for the `oosplan.solve.exhaustive` module."""

import pytest

from oosplan.exceptions import InstanceTooLarge
from oosplan.model import Assign, assemble
from oosplan.network import LaunchSpec
from oosplan.solve import SolveRequest, SolveStatus, solve_exhaustive, solve_external
from oosplan.state import InProgressService

from tests.instances import (
    depot,
    grid,
    highs_settings,
    need,
    operating_rate,
    planning_inputs,
    random_instance,
    servicer,
)

CUSTOMERS = {"A": -160.0, "B": -150.0}


def both(inputs, tmp_path):
    model = assemble(inputs)
    settings = highs_settings(tmp_path)
    request = SolveRequest(model, gap=0.0, settings=settings, inputs=inputs)
    return model, solve_exhaustive(request), solve_external(request)


def served(model, solution):
    values = model.values_by_index(solution.values)
    return sorted(
        (index.need, index.vehicle, index.start)
        for index, value in values.items()
        if isinstance(index, Assign) and value > 0.5
    )


@pytest.fixture(params=range(20), ids=[f"seed {seed}" for seed in range(20)])
def instance(request):
    return random_instance(request.param)


def test_agrees_with_highs(instance, tmp_path):
    _, exhaustive, highs = both(instance, tmp_path)
    assert exhaustive.status is highs.status is SolveStatus.optimal
    assert exhaustive.objective == pytest.approx(highs.objective, rel=1e-7)


def test_waits_to_serve_both_customers(tmp_path):
    """
    Serving the far customer first burns more than the servicer carries, so
    the near customer goes first and the far one waits out its window.
    """
    time_grid = grid(30)
    needs = [
        need("far", "A", "Inspection", 0, time_grid, window_length=20),
        need("near", "B", "Inspection", 10, time_grid, window_length=10),
    ]
    inputs = planning_inputs(
        [(servicer("S", ["T2"]), "P", {"bipropellant": 100.0})],
        {"B": 20.0, "A": 40.0},
        needs,
        time_grid,
        parking={"P": 0.0},
    )
    model, exhaustive, highs = both(inputs, tmp_path)
    expected = [("far", "S", 24), ("near", "S", 14)]
    assert served(model, exhaustive) == expected
    assert served(model, highs) == expected
    profit = 2 * 10e6 - 5000.0 * (24 + 4) - 13000.0 * 30
    assert exhaustive.objective == pytest.approx(profit)
    assert highs.objective == pytest.approx(profit)


def test_no_needs_costs_operations(tmp_path):
    fleet = [
        (servicer("S1", ["T2"]), "A", {"bipropellant": 500.0}),
        (servicer("S2", ["T4"]), "B", {"bipropellant": 500.0}),
    ]
    inputs = planning_inputs(fleet, CUSTOMERS, time_grid=grid(30), parking={})
    _, exhaustive, highs = both(inputs, tmp_path)
    rate = operating_rate([vehicle for vehicle, _, _ in fleet])
    assert exhaustive.objective == pytest.approx(-rate * 30)
    assert highs.objective == pytest.approx(-rate * 30)


def test_one_service_at_a_time(tmp_path):
    time_grid = grid(30)
    needs = [
        need("i1", "A", "Inspection", 0, time_grid, duration=30),
        need("r1", "A", "Retirement", 0, time_grid, duration=30),
    ]
    inputs = planning_inputs(
        [(servicer("S", ["T2", "T4"]), "A", {"bipropellant": 500.0})],
        CUSTOMERS,
        needs,
        time_grid,
    )
    model, exhaustive, highs = both(inputs, tmp_path)
    assert len(served(model, exhaustive)) == 1
    assert len(served(model, highs)) == 1
    # the retirement has no delay penalty
    assert exhaustive.objective == pytest.approx(10e6 - 13000.0 * 30)
    assert highs.objective == pytest.approx(exhaustive.objective)


def test_no_transfer_between_servicers_at_customers(tmp_path):
    """A servicer with an empty tank cannot borrow from its neighbour."""
    time_grid = grid(30)
    fleet = [
        (servicer("FULL", ["T1"]), "A", {"bipropellant": 1000.0}),
        (servicer("EMPTY", ["T2"]), "A", {"bipropellant": 0.0}),
    ]
    inputs = planning_inputs(
        fleet,
        CUSTOMERS,
        [need("far", "B", "Inspection", 0, time_grid)],
        time_grid,
        parking={},
    )
    model, exhaustive, highs = both(inputs, tmp_path)
    assert served(model, exhaustive) == []
    assert served(model, highs) == []
    rate = operating_rate([vehicle for vehicle, _, _ in fleet])
    assert exhaustive.objective == pytest.approx(-rate * 30)
    assert highs.objective == pytest.approx(-rate * 30)


def test_depot_refilled_by_another_servicer(tmp_path):
    """
    The depot starts without bipropellant; the servicer holding the tool can
    only fly once the other one has dropped its propellant off.
    """
    time_grid = grid(30)
    fleet = [
        (depot(), "DEPOT", {"monopropellant": 100.0}),
        (servicer("DONOR", ["T1"]), "A", {"bipropellant": 1000.0}),
        (servicer("TAKER", ["T2"]), "DEPOT", {"bipropellant": 0.0}),
    ]
    inputs = planning_inputs(
        fleet, CUSTOMERS, [need("i1", "B", "Inspection", 0, time_grid)], time_grid
    )
    model, exhaustive, highs = both(inputs, tmp_path)
    assert [(n, v) for n, v, _ in served(model, exhaustive)] == [("i1", "TAKER")]
    assert [(n, v) for n, v, _ in served(model, highs)] == [("i1", "TAKER")]
    assert exhaustive.objective == pytest.approx(highs.objective, rel=1e-7)


def test_too_many_servicers():
    fleet = [
        (servicer(f"S{i}", ["T2"]), "A", {"bipropellant": 500.0}) for i in range(3)
    ]
    inputs = planning_inputs(fleet, CUSTOMERS)
    with pytest.raises(InstanceTooLarge):
        solve_exhaustive(SolveRequest(assemble(inputs), inputs=inputs))


def test_too_many_intervals():
    inputs = planning_inputs(
        [(servicer("S", ["T2"]), "A", {"bipropellant": 500.0})],
        CUSTOMERS,
        time_grid=grid(40),
    )
    with pytest.raises(InstanceTooLarge):
        solve_exhaustive(SolveRequest(assemble(inputs), inputs=inputs))


@pytest.mark.parametrize(
    "variant", ["launches", "in progress", "no inputs", "empty parking"]
)
def test_unsupported_instances(variant):
    time_grid = grid(30)
    options = {}
    if variant == "launches":
        options = dict(
            launch=LaunchSpec(period=30, capacity=8300.0, cost_per_kg=11300.0),
            sites=["KSC"],
        )
    elif variant == "in progress":
        running = need("p1", "A", "Inspection", -20, time_grid)
        options = dict(in_progress=[InProgressService(running, "S", -16)])
    fleet = [(servicer("S", ["T2"]), "A", {"bipropellant": 500.0})]
    if variant == "empty parking":
        fleet.append((servicer("S2", ["T4"]), "B", {"bipropellant": 500.0}))
    inputs = planning_inputs(
        fleet,
        CUSTOMERS,
        time_grid=time_grid,
        **options,
    )
    request = SolveRequest(assemble(inputs), inputs=inputs)
    if variant == "no inputs":
        request.inputs = None
    with pytest.raises(ValueError):
        solve_exhaustive(request)
