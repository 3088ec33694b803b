#!/usr/bin/env python

"""Tests for the `oosplan.model` package."""

import math

import numpy as np
import pytest

from oosplan.astro import consumption_fraction
from oosplan.exceptions import ModelBuildError
from oosplan.model import (
    Assign,
    Dispatch,
    FlowX,
    FlowY,
    MilpModel,
    ObjectiveBreakdown,
    Sense,
    assemble,
)
from oosplan.network import ArcKind, DynamicArc, LaunchSpec
from oosplan.state import InProgressService

from tests.instances import (
    GEOMETRY,
    depot,
    grid,
    idle_values,
    need,
    planning_inputs,
    servicer,
    static_network,
)

CUSTOMERS = {"A": -160.0, "B": -150.0}


@pytest.fixture
def toy():
    return planning_inputs(
        [(servicer("S", ["T1"]), "DEPOT", {"bipropellant": 500.0})],
        CUSTOMERS,
        time_grid=grid(20),
    )


@pytest.fixture(params=[False, True], ids=["servicer only", "servicer and depot"])
def fleet(request):
    fleet = [(servicer("S", ["T2", "T4"]), "A", {"bipropellant": 800.0})]
    if request.param:
        fleet.append(
            (depot(), "DEPOT", {"bipropellant": 3000.0, "monopropellant": 100.0})
        )
    return fleet


def rows(model: MilpModel, prefix: str):
    return [c for c in model.constraints if c.label.startswith(prefix)]


def test_variable_counts_match_hand_count(toy):
    model = assemble(toy)
    static = static_network(CUSTOMERS)
    transports = [a for a in static.arcs if a.kind is ArcKind.transport]
    assert len(transports) == 6
    # four spaceflight nodes, six time nodes with a holdover
    flows = len(list(model.columns_of(FlowY)))
    assert flows == 6 * 4 + 3 * 6
    burns = len([i for _, i in model.columns_of(FlowX) if i.sign == "-"])
    assert burns == 6 * 4
    assert len(list(model.columns_of(FlowX))) == 2 * flows + burns
    assert not list(model.columns_of(Assign))
    assert not list(model.columns_of(Dispatch))


def test_arrival_after_transfer():
    phi = 0.0318
    delta_v = -math.log1p(-phi) * GEOMETRY.g0 * 316.0 / 1000.0
    inputs = planning_inputs(
        [(servicer("S", [], dry_mass=3000.0), "DEPOT", {"bipropellant": 500.0})],
        CUSTOMERS,
    )
    vehicle = inputs.vehicle("S")
    arc = DynamicArc("DEPOT", "A", ArcKind.transport, 0, 2, delta_v)
    assert inputs.phi(vehicle, arc) == pytest.approx(phi)
    arriving = inputs.arrival(vehicle, arc, {"bipropellant": 500.0})
    assert arriving["bipropellant"] == pytest.approx(500.0 - phi * 3500.0)
    assert arriving["bipropellant"] == pytest.approx(388.7, abs=0.05)


def test_transform_rows(toy):
    model = assemble(toy)
    vehicle = toy.vehicle("S")
    transports = [a for a in toy.network.arcs if a.kind is ArcKind.transport]
    for arc in transports:
        key = ("S", arc.origin, arc.destination, arc.start)
        label = f"transform[S:{arc.origin}->{arc.destination}@{arc.start}]"
        (row,) = [c for c in model.constraints if c.label == label]
        phi = consumption_fraction(arc.delta_v, 316.0, GEOMETRY)
        assert row.sense is Sense.eq
        assert row.coefficients[model.column(FlowY(*key))] == pytest.approx(
            phi * 2000.0
        )
        out = model.column(FlowX(*key, "bipropellant"))
        into = model.column(FlowX(*key, "bipropellant", "-"))
        assert row.coefficients[out] == pytest.approx(phi - 1.0)
        assert row.coefficients[into] == 1.0
        # the integrated tool adds its mass to the burn
        tool = model.column(FlowX(*key, "T1"))
        assert row.coefficients[tool] == pytest.approx(phi * 100.0)
    assert toy.phi(vehicle, transports[0]) > 0


def test_capacity_rows(toy):
    model = assemble(toy)
    column = model.column(FlowX("S", "DEPOT", "A", 0, "bipropellant"))
    assert model.variables[column].upper == 1000.0
    tools = rows(model, "tool[T1:S:DEPOT->A@0]")
    assert len(tools) == 1
    assert tools[0].sense is Sense.eq


def test_delay_penalty_term():
    coarse = grid(40, dt=5, T=20)
    late = need("r1", "A", "Repositioning", 0, coarse)
    assert late.window == (10, 30)
    inputs = planning_inputs(
        [(servicer("S", ["T4"]), "A", {"bipropellant": 500.0})],
        CUSTOMERS,
        [late],
        coarse,
    )
    model = assemble(inputs)
    delay = model.components["delay"]
    revenue = model.components["revenue"]
    first = model.column(Assign("r1", "S", 10))
    second = model.column(Assign("r1", "S", 30))
    assert delay[first] == pytest.approx(1.0e6)
    assert delay[second] == pytest.approx(3.0e6)
    assert revenue[first] == revenue[second] == pytest.approx(10e6)


def test_assign_and_dispatch_columns():
    time_grid = grid(30)
    inspection = need("i1", "B", "Inspection", 0, time_grid)
    inputs = planning_inputs(
        [
            (servicer("S1", ["T2"]), "A", {"bipropellant": 500.0}),
            (servicer("S2", ["T4"]), "DEPOT", {"bipropellant": 500.0}),
        ],
        CUSTOMERS,
        [inspection],
        time_grid,
    )
    model = assemble(inputs)
    assigned = sorted((a.vehicle, a.start) for _, a in model.columns_of(Assign))
    assert assigned == [
        ("S1", 4),
        ("S1", 14),
        ("S1", 24),
        ("S2", 4),
        ("S2", 14),
        ("S2", 24),
    ]
    assert len(rows(model, "once[i1]")) == 1
    assert len(rows(model, "dispatch[i1:")) == 6
    presence = rows(model, "tool_presence[S2:T2@B")
    # S2 carries no T2: nothing can satisfy its presence rows but zero dispatch
    assert presence
    for row in presence:
        assert all(value == -1.0 for value in row.coefficients.values())


def test_exclusive_rows_for_shared_customer():
    time_grid = grid(30)
    needs = [
        need("i1", "A", "Inspection", 0, time_grid),
        need("r1", "A", "Retirement", 0, time_grid),
    ]
    inputs = planning_inputs(
        [(servicer("S", ["T2", "T4"]), "A", {"bipropellant": 500.0})],
        CUSTOMERS,
        needs,
        time_grid,
    )
    model = assemble(inputs)
    exclusive = rows(model, "exclusive[A@")
    assert {row.label for row in exclusive} >= {"exclusive[A@4]", "exclusive[A@14]"}


def test_idle_plan_is_feasible(fleet):
    time_grid = grid(30)
    inputs = planning_inputs(
        fleet,
        CUSTOMERS,
        [need("i1", "B", "Inspection", 0, time_grid)],
        time_grid,
    )
    model = assemble(inputs)
    values = idle_values(inputs, model)
    assert model.violations(values) == []
    breakdown = model.breakdown(values)
    rate = 13000.0 * len(fleet)
    assert breakdown.total == pytest.approx(-rate * 30)
    assert breakdown.revenue == 0.0


def test_in_progress_service_is_fixed():
    time_grid = grid(30, T=10)
    running = need("p1", "A", "Refueling", -20, time_grid)
    inputs = planning_inputs(
        [(servicer("S", ["T1"]), "A", {"bipropellant": 500.0})],
        CUSTOMERS,
        time_grid=time_grid,
        in_progress=[InProgressService(running, "S", -16)],
    )
    model = assemble(inputs)
    column = model.column(Assign("p1", "S", -16))
    variable = model.variables[column]
    assert variable.lower == variable.upper == 1.0
    # the service started at -16 occupies its servicer until 10
    dispatches = sorted(i.time for _, i in model.columns_of(Dispatch))
    assert dispatches == [0, 2, 4]
    assert all(column not in terms for terms in model.components.values())
    values = idle_values(inputs, model)
    assert model.violations(values) == []


def test_launch_rows():
    launch = LaunchSpec(period=30, capacity=8300.0, cost_per_kg=11300.0)
    inputs = planning_inputs(
        [
            (servicer("S", ["T1"]), "DEPOT", {"bipropellant": 500.0}),
            (servicer("G", ["T2"]), "KSC", {"bipropellant": 1000.0}),
        ],
        CUSTOMERS,
        time_grid=grid(30),
        launch=launch,
        sites=["KSC"],
    )
    model = assemble(inputs)
    (row,) = rows(model, "launch[KSC->DEPOT@0]")
    assert row.rhs == 8300.0
    ground = model.column(FlowY("G", "KSC", "DEPOT", 0))
    assert row.coefficients[ground] == 2000.0
    assert model.components["launch"][ground] == pytest.approx(11300.0 * 2000.0)
    assert model.components["pdm"][ground] == pytest.approx(50e6)
    assert len(rows(model, "ground[G@KSC]")) == 1
    loose = model.column(FlowX("launcher", "KSC", "DEPOT", 0, "bipropellant"))
    assert model.components["pdm"][loose] == 180.0


def test_unknown_customer_fails():
    time_grid = grid(30)
    stray = need("i1", "NOWHERE", "Inspection", 0, time_grid)
    with pytest.raises(ModelBuildError) as excinfo:
        assemble(
            planning_inputs(
                [(servicer("S", ["T2"]), "A", {"bipropellant": 500.0})],
                CUSTOMERS,
                [stray],
                time_grid,
            )
        )
    assert "i1" in str(excinfo.value)


def test_milp_model():
    model = MilpModel()
    x = model.add_variable("x", upper=4.0)
    y = model.add_variable("y", upper=1.0, integer=True)
    model.add_constraint("cap", {x: 1.0, y: -4.0}, Sense.le)
    model.add_objective_term("revenue", y, 10.0)
    model.add_objective_term("pdm", x, 1.0)
    values = np.array([4.0, 1.0])
    assert model.evaluate(values) == 6.0
    assert model.violations(values) == []
    assert model.violations(np.array([4.0, 0.0])) == ["cap: activity 4 L 0"]
    assert model.summary() == dict(variables=2, integer=1, constraints=1, nonzeros=2)
    assert model.name_map() == {
        "C0000001": "'x'",
        "C0000002": "'y'",
        "R0000001": "cap",
    }
    with pytest.raises(ModelBuildError):
        model.add_variable("x")
    with pytest.raises(ModelBuildError):
        model.add_constraint("bad", {7: 1.0}, Sense.le)


def test_breakdown_total():
    breakdown = ObjectiveBreakdown(revenue=100.0, pdm=10.0, launch=5.0, delay=1.0)
    assert breakdown.total == 84.0
    assert breakdown.to_dict()["total"] == 84.0


def test_commodities_pool_only_at_parking():
    inputs = planning_inputs(
        [
            (servicer("S1", ["T1"]), "A", {"bipropellant": 700.0}),
            (servicer("S2", ["T2"]), "A", {"bipropellant": 300.0}),
            (servicer("S3", ["T4"]), "DEPOT", {"bipropellant": 200.0}),
            (depot(), "DEPOT", {"bipropellant": 900.0, "monopropellant": 100.0}),
        ],
        CUSTOMERS,
        time_grid=grid(30),
    )
    model = assemble(inputs)
    rows = {c.label: c for c in model.constraints}
    assert rows["balance[bipropellant@A/S1,0]"].rhs == 700.0
    assert rows["balance[bipropellant@A/S2,0]"].rhs == 300.0
    assert "balance[bipropellant@A,0]" not in rows
    assert rows["balance[bipropellant@DEPOT,0]"].rhs == 1100.0
    assert not any(label.startswith("balance[bipropellant@DEPOT/") for label in rows)
