"""
Rolling-horizon scheduling of an OOS infrastructure.

The infrastructure is optimized over a planning horizon, the plan is
committed until the next random need or the end of the control horizon, the
state is propagated to that date and the loop starts over until the end of
the scheduling horizon.
"""

import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from oosplan.astro import OrbitGeometry
from oosplan.demand import (
    DemandKind,
    DemandRecord,
    Satellite,
    ServiceNeed,
    ServiceType,
    generate_deterministic,
    generate_random,
    occupancy_end,
)
from oosplan.exceptions import OOSError, PlanningInfeasible, StateCorruption
from oosplan.model.builder import PlanningInputs, assemble
from oosplan.model.commodities import LAUNCHER, Commodity, Vehicle
from oosplan.model.milp import (
    COMPONENTS,
    Assign,
    FlowX,
    FlowY,
    MilpModel,
    ObjectiveBreakdown,
)
from oosplan.network import (
    ArcKind,
    DynamicArc,
    LaunchSpec,
    StaticNetwork,
    TimeGrid,
    expand,
    prune_to_demand,
)
from oosplan.solve.external import SolverSettings, SolveRequest, solve_external
from oosplan.solve.solution import Solution
from oosplan.state import InProgressService, InfrastructureState, VehicleState

logger = logging.getLogger(__name__)

TOLERANCE = 1e-6

__all__ = [
    "Action",
    "ActionKind",
    "CashFlow",
    "CommittedSchedule",
    "HorizonConfig",
    "InfrastructureState",
    "Plan",
    "ReplanRecord",
    "RunResult",
    "RunSetup",
    "TradeResult",
    "Trigger",
    "ValuePoint",
    "compare_architectures",
    "plan_horizon",
    "planning_inputs",
    "propagate",
    "realize_demand",
    "run",
]


@dataclass(frozen=True)
class HorizonConfig:
    """
    :param planning: Planning horizon length, days.
    :param control: Days committed when no random need interrupts.
    :param scheduling: Total length of the run, days.
    """

    planning: int
    control: int
    scheduling: int

    def __post_init__(self):
        if not 0 < self.control <= self.planning <= self.scheduling:
            raise ValueError(
                f"Horizons must satisfy 0 < CH {self.control} <= PH "
                f"{self.planning} <= SH {self.scheduling}"
            )

    def check_grid(self, grid: TimeGrid) -> None:
        for label, length in (
            ("planning", self.planning),
            ("control", self.control),
            ("scheduling", self.scheduling),
        ):
            if length % grid.T:
                raise ValueError(
                    f"{label} horizon {length} is not a multiple of T {grid.T}"
                )


@dataclass
class RunSetup:
    """
    One architecture in its environment, ready to be scheduled.

    :param static: Static network of every customer, parking slot and site.
    :param grid: Time grid covering the scheduling horizon.
    :param launch: Launch opportunities, None when nothing can be launched.
    :param launch_cost_per_kg: Price used for the initial investment.
    :param solver: Called with each planning-horizon request.
    """

    name: str
    static: StaticNetwork
    grid: TimeGrid
    horizon: HorizonConfig
    vehicles: Sequence[Vehicle]
    commodities: Mapping[str, Commodity]
    satellites: Sequence[Satellite]
    service_types: Sequence[ServiceType]
    initial_state: InfrastructureState
    launch: Optional[LaunchSpec] = None
    launch_cost_per_kg: float = 11300.0
    geometry: OrbitGeometry = field(default_factory=OrbitGeometry)
    earth_supply: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    gap: float = 0.01
    time_limit: float = 7200.0
    settings: Optional[SolverSettings] = None
    solver: Callable[[SolveRequest], Solution] = solve_external

    def __post_init__(self):
        self.horizon.check_grid(self.grid)

    def vehicle(self, vehicle_id: str) -> Vehicle:
        for vehicle in self.vehicles:
            if vehicle.id == vehicle_id:
                return vehicle
        raise KeyError(vehicle_id)

    def investment(self) -> float:
        """Manufacturing, procurement and launch of what is deployed at the start."""
        total = 0.0
        for vehicle_state in self.initial_state.vehicles.values():
            if not self.static.node(vehicle_state.node).is_orbital:
                continue
            design = self.vehicle(vehicle_state.vehicle).design
            mass = design.dry_mass
            total += design.cost
            for k, amount in vehicle_state.cargo.items():
                total += self.commodities[k].cost * amount
                mass += self.commodities[k].unit_mass * amount
            total += self.launch_cost_per_kg * mass
        return total


class ActionKind(Enum):
    """Committed actions"""

    flight = "flight"
    hold = "hold"
    launch = "launch"
    service = "service"


@dataclass(frozen=True)
class Action:
    start: int
    end: int
    vehicle: str
    kind: ActionKind
    origin: str
    destination: str
    need: str = ""
    cargo: Tuple[Tuple[str, float], ...] = ()


@dataclass(frozen=True)
class CashFlow:
    """Realized amount of one objective component, $ (costs are positive)."""

    date: int
    component: str
    amount: float
    source: str = ""


class Trigger(Enum):
    """Why a planning horizon was optimized"""

    start = "Start"
    random_need = "RandomNeed"
    quiet_timer = "QuietTimer"


@dataclass(frozen=True)
class ReplanRecord:
    date: int
    trigger: Trigger
    needs: Tuple[str, ...]
    visible: int
    objective: float
    status: str
    wall_time: float


@dataclass
class CommittedSchedule:
    """Everything committed over a run, in commitment order."""

    actions: List[Action] = field(default_factory=list)
    cash_flows: List[CashFlow] = field(default_factory=list)
    replans: List[ReplanRecord] = field(default_factory=list)
    records: Dict[str, DemandRecord] = field(default_factory=dict)
    states: List[InfrastructureState] = field(default_factory=list)

    def breakdown(self, until: Optional[int] = None) -> ObjectiveBreakdown:
        totals = {component: 0.0 for component in COMPONENTS}
        for flow in self.cash_flows:
            if until is None or flow.date <= until:
                totals[flow.component] += flow.amount
        return ObjectiveBreakdown(**totals)

    @property
    def profit(self) -> float:
        return self.breakdown().total

    @property
    def served(self) -> List[DemandRecord]:
        return [r for r in self.records.values() if r.served]

    @property
    def declined(self) -> List[DemandRecord]:
        return [r for r in self.records.values() if not r.served]


@dataclass(frozen=True)
class ValuePoint:
    date: int
    revenue: float
    cost: float
    value: float


@dataclass
class Plan:
    """A solved planning-horizon model."""

    inputs: PlanningInputs
    model: MilpModel
    solution: Solution

    def __post_init__(self):
        self.values = self.model.values_by_index(self.solution.values)
        self.arcs = {
            (arc.origin, arc.destination, arc.start): arc
            for arc in self.inputs.network.arcs
        }

    def moves(self) -> List[Tuple[str, DynamicArc]]:
        """``(vehicle, arc)`` of every vehicle flow, in model order."""
        return [
            (index.vehicle, self.arcs[(index.origin, index.destination, index.start)])
            for index, value in self.values.items()
            if isinstance(index, FlowY) and value > 0.5
        ]

    def cargo(self, vehicle: str, arc: DynamicArc, sign: str = "+") -> Dict[str, float]:
        """Commodities on ``arc``, leaving (``+``) or arriving (``-``)."""
        cargo = {}
        key = (vehicle, arc.origin, arc.destination, arc.start)
        for k in self.inputs.commodities:
            value = self.values.get(FlowX(*key, k, sign))
            if value is None and sign == "-":
                value = self.values.get(FlowX(*key, k))
            if value is not None and abs(value) > 1e-9:
                cargo[k] = value
        return cargo

    def launches(self) -> List[DynamicArc]:
        return [arc for arc in self.inputs.network.arcs if arc.kind is ArcKind.launch]

    def assignments(self) -> List[Tuple[ServiceNeed, str, int]]:
        """Needs served in this plan, in need order."""
        chosen = {
            index.need: (index.vehicle, index.start)
            for index, value in self.values.items()
            if isinstance(index, Assign) and value > 0.5
        }
        return [
            (need, *chosen[need.id]) for need in self.inputs.needs if need.id in chosen
        ]

    def breakdown(self) -> ObjectiveBreakdown:
        return self.model.breakdown(self.solution.values)

    def occurs(self, column: int) -> int:
        """Date the objective terms of ``column`` are realized."""
        index = self.model.variables[column].index
        if isinstance(index, Assign):
            return index.start
        arc = self.arcs[(index.origin, index.destination, index.start)]
        if arc.kind is ArcKind.launch:
            return arc.start
        return arc.end

    def cash_flows(self, until: int) -> List[CashFlow]:
        """Objective terms of everything starting before ``until``."""
        flows = []
        for component, terms in self.model.components.items():
            for column, coefficient in sorted(terms.items()):
                amount = coefficient * self.solution.values[column]
                if abs(amount) < 1e-9:
                    continue
                index = self.model.variables[column].index
                if index.start >= until:
                    continue
                flows.append(
                    CashFlow(self.occurs(column), component, amount, repr(index))
                )
        return flows


def realize_demand(setup: RunSetup, seed: int) -> List[ServiceNeed]:
    """Deterministic and random needs of the whole scheduling horizon."""
    T = setup.grid.T
    horizon = setup.horizon.scheduling
    needs = generate_deterministic(
        setup.satellites, setup.service_types, horizon, interval=T, seed=seed
    )
    needs += generate_random(
        setup.satellites, setup.service_types, horizon, seed=seed, interval=T
    )
    return sorted(
        (need.with_window(setup.grid) for need in needs),
        key=lambda need: (need.occurrence, need.id),
    )


def planning_inputs(
    setup: RunSetup,
    state: InfrastructureState,
    needs: Sequence[ServiceNeed],
    end: int,
) -> PlanningInputs:
    """Network pruned to ``needs`` and expanded over ``[state.date, end)``."""
    t = state.date
    static = prune_to_demand(setup.static, needs, state.occupied())
    grid = TimeGrid(setup.grid.dt, setup.grid.T, setup.grid.n, end - t)
    return PlanningInputs(
        network=expand(static, grid, t0=t, launch=setup.launch),
        vehicles=setup.vehicles,
        commodities=setup.commodities,
        needs=needs,
        state=state,
        launch=setup.launch,
        geometry=setup.geometry,
        earth_supply=setup.earth_supply,
    )


def plan_horizon(
    setup: RunSetup,
    state: InfrastructureState,
    needs: Sequence[ServiceNeed],
    end: int,
    seed: int = 0,
) -> Plan:
    """
    Optimize ``[state.date, end)`` for ``needs``.

    :raises PlanningInfeasible: If the solver finds no feasible plan.
    """
    t = state.date
    inputs = planning_inputs(setup, state, needs, end)
    model = assemble(inputs)
    request = SolveRequest(
        model, gap=setup.gap, time_limit=setup.time_limit, seed=seed, inputs=inputs
    )
    if setup.settings is not None:
        request.settings = setup.settings
    solution = setup.solver(request)
    if not solution.is_feasible:
        raise PlanningInfeasible(
            f"Planning horizon [{t}, {end}) of {setup.name}: {solution.status.value}"
            + (f" ({solution.message})" if solution.message else ""),
            dict(
                date=t,
                end=end,
                needs=[need.id for need in needs],
                status=solution.status.value,
                message=solution.message,
                **model.summary(),
            ),
        )
    return Plan(inputs, model, solution)


def _check_committed(plan: Plan, until: int) -> None:
    inputs = plan.inputs
    for vehicle_id, arc in plan.moves():
        if arc.start >= until:
            continue
        vehicle = inputs.vehicle(vehicle_id)
        departing = plan.cargo(vehicle_id, arc)
        arriving = plan.cargo(vehicle_id, arc, "-")
        for k, amount in departing.items():
            if amount < -TOLERANCE:
                raise StateCorruption(
                    f"{vehicle_id} departs {arc.origin}@{arc.start} with {amount} {k}"
                )
        expected = inputs.arrival(vehicle, arc, departing)
        for k, amount in expected.items():
            got = arriving.get(k, 0.0)
            if abs(got - amount) > TOLERANCE * max(1.0, abs(amount)):
                raise StateCorruption(
                    f"{vehicle_id} reaches {arc.destination}@{arc.end} with "
                    f"{got} {k}, expected {amount}"
                )
            if amount < -TOLERANCE:
                raise StateCorruption(
                    f"{vehicle_id} reaches {arc.destination}@{arc.end} with "
                    f"{amount} {k}"
                )


def _cleaned(vehicle: str, cargo: Mapping[str, float]) -> Dict[str, float]:
    cleaned = {}
    for k, amount in cargo.items():
        if amount < -TOLERANCE:
            raise StateCorruption(f"{vehicle} would carry {amount} {k}")
        if amount > 1e-9:
            cleaned[k] = amount
    return cleaned


def propagate(
    state: InfrastructureState, plan: Plan, until: int
) -> InfrastructureState:
    """
    State of the infrastructure at ``until`` when ``plan`` is carried out.

    Vehicles are where their flows leave at ``until`` with what those flows
    carry; at the end of the plan they are where their flows arrive. Services
    whose occupancy runs past ``until`` stay in progress.

    :raises StateCorruption: If a committed flow burns other than its
        propellant rows say, or any amount would turn negative.
    """
    inputs = plan.inputs
    if not state.date < until <= inputs.end:
        raise ValueError(f"Cannot propagate from {state.date} to {until}")
    _check_committed(plan, until)
    moves = plan.moves()
    vehicles = {}
    for vehicle in inputs.vehicles:
        mine = [arc for v, arc in moves if v == vehicle.id]
        if until < inputs.end:
            current = [arc for arc in mine if arc.start == until]
            node = current[0].origin if current else None
            cargo = plan.cargo(vehicle.id, current[0]) if current else {}
        else:
            current = [arc for arc in mine if arc.end == until]
            node = current[0].destination if current else None
            cargo = plan.cargo(vehicle.id, current[0], "-") if current else {}
        if len(current) > 1:
            raise StateCorruption(f"{vehicle.id} is on {len(current)} arcs at {until}")
        if node is None:
            previous = state.vehicles[vehicle.id]
            waiting = all(arc.start > until for arc in mine)
            if not waiting or inputs.network.static.node(previous.node).is_orbital:
                raise StateCorruption(f"{vehicle.id} is nowhere at {until}")
            vehicles[vehicle.id] = previous
            continue
        vehicles[vehicle.id] = VehicleState(
            vehicle.id, node, _cleaned(vehicle.id, cargo)
        )

    grid = inputs.network.grid
    running = [(s.need, s.vehicle, s.start) for s in state.in_progress]
    running += [a for a in plan.assignments() if a[2] < until]
    in_progress = [
        InProgressService(need, vehicle, start)
        for need, vehicle, start in running
        if occupancy_end(start, need.service.duration, grid) > until
    ]
    return InfrastructureState(until, vehicles, in_progress)


def commit(
    schedule: CommittedSchedule, plan: Plan, until: int
) -> List[Tuple[ServiceNeed, str, int]]:
    """Append the actions and cash flows of ``plan`` starting before ``until``."""
    for vehicle, arc in plan.moves():
        if arc.start >= until:
            continue
        kind = {
            ArcKind.transport: ActionKind.flight,
            ArcKind.holdover: ActionKind.hold,
            ArcKind.launch: ActionKind.launch,
        }[arc.kind]
        cargo = tuple(sorted(plan.cargo(vehicle, arc).items()))
        schedule.actions.append(
            Action(
                arc.start,
                arc.end,
                vehicle,
                kind,
                arc.origin,
                arc.destination,
                cargo=cargo,
            )
        )
    for arc in plan.launches():
        cargo = plan.cargo(LAUNCHER, arc)
        if arc.start < until and cargo:
            schedule.actions.append(
                Action(
                    arc.start,
                    arc.end,
                    LAUNCHER,
                    ActionKind.launch,
                    arc.origin,
                    arc.destination,
                    "",
                    tuple(sorted(cargo.items())),
                )
            )
    started = [a for a in plan.assignments() if a[2] < until]
    grid = plan.inputs.network.grid
    for need, vehicle, start in started:
        end = occupancy_end(start, need.service.duration, grid)
        schedule.actions.append(
            Action(
                start,
                end,
                vehicle,
                ActionKind.service,
                need.satellite,
                need.satellite,
                need.id,
                tuple(sorted(need.deliveries.items())),
            )
        )
        schedule.records[need.id] = DemandRecord(need, start, vehicle)
    schedule.cash_flows.extend(plan.cash_flows(until))
    return started


@dataclass
class RunResult:
    """Outcome of one rolling-horizon run."""

    name: str
    seed: int
    schedule: CommittedSchedule
    values: List[ValuePoint]
    investment: float
    final_state: InfrastructureState

    @property
    def payback(self) -> Optional[int]:
        """First date the value is no longer negative."""
        for point in self.values:
            if point.value >= 0:
                return point.date
        return None

    def summary(self) -> dict:
        breakdown = self.schedule.breakdown()
        final = self.values[-1] if self.values else ValuePoint(0, 0.0, 0.0, 0.0)
        return dict(
            architecture=self.name,
            seed=self.seed,
            final_value=final.value,
            revenue=final.revenue,
            cost=final.cost,
            investment=self.investment,
            served=len(self.schedule.served),
            declined=len(self.schedule.declined),
            replans=len(self.schedule.replans),
            payback=self.payback,
            breakdown=breakdown.to_dict(),
        )


def value_series(
    schedule: CommittedSchedule, dates: Sequence[int], investment: float
) -> List[ValuePoint]:
    """Cumulative revenue, cost and value at each of ``dates``."""
    flows = sorted(schedule.cash_flows, key=lambda flow: flow.date)
    points = []
    revenue = cost = 0.0
    position = 0
    for date in dates:
        while position < len(flows) and flows[position].date <= date:
            flow = flows[position]
            if flow.component == "revenue":
                revenue += flow.amount
            else:
                cost += flow.amount
            position += 1
        points.append(ValuePoint(date, revenue, cost, revenue - cost - investment))
    return points


def _visible(
    needs: Sequence[ServiceNeed],
    t: int,
    end: int,
    resolved: set,
) -> List[ServiceNeed]:
    visible = []
    for need in needs:
        if need.id in resolved:
            continue
        if need.kind is DemandKind.deterministic:
            if need.occurrence >= end:
                continue
        elif need.occurrence > t:
            continue
        if any(start >= t for start in need.window):
            visible.append(need)
    return visible


def run(
    setup: RunSetup, seed: int = 0, needs: Optional[Sequence[ServiceNeed]] = None
) -> RunResult:
    """
    Schedule ``setup`` over its scheduling horizon.

    Each planning horizon sees the deterministic needs arising before its
    end and the random needs that have already arisen. Its plan is committed
    up to the next random need or the end of the control horizon, whichever
    comes first.

    :param needs: Need realization to use; drawn with ``seed`` when None.
    :raises PlanningInfeasible: If a planning horizon cannot be solved.
    """
    if needs is None:
        needs = realize_demand(setup, seed)
    horizon = setup.horizon
    end = horizon.scheduling
    random_dates = sorted(
        {n.occurrence for n in needs if n.kind is DemandKind.random}
    )
    schedule = CommittedSchedule()
    state = setup.initial_state
    schedule.states.append(state)
    resolved = {service.need.id for service in state.in_progress}
    t = state.date
    trigger, triggering = Trigger.start, ()
    while t < end:
        ph_end = min(t + horizon.planning, end)
        visible = _visible(needs, t, ph_end, resolved)
        logger.info(
            "Re-planning %s at %d (%s): %d visible needs",
            setup.name,
            t,
            trigger.value,
            len(visible),
        )
        plan = plan_horizon(setup, state, visible, ph_end, seed)
        later = [date for date in random_dates if date > t]
        until = min([t + horizon.control, end] + later[:1])
        schedule.replans.append(
            ReplanRecord(
                date=t,
                trigger=trigger,
                needs=triggering,
                visible=len(visible),
                objective=plan.solution.objective,
                status=plan.solution.status.value,
                wall_time=plan.solution.wall_time,
            )
        )
        started = commit(schedule, plan, until)
        resolved |= {need.id for need, _, _ in started}
        state = propagate(state, plan, until)
        schedule.states.append(state)
        if later and later[0] == until:
            trigger = Trigger.random_need
            triggering = tuple(
                n.id
                for n in needs
                if n.kind is DemandKind.random and n.occurrence == until
            )
        else:
            trigger, triggering = Trigger.quiet_timer, ()
        t = until

    for need in needs:
        if need.id not in schedule.records:
            schedule.records[need.id] = DemandRecord(need)
    investment = setup.investment()
    dates = setup.grid.time_nodes(0)
    values = value_series(schedule, [d for d in dates if d <= end], investment)
    return RunResult(setup.name, seed, schedule, values, investment, state)


@dataclass
class TradeResult:
    """Runs of several architectures over shared need realizations."""

    results: List[RunResult] = field(default_factory=list)
    failures: List[Tuple[str, int, str]] = field(default_factory=list)

    def architectures(self) -> List[str]:
        return sorted({result.name for result in self.results})

    def by_architecture(self, name: str) -> List[RunResult]:
        return sorted(
            (r for r in self.results if r.name == name), key=lambda r: r.seed
        )

    def mean_series(self, name: str) -> List[ValuePoint]:
        """Seed-averaged value series of architecture ``name``."""
        runs = self.by_architecture(name)
        if not runs:
            return []
        points = []
        for grouped in zip(*(r.values for r in runs)):
            count = len(grouped)
            points.append(
                ValuePoint(
                    grouped[0].date,
                    math.fsum(p.revenue for p in grouped) / count,
                    math.fsum(p.cost for p in grouped) / count,
                    math.fsum(p.value for p in grouped) / count,
                )
            )
        return points


def compare_architectures(
    setups: Sequence[RunSetup], seeds: Sequence[int], workers: int = 1
) -> TradeResult:
    """
    Run every architecture under the same need realization for each seed.

    Realizations are drawn from the first architecture's satellites and
    service types. A run failing with an :class:`OOSError` is logged and
    recorded; the other runs carry on.
    """
    trade = TradeResult()
    if not seeds or not setups:
        logger.warning(
            "Nothing to compare: %d seeds, %d architectures", len(seeds), len(setups)
        )
        return trade
    realizations = {seed: realize_demand(setups[0], seed) for seed in seeds}

    def one(job: Tuple[RunSetup, int]):
        setup, seed = job
        try:
            return run(setup, seed, realizations[seed]), None
        except OOSError as e:
            logger.warning("Run %s seed %d failed: %s", setup.name, seed, e)
            return None, (setup.name, seed, str(e))

    jobs = [(setup, seed) for setup in setups for seed in seeds]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        for result, failure in executor.map(one, jobs):
            if result is not None:
                trade.results.append(result)
            else:
                trade.failures.append(failure)
    return trade
