"""Assembly of the OOS logistics MILP over a time-expanded network."""

import logging
import math

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from oosplan.astro import OrbitGeometry, consumption_fraction
from oosplan.demand import ServiceNeed, build_occupancy, build_window
from oosplan.exceptions import ModelBuildError
from oosplan.model.commodities import LAUNCHER, Commodity, Vehicle
from oosplan.model.milp import Assign, Dispatch, FlowX, FlowY, MilpModel, Sense
from oosplan.network import ArcKind, DynamicArc, DynamicNetwork, LaunchSpec, NodeKind
from oosplan.state import InfrastructureState

logger = logging.getLogger(__name__)


@dataclass
class PlanningInputs:
    """
    Everything one planning-horizon model is built from.

    :param network: Time-expanded network of the horizon.
    :param vehicles: Servicers and depots, in the order used for variables.
    :param commodities: Commodity table keyed by id.
    :param needs: Service needs open during the horizon.
    :param state: Infrastructure state at the network start date.
    :param launch: Launcher costs and capacity, None when nothing is launched.
    :param geometry: Orbit geometry for burn fractions.
    :param earth_supply: Limits on what each launch site can supply over the
        horizon, by commodity; unlisted commodities are unlimited.
    """

    network: DynamicNetwork
    vehicles: Sequence[Vehicle]
    commodities: Mapping[str, Commodity]
    needs: Sequence[ServiceNeed]
    state: InfrastructureState
    launch: Optional[LaunchSpec] = None
    geometry: OrbitGeometry = field(default_factory=OrbitGeometry)
    earth_supply: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    @property
    def t0(self) -> int:
        return self.network.t0

    @property
    def end(self) -> int:
        return self.network.end

    def vehicle(self, vehicle_id: str) -> Vehicle:
        for vehicle in self.vehicles:
            if vehicle.id == vehicle_id:
                return vehicle
        raise KeyError(vehicle_id)

    @property
    def servicers(self) -> List[Vehicle]:
        return [v for v in self.vehicles if v.is_servicer]

    @property
    def depots(self) -> List[Vehicle]:
        return [v for v in self.vehicles if v.is_depot]

    def phi(self, vehicle: Vehicle, arc: DynamicArc) -> float:
        if arc.kind is not ArcKind.transport:
            return 0.0
        return consumption_fraction(arc.delta_v, vehicle.design.isp, self.geometry)

    def burns(self, vehicle: Vehicle, arc: DynamicArc) -> bool:
        """Whether ``vehicle`` consumes its burned commodity on ``arc``."""
        if vehicle.is_depot:
            return arc.kind is ArcKind.holdover and vehicle.burned() is not None
        return arc.kind is ArcKind.transport and self.phi(vehicle, arc) > 0

    def arrival(
        self, vehicle: Vehicle, arc: DynamicArc, departing: Mapping[str, float]
    ) -> Dict[str, float]:
        """Cargo reaching the end of ``arc`` when ``departing`` leaves its start."""
        arriving = dict(departing)
        if not self.burns(vehicle, arc):
            return arriving
        burned = vehicle.burned()
        if vehicle.is_depot:
            consumed = vehicle.design.stationkeeping_rate * arc.duration
        else:
            mass = vehicle.design.dry_mass + sum(
                self.commodities[k].unit_mass * amount
                for k, amount in departing.items()
            )
            consumed = self.phi(vehicle, arc) * mass
        arriving[burned] = departing.get(burned, 0.0) - consumed
        return arriving

    def starts(self, need: ServiceNeed) -> Tuple[int, ...]:
        """Window dates of ``need`` inside the horizon."""
        return tuple(
            t for t in build_window(need, self.network.grid) if self.t0 <= t < self.end
        )

    def occupancy(self, need: ServiceNeed, start: int) -> Tuple[int, ...]:
        """Occupied time nodes inside the horizon."""
        return tuple(
            t
            for t in build_occupancy(need, start, self.network.grid)
            if self.t0 <= t < self.end
        )


@dataclass
class ArcVariables:
    """Columns of one vehicle on one arc."""

    arc: DynamicArc
    vehicle: str
    y: Optional[int]
    out: Dict[str, int]
    into: Dict[str, int]


class ModelBuilder:
    """
    Declares the variables of a planning horizon and adds constraint families.

    Each ``add_*`` method appends one family of rows; :func:`assemble` calls
    them all. Failures are collected in ``failures`` rather than raised so a
    single build reports every problem.
    """

    def __init__(self, inputs: PlanningInputs):
        self.inputs = inputs
        self.model = MilpModel()
        self.failures: List[str] = []
        self.network = inputs.network
        self.end = inputs.end
        self.nodes = {node.id: node for node in self.network.static.nodes}
        self.arc_variables: List[ArcVariables] = []
        self.assignments: Dict[Tuple[str, str, int], int] = {}
        self.dispatches: Dict[Tuple[str, str, int], int] = {}
        self.fixed: Dict[Tuple[str, str, int], int] = {}
        self._holdovers: Dict[Tuple[str, str, int], ArcVariables] = {}
        self._check_inputs()
        if self.failures:
            raise ModelBuildError(self.failures)
        self.declare_variables()

    def _check_inputs(self) -> None:
        ids = [vehicle.id for vehicle in self.inputs.vehicles]
        if len(set(ids)) != len(ids) or LAUNCHER in ids:
            self.failures.append(f"vehicle ids must be unique and not {LAUNCHER!r}")
        for vehicle in self.inputs.vehicles:
            located = self.inputs.state.vehicles.get(vehicle.id)
            if located is None:
                self.failures.append(f"vehicle {vehicle.id}: no initial state")
            elif located.node not in self.nodes:
                self.failures.append(
                    f"vehicle {vehicle.id}: located at unknown node {located.node}"
                )
        for need in self.inputs.needs:
            node = self.nodes.get(need.satellite)
            if node is None or node.kind is not NodeKind.customer:
                self.failures.append(f"need {need.id}: no customer node")
        if self.inputs.launch is None and self.network.launch_times:
            self.failures.append("launch arcs present without a LaunchSpec")

    def _on_ground(self, vehicle: Vehicle, site: str) -> bool:
        located = self.inputs.state.vehicles.get(vehicle.id)
        return located is not None and located.node == site

    def vehicles_on(self, arc: DynamicArc) -> List[Vehicle]:
        if arc.kind is ArcKind.launch:
            return [v for v in self.inputs.vehicles if self._on_ground(v, arc.origin)]
        if arc.kind is ArcKind.transport:
            return self.inputs.servicers
        parking = self.nodes[arc.origin].kind is NodeKind.parking
        return [v for v in self.inputs.vehicles if v.is_servicer or parking]

    def declare_variables(self) -> None:
        model = self.model
        commodities = self.inputs.commodities
        for arc in self.network.arcs:
            key = (arc.origin, arc.destination, arc.start)
            if arc.kind is ArcKind.launch:
                if self.inputs.launch is None:
                    continue
                out = {}
                for k, commodity in commodities.items():
                    if commodity.is_tool:
                        continue
                    upper = math.inf
                    if commodity.unit_mass > 0:
                        upper = self.inputs.launch.capacity / commodity.unit_mass
                        if commodity.is_integer:
                            upper = math.floor(upper + 1e-9)
                    out[k] = model.add_variable(
                        FlowX(LAUNCHER, *key, k),
                        upper=upper,
                        integer=commodity.is_integer,
                    )
                self.arc_variables.append(ArcVariables(arc, LAUNCHER, None, out, out))
            for vehicle in self.vehicles_on(arc):
                y = model.add_variable(FlowY(vehicle.id, *key), upper=1, integer=True)
                out, into = {}, {}
                for k in vehicle.carried(commodities):
                    commodity = commodities[k]
                    capacity = vehicle.capacity(commodity)
                    out[k] = model.add_variable(
                        FlowX(vehicle.id, *key, k),
                        upper=capacity,
                        integer=commodity.is_integer,
                    )
                    into[k] = out[k]
                    if k == vehicle.burned() and self.inputs.burns(vehicle, arc):
                        into[k] = model.add_variable(
                            FlowX(vehicle.id, *key, k, "-"),
                            upper=capacity,
                            integer=commodity.is_integer,
                        )
                variables = ArcVariables(arc, vehicle.id, y, out, into)
                self.arc_variables.append(variables)
                if arc.kind is ArcKind.holdover:
                    self._holdovers[(vehicle.id, arc.origin, arc.start)] = variables

        for need in self.inputs.needs:
            for servicer in self.inputs.servicers:
                for start in self.inputs.starts(need):
                    key = (need.id, servicer.id, start)
                    self.assignments[key] = model.add_variable(
                        Assign(*key), upper=1, integer=True
                    )
                support = sorted(
                    {
                        t
                        for start in self.inputs.starts(need)
                        for t in self.inputs.occupancy(need, start)
                    }
                )
                for t in support:
                    self.dispatches[(need.id, servicer.id, t)] = model.add_variable(
                        Dispatch(need.id, servicer.id, t), upper=1, integer=True
                    )
        for service in self.inputs.state.in_progress:
            key = (service.need.id, service.vehicle, service.start)
            self.fixed[key] = model.add_variable(
                Assign(*key), lower=1, upper=1, integer=True
            )
            for t in self.inputs.occupancy(service.need, service.start):
                self.dispatches[(service.need.id, service.vehicle, t)] = (
                    model.add_variable(
                        Dispatch(service.need.id, service.vehicle, t),
                        upper=1,
                        integer=True,
                    )
                )

    def _needs(self) -> List[ServiceNeed]:
        return list(self.inputs.needs) + [s.need for s in self.inputs.state.in_progress]

    def _orbital(self, node: str) -> bool:
        return self.nodes[node].is_orbital

    def add_mass_balance(self) -> None:
        """
        Node balances of vehicles and commodities.

        Vehicles are conserved at every orbital node before the horizon end and
        each ground vehicle is launched at most once. Commodity outflow minus
        inflow plus service consumption may not exceed the supply, which is the
        state's inventory at the start date and zero afterwards.

        Commodities are pooled across vehicles only at parking nodes; anywhere
        else each vehicle keeps its own balance.
        """
        vehicle_rows = defaultdict(dict)
        commodity_rows = defaultdict(dict)
        ground_rows = defaultdict(dict)
        earth_rows = defaultdict(dict)

        def add(rows, key, column, value):
            rows[key][column] = rows[key].get(column, 0.0) + value

        def holder(node: str, vehicle: str) -> str:
            return "" if self.nodes[node].kind is NodeKind.parking else vehicle

        for av in self.arc_variables:
            arc = av.arc
            if av.y is not None:
                if self._orbital(arc.origin):
                    add(vehicle_rows, (arc.start, arc.origin, av.vehicle), av.y, 1.0)
                else:
                    add(ground_rows, (arc.origin, av.vehicle), av.y, 1.0)
                if arc.end < self.end:
                    row = (arc.end, arc.destination, av.vehicle)
                    add(vehicle_rows, row, av.y, -1.0)
            for k, column in av.out.items():
                if self._orbital(arc.origin):
                    row = (arc.start, arc.origin, holder(arc.origin, av.vehicle), k)
                    add(commodity_rows, row, column, 1.0)
                elif k in self.inputs.earth_supply.get(arc.origin, {}):
                    add(earth_rows, (arc.origin, k), column, 1.0)
            if arc.end < self.end:
                owner = holder(arc.destination, av.vehicle)
                for k, column in av.into.items():
                    row = (arc.end, arc.destination, owner, k)
                    add(commodity_rows, row, column, -1.0)

        for need in self.inputs.needs:
            for servicer in self.inputs.servicers:
                owner = holder(need.satellite, servicer.id)
                for start in self.inputs.starts(need):
                    column = self.assignments[(need.id, servicer.id, start)]
                    for k, amount in need.deliveries.items():
                        add(
                            commodity_rows,
                            (start, need.satellite, owner, k),
                            column,
                            amount,
                        )

        t0 = self.inputs.t0
        supply: Dict[Tuple[str, str], Dict[str, float]] = defaultdict(
            lambda: defaultdict(float)
        )
        for vehicle in self.inputs.vehicles:
            located = self.inputs.state.vehicles[vehicle.id]
            node = located.node
            if not self._orbital(node):
                continue
            vehicle_rows.setdefault((t0, node, vehicle.id), {})
            owner = holder(node, vehicle.id)
            for k, amount in located.cargo.items():
                supply[(node, owner)][k] += amount
                commodity_rows.setdefault((t0, node, owner, k), {})

        for (t, node, vehicle), terms in sorted(vehicle_rows.items()):
            rhs = 1.0 if t == t0 and self.inputs.state.located(vehicle) == node else 0.0
            if not terms:
                if rhs:
                    self.failures.append(f"vehicle {vehicle} has no arc at {node}@{t}")
                continue
            self.model.add_constraint(
                f"balance[{vehicle}@{node},{t}]", terms, Sense.eq, rhs
            )
        for (site, vehicle), terms in sorted(ground_rows.items()):
            self.model.add_constraint(f"ground[{vehicle}@{site}]", terms, Sense.le, 1.0)
        for (t, node, owner, k), terms in sorted(commodity_rows.items()):
            rhs = supply[(node, owner)].get(k, 0.0) if t == t0 else 0.0
            if k not in self.inputs.commodities:
                self.failures.append(f"unknown commodity {k} at {node}@{t}")
                continue
            if not terms:
                continue
            place = f"{node}/{owner}" if owner else node
            self.model.add_constraint(
                f"balance[{k}@{place},{t}]", terms, Sense.le, rhs
            )
        for (site, k), terms in sorted(earth_rows.items()):
            self.model.add_constraint(
                f"supply[{k}@{site}]",
                terms,
                Sense.le,
                self.inputs.earth_supply[site][k],
            )

    def add_flow_transformation(self) -> None:
        """
        Propellant burned along arcs.

        On a servicer transfer the arriving bipropellant is the departing
        bipropellant less ``phi`` times the departing structure, tools, cargo
        and propellant. A depot loses its station-keeping monopropellant over
        each holdover. Every other commodity passes through unchanged.
        """
        commodities = self.inputs.commodities
        for av in self.arc_variables:
            if av.y is None:
                continue
            vehicle = self.inputs.vehicle(av.vehicle)
            burned = vehicle.burned()
            if burned is None or av.into.get(burned) == av.out.get(burned):
                continue
            terms = {av.into[burned]: 1.0}
            terms[av.out[burned]] = -1.0
            if vehicle.is_depot:
                consumed = vehicle.design.stationkeeping_rate * av.arc.duration
                terms[av.y] = consumed
            else:
                phi = self.inputs.phi(vehicle, av.arc)
                terms[av.y] = phi * vehicle.design.dry_mass
                for k, column in av.out.items():
                    mass = commodities[k].unit_mass
                    terms[column] = terms.get(column, 0.0) + phi * mass
            arc = av.arc
            self.model.add_constraint(
                f"transform[{av.vehicle}:{arc.origin}->{arc.destination}@{arc.start}]",
                terms,
                Sense.eq,
                0.0,
            )

    def add_concurrency(self) -> None:
        """
        Capacities of vehicles and launchers.

        Every carried amount is bounded by its capacity times the vehicle flow,
        integrated tools travel with their servicer, servicer cargo shares the
        payload bay and each launch carries at most the launcher capacity.
        """
        commodities = self.inputs.commodities
        launches: Dict[Tuple[str, str, int], Dict[int, float]] = defaultdict(dict)
        for av in self.arc_variables:
            arc = av.arc
            label = f"{av.vehicle}:{arc.origin}->{arc.destination}@{arc.start}"
            if arc.kind is ArcKind.launch:
                terms = launches[(arc.origin, arc.destination, arc.start)]
                for k, column in av.out.items():
                    terms[column] = commodities[k].unit_mass
                if av.y is not None:
                    terms[av.y] = self.inputs.vehicle(av.vehicle).design.dry_mass
            if av.y is None:
                continue
            vehicle = self.inputs.vehicle(av.vehicle)
            payload = {}
            for k, column in av.out.items():
                commodity = commodities[k]
                capacity = vehicle.capacity(commodity)
                if commodity.is_tool:
                    self.model.add_constraint(
                        f"tool[{k}:{label}]", {column: 1.0, av.y: -capacity}, Sense.eq
                    )
                    continue
                self.model.add_constraint(
                    f"capacity[{k}:{label}]", {column: 1.0, av.y: -capacity}, Sense.le
                )
                if vehicle.is_servicer and k in vehicle.design.cargo:
                    payload[column] = commodity.unit_mass
            if payload:
                payload[av.y] = -vehicle.design.payload_capacity
                self.model.add_constraint(f"payload[{label}]", payload, Sense.le)
        for (origin, destination, start), terms in sorted(launches.items()):
            self.model.add_constraint(
                f"launch[{origin}->{destination}@{start}]",
                terms,
                Sense.le,
                self.inputs.launch.capacity,
            )

    def add_service_linking(self) -> None:
        """Dispatch of a servicer follows from its assignment and occupancy."""
        for need in self.inputs.needs:
            for servicer in self.inputs.servicers:
                terms_by_time: Dict[int, Dict[int, float]] = defaultdict(dict)
                for start in self.inputs.starts(need):
                    h = self.assignments[(need.id, servicer.id, start)]
                    for t in self.inputs.occupancy(need, start):
                        terms_by_time[t][h] = -1.0
                for t, terms in sorted(terms_by_time.items()):
                    terms[self.dispatches[(need.id, servicer.id, t)]] = 1.0
                    self.model.add_constraint(
                        f"dispatch[{need.id}:{servicer.id}@{t}]", terms, Sense.eq
                    )
        for service in self.inputs.state.in_progress:
            key = (service.need.id, service.vehicle, service.start)
            for t in self.inputs.occupancy(service.need, service.start):
                b = self.dispatches[(service.need.id, service.vehicle, t)]
                self.model.add_constraint(
                    f"dispatch[{service.need.id}:{service.vehicle}@{t}]",
                    {b: 1.0, self.fixed[key]: -1.0},
                    Sense.eq,
                )

    def add_assignment_constraints(self) -> None:
        """Each need is served at most once; one service per customer at a time."""
        by_need: Dict[str, Dict[int, float]] = defaultdict(dict)
        for (need, _, _), column in list(self.assignments.items()) + list(
            self.fixed.items()
        ):
            by_need[need][column] = 1.0
        for need, terms in by_need.items():
            self.model.add_constraint(f"once[{need}]", terms, Sense.le, 1.0)

        satellites = {need.id: need.satellite for need in self._needs()}
        by_customer: Dict[Tuple[str, int], Dict[int, float]] = defaultdict(dict)
        for (need, _, t), column in self.dispatches.items():
            by_customer[(satellites[need], t)][column] = 1.0
        for (satellite, t), terms in sorted(by_customer.items()):
            if len(terms) > 1:
                self.model.add_constraint(
                    f"exclusive[{satellite}@{t}]", terms, Sense.le, 1.0
                )

    def add_tool_presence(self) -> None:
        """A dispatched servicer holds over at the customer with the needed tool."""
        needs = {need.id: need for need in self._needs()}
        rows: Dict[Tuple[str, str, int, str], Dict[int, float]] = defaultdict(dict)
        for (need_id, vehicle, t), column in self.dispatches.items():
            need = needs[need_id]
            rows[(vehicle, need.satellite, t, need.service.tool)][column] = -1.0
        for (vehicle, satellite, t, tool), terms in sorted(rows.items()):
            holdover = self._holdovers.get((vehicle, satellite, t))
            if holdover is not None and tool in holdover.out:
                terms[holdover.out[tool]] = 1.0
            self.model.add_constraint(
                f"tool_presence[{vehicle}:{tool}@{satellite},{t}]",
                terms,
                Sense.ge,
                0.0,
            )

    def build_objective(self) -> None:
        """Revenues less procurement, launch, delay and operating costs."""
        model = self.model
        commodities = self.inputs.commodities
        needs = {need.id: need for need in self.inputs.needs}
        for (need_id, _, start), column in self.assignments.items():
            need = needs[need_id]
            model.add_objective_term("revenue", column, need.service.revenue)
            penalty = need.service.delay_penalty * need.delay(start)
            if penalty:
                model.add_objective_term("delay", column, penalty)
        for av in self.arc_variables:
            arc = av.arc
            vehicle = None if av.y is None else self.inputs.vehicle(av.vehicle)
            if not self._orbital(arc.origin):
                launch_cost = self.inputs.launch.cost_per_kg
                for k, column in av.out.items():
                    commodity = commodities[k]
                    if commodity.cost:
                        model.add_objective_term("pdm", column, commodity.cost)
                    if commodity.unit_mass:
                        model.add_objective_term(
                            "launch", column, launch_cost * commodity.unit_mass
                        )
                if vehicle is not None:
                    model.add_objective_term("pdm", av.y, vehicle.design.cost)
                    model.add_objective_term(
                        "launch", av.y, launch_cost * vehicle.design.dry_mass
                    )
                continue
            if vehicle is None:
                continue
            rate = vehicle.design.operating_cost * arc.duration
            if rate:
                component = "depots" if vehicle.is_depot else "servicers"
                model.add_objective_term(component, av.y, rate)


def assemble(inputs: PlanningInputs) -> MilpModel:
    """
    Build the complete planning model.

    :param inputs: Network, fleet, needs and initial state of the horizon.
    :returns: The model, with deterministic variable and row order.
    :raises ModelBuildError: Listing every failure met while building.
    """
    builder = ModelBuilder(inputs)
    builder.add_mass_balance()
    builder.add_flow_transformation()
    builder.add_concurrency()
    builder.add_service_linking()
    builder.add_assignment_constraints()
    builder.add_tool_presence()
    builder.build_objective()
    if builder.failures:
        raise ModelBuildError(builder.failures)
    logger.info("Assembled model %s", builder.model.summary())
    return builder.model
