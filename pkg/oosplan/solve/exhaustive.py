"""
Exhaustive solver for tiny planning models.

Every combination of service assignments is ranked by profit; the first one
for which each servicer has an itinerary with enough propellant and cargo is
optimal, since every other cost of an instance without launches is fixed by
the fleet. Commodities change hands only at depots and at a servicer's own
start. The itineraries of all servicers are searched together, so that a
combination is only rejected when no choice of paths fits the depot stocks.
"""

import itertools
import logging
import time

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from oosplan.demand import BIPROPELLANT, MONOPROPELLANT, ServiceNeed
from oosplan.exceptions import InstanceTooLarge
from oosplan.model.builder import PlanningInputs
from oosplan.model.milp import Assign, Dispatch, FlowX, FlowY, MilpModel
from oosplan.model.commodities import Vehicle
from oosplan.network import ArcKind, DynamicArc, NodeKind
from oosplan.solve.external import SolveRequest
from oosplan.solve.solution import Solution, SolveStatus

logger = logging.getLogger(__name__)

MAX_SERVICERS = 2
MAX_NEEDS = 4
MAX_ORBITAL_NODES = 4
MAX_INTERVALS = 3
TOLERANCE = 1e-9

Choice = Optional[Tuple[str, int]]
Pins = Tuple[Tuple[int, str], ...]


@dataclass
class Itinerary:
    """
    One servicer's path and what it takes from or leaves at depots.

    :param arcs: Arcs flown or held over, in time order.
    :param draws: ``(depot node, time, commodity, amount)`` withdrawals.
    :param returns: ``(depot node, time, amount)`` bipropellant left at depots.
    """

    arcs: List[DynamicArc]
    draws: List[Tuple[str, int, str, float]] = field(default_factory=list)
    returns: List[Tuple[str, int, float]] = field(default_factory=list)

    @property
    def score(self) -> Tuple[float, float]:
        propellant = sum(a for _, _, k, a in self.draws if k == BIPROPELLANT)
        propellant -= sum(a for _, _, a in self.returns)
        cargo = sum(a for _, _, k, a in self.draws if k != BIPROPELLANT)
        return propellant, cargo


class ExhaustiveSolver:
    def __init__(self, inputs: PlanningInputs):
        self.inputs = inputs
        self.network = inputs.network
        self.grid = inputs.network.grid
        self.end = inputs.end
        self.nodes = {node.id: node for node in self.network.static.nodes}
        self.depot_nodes = {
            inputs.state.located(depot.id): depot for depot in inputs.depots
        }
        self._memo: Dict[tuple, List[Itinerary]] = {}
        self._check()

    def _check(self) -> None:
        inputs = self.inputs
        orbital = [n for n in self.network.static.nodes if n.is_orbital]
        intervals = (self.end - inputs.t0) // self.grid.T
        sizes = (
            (len(inputs.servicers), MAX_SERVICERS, "servicers"),
            (len(inputs.needs), MAX_NEEDS, "service needs"),
            (len(orbital), MAX_ORBITAL_NODES, "orbital nodes"),
            (intervals, MAX_INTERVALS, "intervals"),
        )
        for size, limit, label in sizes:
            if size > limit:
                raise InstanceTooLarge(f"{size} {label} exceed the limit of {limit}")
        depotless = [
            n.id
            for n in orbital
            if n.kind is NodeKind.parking and n.id not in self.depot_nodes
        ]
        if depotless and len(inputs.servicers) > 1:
            raise ValueError(f"Servicers could meet at parking nodes {depotless}")
        if self.network.launch_times:
            raise ValueError("Exhaustive solving does not support launches")
        if inputs.state.in_progress:
            raise ValueError("Exhaustive solving does not support services in progress")
        for vehicle in inputs.vehicles:
            located = inputs.state.vehicles[vehicle.id]
            if not self.nodes[located.node].is_orbital:
                raise ValueError(f"{vehicle.id} waits on the ground")
            if vehicle.is_servicer:
                extra = set(located.cargo) - {BIPROPELLANT} - set(vehicle.design.tools)
                if any(located.cargo[k] > 0 for k in extra):
                    raise ValueError(f"{vehicle.id} starts with cargo {sorted(extra)}")

    def choices(self, need: ServiceNeed) -> List[Choice]:
        options: List[Choice] = [None]
        for servicer in self.inputs.servicers:
            if servicer.has_tool(need.service.tool):
                for start in self.inputs.starts(need):
                    options.append((servicer.id, start))
        return options

    def profit(self, combination: Sequence[Choice]) -> float:
        total = 0.0
        for need, choice in zip(self.inputs.needs, combination):
            if choice is not None:
                total += need.service.revenue
                total -= need.service.delay_penalty * need.delay(choice[1])
        return total

    def pins(self, combination: Sequence[Choice]) -> Optional[Dict[str, Pins]]:
        """Where each servicer must be held over, or None on a conflict."""
        by_customer: Dict[str, set] = defaultdict(set)
        by_servicer: Dict[str, Dict[int, str]] = defaultdict(dict)
        for need, choice in zip(self.inputs.needs, combination):
            if choice is None:
                continue
            vehicle, start = choice
            occupied = set(self.inputs.occupancy(need, start))
            if by_customer[need.satellite] & occupied:
                return None
            by_customer[need.satellite] |= occupied
            for t in occupied:
                if by_servicer[vehicle].get(t, need.satellite) != need.satellite:
                    return None
                by_servicer[vehicle][t] = need.satellite
        return {
            servicer.id: tuple(sorted(by_servicer[servicer.id].items()))
            for servicer in self.inputs.servicers
        }

    def paths(
        self, vehicle: Vehicle, pins: Dict[int, str]
    ) -> Iterator[List[DynamicArc]]:
        start = self.inputs.state.located(vehicle.id)

        def extend(node: str, t: int, path: List[DynamicArc]):
            if t == self.end:
                yield list(path)
                return
            pinned = pins.get(t)
            if pinned is not None and pinned != node:
                return
            for arc in self.network.arcs_out(node, t):
                if arc.kind is ArcKind.launch:
                    continue
                if pinned is not None and arc.kind is not ArcKind.holdover:
                    continue
                path.append(arc)
                yield from extend(arc.destination, arc.end, path)
                path.pop()

        yield from extend(start, self.inputs.t0, [])

    def _deliveries(
        self, vehicle: str, combination: Sequence[Choice]
    ) -> Dict[Tuple[str, int], Dict[str, float]]:
        deliveries: Dict[Tuple[str, int], Dict[str, float]] = {}
        for need, choice in zip(self.inputs.needs, combination):
            if choice is not None and choice[0] == vehicle:
                deliveries[(need.satellite, choice[1])] = need.deliveries
        return deliveries

    def _leg(
        self,
        vehicle: Vehicle,
        path: List[DynamicArc],
        visits: List[Tuple[str, int]],
        first: int,
        last: int,
        deliveries: Dict[Tuple[str, int], Dict[str, float]],
    ) -> Optional[Tuple[float, Dict[str, float]]]:
        """
        Least bipropellant and the cargo to hold at visit ``first`` to fly the
        arcs up to visit ``last`` and make every delivery before ``last``.
        """
        design = vehicle.design
        commodities = self.inputs.commodities
        structure = design.dry_mass + vehicle.tool_mass(commodities)
        cargo: Dict[str, float] = defaultdict(float)

        def load(visit: int) -> float:
            delivered = deliveries.get(visits[visit], {})
            for k, amount in delivered.items():
                if k != BIPROPELLANT:
                    cargo[k] += amount
            return delivered.get(BIPROPELLANT, 0.0)

        needed = 0.0
        for i in range(last - 1, first - 1, -1):
            if i + 1 < last:
                needed += load(i + 1)
            if any(k not in design.cargo for k in cargo):
                return None
            mass = sum(commodities[k].unit_mass * a for k, a in cargo.items())
            if mass > design.payload_capacity + TOLERANCE:
                return None
            if path[i].kind is ArcKind.transport:
                phi = self.inputs.phi(vehicle, path[i])
                needed = (needed + phi * (structure + mass)) / (1.0 - phi)
            if needed > design.tank_capacity + TOLERANCE:
                return None
        needed += load(first)
        if any(k not in design.cargo for k in cargo):
            return None
        return needed, dict(cargo)

    def _arrival(
        self,
        vehicle: Vehicle,
        path: List[DynamicArc],
        visits: List[Tuple[str, int]],
        first: int,
        last: int,
        carried: float,
        deliveries: Dict[Tuple[str, int], Dict[str, float]],
    ) -> float:
        """Bipropellant left at visit ``last`` when holding ``carried`` at ``first``."""
        structure = vehicle.design.dry_mass + vehicle.tool_mass(self.inputs.commodities)
        amount = carried - deliveries.get(visits[first], {}).get(BIPROPELLANT, 0.0)
        amount = min(amount, vehicle.design.tank_capacity)
        for i in range(first, last):
            if path[i].kind is ArcKind.transport:
                phi = self.inputs.phi(vehicle, path[i])
                amount = amount * (1.0 - phi) - phi * structure
            if i + 1 < last:
                amount -= deliveries.get(visits[i + 1], {}).get(BIPROPELLANT, 0.0)
        return max(amount, 0.0)

    def evaluate_path(
        self,
        vehicle: Vehicle,
        path: List[DynamicArc],
        deliveries: Dict[Tuple[str, int], Dict[str, float]],
    ) -> Optional[Itinerary]:
        """
        Propellant and cargo bookkeeping along ``path``.

        The path is cut into legs at depot visits. Each leg departs with the
        least bipropellant covering its burns and deliveries, computed
        backwards from an empty arrival, and with exactly the cargo it
        delivers. The first leg flies on the servicer's own propellant unless
        it starts at a depot, and what it has left is returned to the next
        depot.
        """
        visits = [(path[0].origin, path[0].start)]
        visits += [(arc.destination, arc.end) for arc in path]
        at_depot = [node in self.depot_nodes for node, _ in visits]
        stops = [i for i in range(len(path)) if i == 0 or at_depot[i]]
        carried = self.inputs.state.vehicles[vehicle.id].cargo.get(BIPROPELLANT, 0.0)
        itinerary = Itinerary(arcs=path)
        for first, last in zip(stops, stops[1:] + [len(path)]):
            leg = self._leg(vehicle, path, visits, first, last, deliveries)
            if leg is None:
                return None
            needed, cargo = leg
            node, t = visits[first]
            if first == 0 and not at_depot[0]:
                if cargo or carried + TOLERANCE < needed:
                    return None
                left = self._arrival(
                    vehicle, path, visits, first, last, carried, deliveries
                )
                if at_depot[last] and left > TOLERANCE:
                    itinerary.returns.append((*visits[last], left))
                continue
            if first == 0 and carried > 0:
                itinerary.returns.append((node, t, carried))
            if needed > TOLERANCE:
                itinerary.draws.append((node, t, BIPROPELLANT, needed))
            for k, amount in sorted(cargo.items()):
                itinerary.draws.append((node, t, k, amount))
        return itinerary

    def itineraries(
        self, vehicle: Vehicle, pins: Pins, combination: Sequence[Choice]
    ) -> List[Itinerary]:
        """
        Every feasible itinerary of ``vehicle``, least depot draw first.

        Paths with the same depot draws and returns are interchangeable, so
        only the first of them is kept.
        """
        deliveries = self._deliveries(vehicle.id, combination)
        demand = tuple(
            sorted((visit, tuple(sorted(q.items()))) for visit, q in deliveries.items())
        )
        key = (vehicle.id, pins, demand)
        if key not in self._memo:
            found: Dict[tuple, Itinerary] = {}
            for path in self.paths(vehicle, dict(pins)):
                candidate = self.evaluate_path(vehicle, path, deliveries)
                if candidate is None:
                    continue
                exchanges = (
                    tuple((n, t, k, round(a, 9)) for n, t, k, a in candidate.draws),
                    tuple((n, t, round(a, 9)) for n, t, a in candidate.returns),
                )
                found.setdefault(exchanges, candidate)
            self._memo[key] = sorted(found.values(), key=lambda i: i.score)
        return self._memo[key]

    def depots_hold(self, itineraries: Sequence[Itinerary]) -> bool:
        """Depot stocks cover every withdrawal, in time order."""
        horizon = self.end - self.inputs.t0
        for node, depot in self.depot_nodes.items():
            stock = dict(self.inputs.state.vehicles[depot.id].cargo)
            events = []
            for itinerary in itineraries:
                for depot_node, t, amount in itinerary.returns:
                    if depot_node == node:
                        events.append((t, 0, BIPROPELLANT, amount))
                for depot_node, t, k, amount in itinerary.draws:
                    if depot_node == node:
                        events.append((t, 1, k, -amount))
            for _, _, k, amount in sorted(events):
                stock[k] = stock.get(k, 0.0) + amount
                if stock[k] < -TOLERANCE:
                    return False
            burned = depot.design.stationkeeping_rate * horizon
            if stock.get(MONOPROPELLANT, 0.0) + TOLERANCE < burned:
                return False
        return True

    def combinations(self) -> List[Tuple[Choice, ...]]:
        combos = list(itertools.product(*(self.choices(n) for n in self.inputs.needs)))
        return sorted(combos, key=lambda combo: (-self.profit(combo), repr(combo)))

    def solve(self) -> Optional[Tuple[Tuple[Choice, ...], Dict[str, Itinerary]]]:
        servicers = self.inputs.servicers
        for combination in self.combinations():
            pins = self.pins(combination)
            if pins is None:
                continue
            options = [
                self.itineraries(servicer, pins[servicer.id], combination)
                for servicer in servicers
            ]
            for chosen in itertools.product(*options):
                if self.depots_hold(chosen):
                    return combination, {
                        s.id: itinerary for s, itinerary in zip(servicers, chosen)
                    }
        return None

    def values(
        self,
        model: MilpModel,
        combination: Sequence[Choice],
        itineraries: Dict[str, Itinerary],
    ) -> np.ndarray:
        """Assignment, dispatch, vehicle flow and tool columns of the optimum."""
        values = np.zeros(model.num_variables)

        def put(index, value=1.0):
            column = model.column(index)
            if column is not None:
                values[column] = value

        for need, choice in zip(self.inputs.needs, combination):
            if choice is None:
                continue
            vehicle, start = choice
            put(Assign(need.id, vehicle, start))
            for t in self.inputs.occupancy(need, start):
                put(Dispatch(need.id, vehicle, t))
        for servicer in self.inputs.servicers:
            for arc in itineraries[servicer.id].arcs:
                key = (arc.origin, arc.destination, arc.start)
                put(FlowY(servicer.id, *key))
                for tool, count in servicer.design.tools.items():
                    put(FlowX(servicer.id, *key, tool), float(count))
        for node, depot in self.depot_nodes.items():
            for t in self.network.times[:-1]:
                put(FlowY(depot.id, node, node, t))
        return values


def solve_exhaustive(request: SolveRequest) -> Solution:
    """
    Globally optimal solution of a tiny instance by enumeration.

    Needs ``request.inputs``. The returned values cover assignments,
    dispatches, vehicle flows and integrated tools; commodity flows are left
    at zero.

    :raises InstanceTooLarge: Beyond 2 servicers, 4 needs, 4 orbital nodes or
        3 intervals.
    :raises ValueError: For launches, services in progress, ground vehicles,
        servicers starting with cargo, or several servicers sharing a network
        with a parking node that holds no depot.
    """
    if request.inputs is None:
        raise ValueError("Exhaustive solving needs the planning inputs")
    started = time.perf_counter()
    solver = ExhaustiveSolver(request.inputs)
    found = solver.solve()
    wall_time = time.perf_counter() - started
    if found is None:
        logger.info("Exhaustive search found no feasible plan")
        return Solution(SolveStatus.infeasible, wall_time=wall_time)
    combination, itineraries = found
    values = solver.values(request.model, combination, itineraries)
    objective = request.model.evaluate(values)
    logger.info("Exhaustive optimum %.2f in %.2f s", objective, wall_time)
    return Solution(
        SolveStatus.optimal,
        objective=objective,
        values=values,
        gap=0.0,
        wall_time=wall_time,
    )
