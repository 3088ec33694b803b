"""Static OOS logistics network and its time expansion."""

import logging

from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Set, Tuple

from oosplan.astro import (
    SECONDS_PER_DAY,
    OrbitGeometry,
    PhasingSolution,
    relative_angle,
    solve_phasing,
)
from oosplan.exceptions import NoFeasibleTransfer

if TYPE_CHECKING:
    from oosplan.demand import ServiceNeed

logger = logging.getLogger(__name__)


class NodeKind(Enum):
    """Classes of static network nodes"""

    customer = "customer"
    parking = "parking"
    earth = "earth"


class ArcKind(Enum):
    """Classes of network arcs"""

    transport = "transport"
    holdover = "holdover"
    launch = "launch"


@dataclass(frozen=True)
class Node:
    """
    Node of the static network.

    :param id: Unique node id.
    :param kind: Customer slot, parking slot (depot) or launch site.
    :param longitude: Deg East in [-180, 180) for orbital nodes, None on Earth.
    :param label: Free text, e.g. the satellite name.
    """

    id: str
    kind: NodeKind
    longitude: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.kind is NodeKind.earth:
            if self.longitude is not None:
                raise ValueError(f"Earth node {self.id} cannot have a longitude")
        elif self.longitude is None or not -180.0 <= self.longitude < 180.0:
            raise ValueError(
                f"Orbital node {self.id} needs a longitude in [-180, 180), "
                f"got {self.longitude}"
            )

    @property
    def is_orbital(self) -> bool:
        return self.kind is not NodeKind.earth


@dataclass(frozen=True)
class StaticArc:
    origin: str
    destination: str
    kind: ArcKind
    delta_v: float = 0.0
    phasing: Optional[PhasingSolution] = None


@dataclass(frozen=True)
class TimeGrid:
    """
    Time discretization of the dynamic network, all lengths in days.

    :param dt: Spaceflight step length.
    :param T: Service time interval.
    :param n: Spaceflight steps opening each interval.
    :param horizon: Total length covered, a multiple of ``T``.
    """

    dt: int
    T: int
    n: int
    horizon: int

    def __post_init__(self):
        if self.dt <= 0 or self.n < 1:
            raise ValueError("dt must be positive and n at least 1")
        if self.n * self.dt >= self.T:
            raise ValueError(
                f"n*dt = {self.n * self.dt} must be shorter than T = {self.T}"
            )
        if self.horizon <= 0 or self.horizon % self.T:
            raise ValueError(
                f"horizon {self.horizon} must be a positive multiple of T {self.T}"
            )

    @property
    def intervals(self) -> int:
        return self.horizon // self.T

    def step(self, t: int) -> int:
        """Index m of time node ``kT + m*dt``; ``n`` and beyond are service steps."""
        return (t % self.T) // self.dt

    def is_time_node(self, t: int) -> bool:
        offset = t % self.T
        return offset % self.dt == 0 and offset // self.dt <= self.n

    def is_spaceflight_node(self, t: int) -> bool:
        return self.is_time_node(t) and self.step(t) < self.n

    def nodes_between(self, start: int, stop: int) -> List[int]:
        """Lattice points ``kT + m*dt`` (m = 0..n) with ``start <= t < stop``."""
        nodes = []
        k = start // self.T
        while k * self.T < stop:
            for m in range(self.n + 1):
                t = k * self.T + m * self.dt
                if start <= t < stop:
                    nodes.append(t)
            k += 1
        return nodes

    def time_nodes(self, t0: int = 0) -> List[int]:
        if t0 % self.T:
            raise ValueError(f"Start date {t0} must be a multiple of T {self.T}")
        return self.nodes_between(t0, t0 + self.horizon) + [t0 + self.horizon]

    def interval_start(self, t: int) -> int:
        return (t // self.T) * self.T


@dataclass(frozen=True)
class StaticNetwork:
    nodes: Tuple[Node, ...]
    arcs: Tuple[StaticArc, ...]
    warnings: Tuple[str, ...] = ()

    def node(self, node_id: str) -> Node:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def ids(self, kind: Optional[NodeKind] = None) -> List[str]:
        return [node.id for node in self.nodes if kind is None or node.kind is kind]

    @property
    def customers(self) -> List[str]:
        return self.ids(NodeKind.customer)

    @property
    def parkings(self) -> List[str]:
        return self.ids(NodeKind.parking)

    @property
    def earths(self) -> List[str]:
        return self.ids(NodeKind.earth)

    def arc(self, origin: str, destination: str) -> Optional[StaticArc]:
        for arc in self.arcs:
            if arc.origin == origin and arc.destination == destination:
                return arc
        return None


def build_static(
    nodes: Iterable[Node],
    tof_max_days: float,
    geom: OrbitGeometry = OrbitGeometry(),
) -> StaticNetwork:
    """
    Build the static network of launch, servicer and holdover arcs.

    Servicer arcs join the parking slots to the customers and the customers to
    each other; each carries the delta-V of its cheapest phasing maneuver
    within ``tof_max_days``. Pairs with no feasible maneuver are left out and
    reported in ``warnings``.

    :param nodes: Earth, parking and customer nodes.
    :param tof_max_days: Longest allowed flight, days (the spaceflight step).
    :param geom: Orbit geometry.
    """
    nodes = tuple(nodes)
    seen: Set[str] = set()
    for node in nodes:
        if node.id in seen:
            raise ValueError(f"Duplicate node id: {node.id}")
        seen.add(node.id)

    arcs: List[StaticArc] = []
    warnings: List[str] = []
    earths = [node for node in nodes if node.kind is NodeKind.earth]
    parkings = [node for node in nodes if node.kind is NodeKind.parking]
    orbital = [node for node in nodes if node.is_orbital]

    for earth in earths:
        for parking in parkings:
            arcs.append(StaticArc(earth.id, parking.id, ArcKind.launch))
    tof_max = tof_max_days * SECONDS_PER_DAY
    for origin in orbital:
        for destination in orbital:
            if origin.id == destination.id:
                continue
            if origin.kind is NodeKind.parking and destination.kind is NodeKind.parking:
                continue
            alpha = relative_angle(origin.longitude, destination.longitude)
            try:
                phasing = solve_phasing(alpha, geom, tof_max)
            except NoFeasibleTransfer as e:
                message = f"arc {origin.id}->{destination.id} omitted: {e}"
                logger.warning(message)
                warnings.append(message)
                continue
            arcs.append(
                StaticArc(
                    origin.id,
                    destination.id,
                    ArcKind.transport,
                    delta_v=phasing.delta_v,
                    phasing=phasing,
                )
            )
    for node in orbital:
        arcs.append(StaticArc(node.id, node.id, ArcKind.holdover))
    return StaticNetwork(nodes=nodes, arcs=tuple(arcs), warnings=tuple(warnings))


def prune_to_demand(
    static: StaticNetwork,
    needs: Iterable["ServiceNeed"],
    occupied: Iterable[str] = (),
) -> StaticNetwork:
    """
    Drop customer nodes with no need in the planning horizon.

    :param needs: Needs of the planning horizon; only their satellites count.
    :param occupied: Nodes holding a vehicle, kept reachable regardless.
    """
    keep = {need.satellite for need in needs} | set(occupied)
    nodes = tuple(
        node
        for node in static.nodes
        if node.kind is not NodeKind.customer or node.id in keep
    )
    kept = {node.id for node in nodes}
    arcs = tuple(
        arc for arc in static.arcs if arc.origin in kept and arc.destination in kept
    )
    return StaticNetwork(nodes=nodes, arcs=arcs, warnings=static.warnings)


@dataclass(frozen=True)
class LaunchSpec:
    """
    Launcher serving the parking slots.

    :param period: Days between launch opportunities.
    :param offset: Date of the first opportunity.
    :param capacity: Payload mass per launch, kg.
    :param cost_per_kg: Launch price, $/kg.
    """

    period: int
    offset: int = 0
    capacity: float = 8300.0
    cost_per_kg: float = 11300.0

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError(f"Launch period must be positive, got {self.period}")
        if self.capacity < 0 or self.cost_per_kg < 0:
            raise ValueError("Launch capacity and cost must be nonnegative")

    def dates(self, start: int, stop: int) -> List[int]:
        first = self.offset
        if first < start:
            first += -(-(start - first) // self.period) * self.period
        return list(range(first, stop, self.period))


@dataclass(frozen=True)
class DynamicArc:
    origin: str
    destination: str
    kind: ArcKind
    start: int
    duration: int
    delta_v: float = 0.0

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass
class DynamicNetwork:
    static: StaticNetwork
    grid: TimeGrid
    t0: int
    times: Tuple[int, ...]
    arcs: Tuple[DynamicArc, ...]
    _out: Dict[Tuple[str, int], List[DynamicArc]] = field(
        default_factory=dict, repr=False
    )
    _in: Dict[Tuple[str, int], List[DynamicArc]] = field(
        default_factory=dict, repr=False
    )

    def __post_init__(self):
        out, into = defaultdict(list), defaultdict(list)
        for arc in self.arcs:
            out[(arc.origin, arc.start)].append(arc)
            into[(arc.destination, arc.end)].append(arc)
        self._out, self._in = dict(out), dict(into)

    @property
    def end(self) -> int:
        return self.times[-1]

    def arcs_out(self, node: str, t: int) -> List[DynamicArc]:
        return self._out.get((node, t), [])

    def arcs_in(self, node: str, t: int) -> List[DynamicArc]:
        return self._in.get((node, t), [])

    def next_time(self, t: int) -> int:
        return self.times[bisect_right(self.times, t)]

    @property
    def launch_times(self) -> List[int]:
        return sorted({arc.start for arc in self.arcs if arc.kind is ArcKind.launch})

    def to_edge_list(self, file_path: Path) -> None:
        """Write one ``origin@t -> destination@t' kind delta_v`` line per arc."""
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w") as edge_file:
            edge_file.write(
                f"# nodes {len(self.static.nodes)} times {len(self.times)}\n"
            )
            for node in self.static.nodes:
                edge_file.write(
                    f"# node {node.id} {node.kind.value} {node.longitude}\n"
                )
            for arc in self.arcs:
                edge_file.write(
                    f"{arc.origin}@{arc.start} -> {arc.destination}@{arc.end} "
                    f"{arc.kind.value} {arc.delta_v:.9f}\n"
                )


def expand(
    static: StaticNetwork,
    grid: TimeGrid,
    t0: int = 0,
    launch: Optional[LaunchSpec] = None,
) -> DynamicNetwork:
    """
    Replicate the static network over the time grid starting at ``t0``.

    Transport arcs depart at spaceflight nodes and last one spaceflight step.
    Holdover arcs join consecutive time nodes at orbital nodes, bridging the
    service step. Launch arcs depart at the first spaceflight node on or after
    each launch date; without a launch window there are none.
    """
    times = tuple(grid.time_nodes(t0))
    end = times[-1]
    launch_starts: Set[int] = set()
    if launch is not None:
        spaceflight = [t for t in times[:-1] if grid.is_spaceflight_node(t)]
        for date in launch.dates(t0, end):
            later = [t for t in spaceflight if t >= date]
            if later:
                launch_starts.add(later[0])

    arcs: List[DynamicArc] = []
    for index, t in enumerate(times[:-1]):
        following = times[index + 1]
        flight = grid.is_spaceflight_node(t)
        for arc in static.arcs:
            if arc.kind is ArcKind.holdover:
                arcs.append(
                    DynamicArc(arc.origin, arc.destination, arc.kind, t, following - t)
                )
            elif flight and (arc.kind is ArcKind.transport or t in launch_starts):
                arcs.append(
                    DynamicArc(
                        arc.origin,
                        arc.destination,
                        arc.kind,
                        t,
                        grid.dt,
                        arc.delta_v,
                    )
                )
    return DynamicNetwork(
        static=static, grid=grid, t0=t0, times=times, arcs=tuple(arcs)
    )
