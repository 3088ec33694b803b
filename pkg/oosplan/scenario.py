"""
Scenario files: customer fleet, service catalogue, infrastructure and grid.

Scenarios are JSON documents whose field names carry their units
(``revenue_usd_m``, ``duration_days``, ``dry_mass_kg``...). Loading collects
every problem found before raising :class:`ScenarioError`.
"""

import json
import logging
import math

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from oosplan.astro import DEFAULT_R_CRIT, G0, MU_EARTH, R_GEO, OrbitGeometry
from oosplan.demand import (
    BIPROPELLANT,
    MONOPROPELLANT,
    DemandKind,
    Satellite,
    ServiceNeed,
    ServiceType,
    build_window,
    occupancy_end,
)
from oosplan.exceptions import ScenarioError
from oosplan.horizon import HorizonConfig, RunSetup
from oosplan.model.commodities import (
    Commodity,
    CommodityClass,
    Vehicle,
    VehicleDesign,
    VehicleRole,
    commodity_table,
)
from oosplan.network import LaunchSpec, Node, NodeKind, StaticNetwork, TimeGrid
from oosplan.network import build_static
from oosplan.state import InProgressService, InfrastructureState, VehicleState

logger = logging.getLogger(__name__)

DATA_DIR: Path = Path(__file__).parent / "data"
USD_M = 1e6

_MISSING = object()


@dataclass(frozen=True)
class FleetEntry:
    """
    :param id: Vehicle id.
    :param design: Servicer or depot design name.
    :param node: Where the vehicle is at the start: a parking slot, a
        satellite, or a launch site when it waits to be launched.
    :param cargo: Commodities on board besides integrated tools.
    """

    id: str
    design: str
    node: str
    cargo: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class InProgressEntry:
    """A service started before the scenario start date."""

    vehicle: str
    satellite: str
    service: str
    occurrence: int
    start: int


@dataclass
class Scenario:
    name: str
    geometry: OrbitGeometry
    grid: TimeGrid
    horizon: HorizonConfig
    launch_sites: List[str]
    parking: List[Node]
    satellites: List[Satellite]
    commodities: Dict[str, Commodity]
    service_types: List[ServiceType]
    designs: Dict[str, VehicleDesign]
    fleet: List[FleetEntry]
    in_progress: List[InProgressEntry] = field(default_factory=list)
    launch: LaunchSpec = field(default_factory=lambda: LaunchSpec(period=30))
    launches_enabled: bool = False
    earth_supply: Dict[str, Dict[str, float]] = field(default_factory=dict)
    seeds: List[int] = field(default_factory=lambda: [0])

    def nodes(self) -> List[Node]:
        nodes = [Node(site, NodeKind.earth) for site in self.launch_sites]
        nodes += list(self.parking)
        nodes += [
            Node(s.name, NodeKind.customer, s.longitude, s.name)
            for s in self.satellites
        ]
        return nodes

    def static_network(self) -> StaticNetwork:
        return build_static(self.nodes(), self.grid.dt, self.geometry)

    def service_type(self, name: str) -> ServiceType:
        for service in self.service_types:
            if service.name == name:
                return service
        raise KeyError(name)

    def satellite(self, name: str) -> Satellite:
        for satellite in self.satellites:
            if satellite.name == name:
                return satellite
        raise KeyError(name)

    def vehicles(self) -> List[Vehicle]:
        return [Vehicle(entry.id, self.designs[entry.design]) for entry in self.fleet]

    def in_progress_services(self) -> List[InProgressService]:
        services = []
        for entry in self.in_progress:
            satellite = self.satellite(entry.satellite)
            need = ServiceNeed(
                id=f"p:{entry.satellite}:{entry.service}:{entry.start}",
                satellite=entry.satellite,
                service=self.service_type(entry.service),
                occurrence=entry.occurrence,
                propellant=satellite.propellant,
            ).with_window(self.grid)
            services.append(InProgressService(need, entry.vehicle, entry.start))
        return services

    def initial_state(self) -> InfrastructureState:
        """State at date 0; servicers carry their integrated tools."""
        vehicles = {}
        for entry in self.fleet:
            design = self.designs[entry.design]
            cargo = {k: float(v) for k, v in entry.cargo.items() if v}
            for tool, count in design.tools.items():
                if count:
                    cargo[tool] = float(count)
            vehicles[entry.id] = VehicleState(entry.id, entry.node, cargo)
        return InfrastructureState(0, vehicles, self.in_progress_services())

    def setup(self, **options) -> RunSetup:
        """
        Rolling-horizon setup of this scenario.

        :param options: ``gap``, ``time_limit``, ``settings`` or ``solver``
            overrides passed on to :class:`RunSetup`.
        """
        return RunSetup(
            name=self.name,
            static=self.static_network(),
            grid=self.grid,
            horizon=self.horizon,
            vehicles=self.vehicles(),
            commodities=self.commodities,
            satellites=self.satellites,
            service_types=self.service_types,
            initial_state=self.initial_state(),
            launch=self.launch if self.launches_enabled else None,
            launch_cost_per_kg=self.launch.cost_per_kg,
            geometry=self.geometry,
            earth_supply=self.earth_supply,
            **options,
        )

    def with_fleet_size(self, count: int) -> "Scenario":
        """
        Same scenario with ``count`` customer satellites.

        Satellites hosting a vehicle or an ongoing service are always kept;
        the others are kept in file order, and missing ones are added evenly
        spread in longitude with the first satellite as template.
        """
        if count < 0:
            raise ValueError(f"Fleet size must be nonnegative, got {count}")
        required = {e.node for e in self.fleet}
        required |= {e.satellite for e in self.in_progress}
        kept = [s for s in self.satellites if s.name in required]
        for satellite in self.satellites:
            if len(kept) >= count:
                break
            if satellite not in kept:
                kept.append(satellite)
        taken = {s.name for s in kept} | {n.id for n in self.parking}
        template = self.satellites[0] if self.satellites else Satellite("GEO", 0.0)
        missing = count - len(kept)
        for index in range(max(missing, 0)):
            number = index + 1
            while f"GEO-{number:03d}" in taken:
                number += missing
            name = f"GEO-{number:03d}"
            taken.add(name)
            longitude = -180.0 + (index + 0.5) * 360.0 / missing
            kept.append(
                Satellite(
                    name,
                    round(longitude, 6),
                    template.wet_mass,
                    template.propellant,
                )
            )
        logger.info("Scenario %s resized to %d satellites", self.name, len(kept))
        return Scenario(
            **{
                **self.__dict__,
                "name": f"{self.name}-{count}",
                "satellites": kept,
            }
        )

    def to_dict(self) -> dict:
        launch = self.launch
        return dict(
            name=self.name,
            orbit=dict(
                radius_km=self.geometry.r,
                critical_radius_km=self.geometry.r_crit,
                mu_km3_per_s2=self.geometry.mu,
                g0_m_per_s2=self.geometry.g0,
            ),
            time_grid=dict(
                dt_days=self.grid.dt, interval_days=self.grid.T, steps=self.grid.n
            ),
            horizon=dict(
                planning_days=self.horizon.planning,
                control_days=self.horizon.control,
                scheduling_days=self.horizon.scheduling,
            ),
            launch_sites=[dict(id=site) for site in self.launch_sites],
            parking=[dict(id=n.id, longitude_deg=n.longitude) for n in self.parking],
            satellites=[
                dict(
                    name=s.name,
                    longitude_deg=s.longitude,
                    wet_mass_kg=s.wet_mass,
                    propellant=s.propellant,
                    phase_offsets_days=dict(s.phase_offsets),
                )
                for s in self.satellites
            ],
            commodities=[
                dict(
                    id=c.id,
                    kind=c.kind.value,
                    unit_mass_kg=c.unit_mass,
                    cost_usd=c.cost,
                )
                for c in self.commodities.values()
            ],
            service_types=[_service_to_dict(s) for s in self.service_types],
            servicer_designs=[
                _design_to_dict(d) for d in self.designs.values() if d.is_servicer
            ],
            depot_designs=[
                _design_to_dict(d) for d in self.designs.values() if d.is_depot
            ],
            fleet=[
                dict(id=e.id, design=e.design, node=e.node, cargo=dict(e.cargo))
                for e in self.fleet
            ],
            in_progress=[
                dict(
                    vehicle=e.vehicle,
                    satellite=e.satellite,
                    service=e.service,
                    occurrence_day=e.occurrence,
                    start_day=e.start,
                )
                for e in self.in_progress
            ],
            launch=dict(
                enabled=self.launches_enabled,
                period_days=launch.period,
                offset_days=launch.offset,
                capacity_kg=launch.capacity,
                cost_usd_per_kg=launch.cost_per_kg,
            ),
            earth_supply={
                site: dict(amounts) for site, amounts in self.earth_supply.items()
            },
            seeds=list(self.seeds),
        )

    @classmethod
    def from_dict(cls, data: Mapping, source: str = "scenario") -> "Scenario":
        """
        Validate ``data`` and build the scenario.

        :raises ScenarioError: Listing every problem with its field path.
        """
        return _ScenarioParser(data, source).parse()


def _service_to_dict(service: ServiceType) -> dict:
    interoccurrence = service.interoccurrence
    return dict(
        name=service.name,
        kind=service.kind.value,
        revenue_usd_m=service.revenue / USD_M,
        delay_penalty_usd_per_day=service.delay_penalty,
        duration_days=service.duration,
        window_days=service.window_length,
        interoccurrence_days=None if math.isinf(interoccurrence) else interoccurrence,
        tool=service.tool,
        propellant_kg=service.propellant_kg,
        spares=service.spares,
    )


def _design_to_dict(design: VehicleDesign) -> dict:
    common = dict(
        name=design.name,
        dry_mass_kg=design.dry_mass,
        cost_usd_m=design.cost / USD_M,
        operating_cost_usd_per_day=design.operating_cost,
    )
    if design.is_depot:
        return dict(
            common,
            storage=dict(design.storage),
            stationkeeping_kg_per_day=design.stationkeeping_rate,
        )
    return dict(
        common,
        tank_capacity_kg=design.tank_capacity,
        payload_capacity_kg=design.payload_capacity,
        isp_s=design.isp,
        tools=dict(design.tools),
        cargo=list(design.cargo),
    )


def _number(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {value!r}")
    return float(value)


def _nonnegative(value: Any) -> float:
    number = _number(value)
    if number < 0:
        raise ValueError(f"must be nonnegative, got {value!r}")
    return number


def _positive(value: Any) -> float:
    number = _number(value)
    if number <= 0:
        raise ValueError(f"must be positive, got {value!r}")
    return number


def _days(value: Any) -> int:
    number = _number(value)
    if number != int(number):
        raise ValueError(f"expected a whole number of days, got {value!r}")
    return int(number)


def _count(value: Any) -> int:
    number = _days(value)
    if number < 0:
        raise ValueError(f"must be nonnegative, got {value!r}")
    return number


def _text(value: Any) -> str:
    if not isinstance(value, str) or not value:
        raise ValueError(f"expected a non-empty string, got {value!r}")
    return value


def _flag(value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"expected true or false, got {value!r}")
    return value


def _interoccurrence(value: Any) -> float:
    return math.inf if value is None else _positive(value)


def _amounts(value: Any) -> Dict[str, float]:
    if not isinstance(value, Mapping):
        raise ValueError(f"expected an object, got {value!r}")
    return {_text(k): _nonnegative(v) for k, v in value.items()}


def _names(value: Any) -> tuple:
    if not isinstance(value, list):
        raise ValueError(f"expected a list, got {value!r}")
    return tuple(_text(item) for item in value)


class _Fields:
    """Typed access to one JSON object, recording problems by field path."""

    def __init__(self, parser: "_ScenarioParser", data: Any, path: str):
        self.parser = parser
        self.path = path
        self.data = data if isinstance(data, Mapping) else {}
        if not isinstance(data, Mapping):
            parser.problems.append(f"{path}: expected an object")

    def get(self, key: str, kind: Callable[[Any], Any], default: Any = _MISSING):
        where = f"{self.path}.{key}" if self.path else key
        if key not in self.data:
            if default is _MISSING:
                self.parser.problems.append(f"{where}: required field missing")
                return None
            logger.info("%s: %s defaults to %r", self.parser.source, where, default)
            return default
        try:
            return kind(self.data[key])
        except (TypeError, ValueError) as e:
            self.parser.problems.append(f"{where}: {e}")
            return None

    def items(self, key: str, default: Any = _MISSING) -> List["_Fields"]:
        value = self.get(key, list, default)
        if value is None:
            return []
        where = f"{self.path}.{key}" if self.path else key
        return [
            _Fields(self.parser, item, f"{where}[{index}]")
            for index, item in enumerate(value)
        ]


class _ScenarioParser:
    def __init__(self, data: Any, source: str):
        self.source = source
        self.problems: List[str] = []
        self.root = _Fields(self, data, "")

    def build(self, path: str, factory: Callable, *args, **kwargs):
        if any(arg is None for arg in args) or None in kwargs.values():
            return None
        try:
            return factory(*args, **kwargs)
        except ValueError as e:
            self.problems.append(f"{path}: {e}")
            return None

    def fail(self, path: str, message: str) -> None:
        self.problems.append(f"{path}: {message}")

    def parse(self) -> Scenario:
        root = self.root
        name = root.get("name", _text, Path(self.source).stem or "scenario")
        geometry = self.orbit(_Fields(self, root.data.get("orbit", {}), "orbit"))
        grid_fields = _Fields(self, root.data.get("time_grid"), "time_grid")
        horizon = self.horizon(_Fields(self, root.data.get("horizon"), "horizon"))
        grid = None
        if horizon is not None:
            grid = self.build(
                "time_grid",
                TimeGrid,
                grid_fields.get("dt_days", _days),
                grid_fields.get("interval_days", _days),
                grid_fields.get("steps", _days),
                horizon.scheduling,
            )
        if grid is not None and horizon is not None:
            self.build("horizon", horizon.check_grid, grid)

        launch_sites = [
            item.get("id", _text) for item in root.items("launch_sites", [])
        ]
        parking = [
            self.build(
                item.path,
                Node,
                item.get("id", _text),
                NodeKind.parking,
                item.get("longitude_deg", _number),
            )
            for item in root.items("parking")
        ]
        satellites = [self.satellite(item) for item in root.items("satellites", [])]
        commodities = {}
        for item in root.items("commodities"):
            commodity = self.build(
                item.path,
                Commodity,
                item.get("id", _text),
                item.get("kind", CommodityClass),
                item.get("unit_mass_kg", _nonnegative, 1.0),
                item.get("cost_usd", _nonnegative, 0.0),
            )
            if commodity is not None:
                if commodity.id in commodities:
                    self.fail(item.path, f"duplicate commodity {commodity.id}")
                commodities[commodity.id] = commodity
        service_types = [self.service(item) for item in root.items("service_types")]
        designs = {}
        for key, role in (
            ("servicer_designs", VehicleRole.servicer),
            ("depot_designs", VehicleRole.depot),
        ):
            for item in root.items(key, []):
                design = self.design(item, role)
                if design is not None:
                    if design.name in designs:
                        self.fail(item.path, f"duplicate design {design.name}")
                    designs[design.name] = design
        fleet = [
            self.build(
                item.path,
                FleetEntry,
                item.get("id", _text),
                item.get("design", _text),
                item.get("node", _text),
                item.get("cargo", _amounts, {}),
            )
            for item in root.items("fleet")
        ]
        in_progress = [
            self.build(
                item.path,
                InProgressEntry,
                item.get("vehicle", _text),
                item.get("satellite", _text),
                item.get("service", _text),
                item.get("occurrence_day", _days),
                item.get("start_day", _days),
            )
            for item in root.items("in_progress", [])
        ]
        launch_fields = _Fields(self, root.data.get("launch", {}), "launch")
        launches_enabled = launch_fields.get("enabled", _flag, False)
        launch = self.build(
            "launch",
            LaunchSpec,
            launch_fields.get("period_days", _days, 30),
            launch_fields.get("offset_days", _days, 0),
            launch_fields.get("capacity_kg", _nonnegative, 8300.0),
            launch_fields.get("cost_usd_per_kg", _nonnegative, 11300.0),
        )
        earth_supply = {}
        supply = root.get("earth_supply", dict, {}) or {}
        for site, amounts in supply.items():
            try:
                earth_supply[site] = _amounts(amounts)
            except ValueError as e:
                self.fail(f"earth_supply.{site}", str(e))
        seeds = root.get("seeds", lambda v: [_count(s) for s in v], [0])

        if self.problems:
            raise ScenarioError(self.problems)
        scenario = Scenario(
            name=name,
            geometry=geometry,
            grid=grid,
            horizon=horizon,
            launch_sites=launch_sites,
            parking=parking,
            satellites=satellites,
            commodities=commodity_table(commodities),
            service_types=service_types,
            designs=designs,
            fleet=fleet,
            in_progress=in_progress,
            launch=launch,
            launches_enabled=launches_enabled,
            earth_supply=earth_supply,
            seeds=seeds,
        )
        self.check_references(scenario)
        if self.problems:
            raise ScenarioError(self.problems)
        return scenario

    def orbit(self, orbit: _Fields) -> Optional[OrbitGeometry]:
        return self.build(
            "orbit",
            OrbitGeometry,
            orbit.get("radius_km", _positive, R_GEO),
            orbit.get("critical_radius_km", _positive, DEFAULT_R_CRIT),
            orbit.get("mu_km3_per_s2", _positive, MU_EARTH),
            orbit.get("g0_m_per_s2", _positive, G0),
        )

    def horizon(self, horizon: _Fields) -> Optional[HorizonConfig]:
        return self.build(
            "horizon",
            HorizonConfig,
            horizon.get("planning_days", _days),
            horizon.get("control_days", _days),
            horizon.get("scheduling_days", _days),
        )

    def satellite(self, item: _Fields) -> Optional[Satellite]:
        offsets = item.get("phase_offsets_days", _amounts, {})
        return self.build(
            item.path,
            Satellite,
            item.get("name", _text),
            item.get("longitude_deg", _number),
            item.get("wet_mass_kg", _nonnegative, 0.0),
            item.get("propellant", _text, BIPROPELLANT),
            offsets,
        )

    def service(self, item: _Fields) -> Optional[ServiceType]:
        revenue = item.get("revenue_usd_m", _nonnegative)
        return self.build(
            item.path,
            ServiceType,
            item.get("name", _text),
            item.get("kind", DemandKind),
            None if revenue is None else revenue * USD_M,
            item.get("delay_penalty_usd_per_day", _nonnegative),
            item.get("duration_days", _days),
            item.get("window_days", _days),
            item.get("interoccurrence_days", _interoccurrence),
            item.get("tool", _text),
            item.get("propellant_kg", _nonnegative, 0.0),
            item.get("spares", _count, 0),
        )

    def design(self, item: _Fields, role: VehicleRole) -> Optional[VehicleDesign]:
        cost = item.get("cost_usd_m", _nonnegative)
        common = (
            item.get("name", _text),
            role,
            item.get("dry_mass_kg", _nonnegative),
            None if cost is None else cost * USD_M,
            item.get("operating_cost_usd_per_day", _nonnegative),
        )
        if role is VehicleRole.depot:
            return self.build(
                item.path,
                VehicleDesign,
                *common,
                storage=item.get("storage", _amounts, {}),
                stationkeeping_rate=item.get(
                    "stationkeeping_kg_per_day", _nonnegative, 0.0
                ),
            )
        tools = item.get("tools", _amounts, {})
        return self.build(
            item.path,
            VehicleDesign,
            *common,
            tank_capacity=item.get("tank_capacity_kg", _nonnegative),
            payload_capacity=item.get("payload_capacity_kg", _nonnegative, 0.0),
            isp=item.get("isp_s", _positive, 316.0),
            tools=None if tools is None else {k: int(v) for k, v in tools.items()},
            cargo=item.get("cargo", _names, ()),
        )

    def check_references(self, scenario: Scenario) -> None:
        """Cross-section checks: every name used is defined and consistent."""
        commodities = scenario.commodities
        node_ids = [node.id for node in scenario.nodes()]
        for node_id in sorted({n for n in node_ids if node_ids.count(n) > 1}):
            self.fail("satellites", f"duplicate node id {node_id}")
        names = [service.name for service in scenario.service_types]
        for index, service in enumerate(scenario.service_types):
            path = f"service_types[{index}]"
            if names.count(service.name) > 1:
                self.fail(path, f"duplicate service type {service.name}")
            tool = commodities.get(service.tool)
            if tool is None or not tool.is_tool:
                self.fail(f"{path}.tool", f"unknown tool {service.tool}")
            if service.spares and "spares" not in commodities:
                self.fail(f"{path}.spares", "no spares commodity")
        for index, satellite in enumerate(scenario.satellites):
            for service in satellite.phase_offsets:
                if service not in names:
                    self.fail(
                        f"satellites[{index}].phase_offsets_days",
                        f"unknown service type {service}",
                    )
            needs_propellant = any(s.propellant_kg for s in scenario.service_types)
            if needs_propellant and satellite.propellant not in commodities:
                self.fail(
                    f"satellites[{index}].propellant",
                    f"unknown commodity {satellite.propellant}",
                )
        for design in scenario.designs.values():
            path = f"designs.{design.name}"
            used = list(design.tools) + list(design.cargo) + list(design.storage)
            for k in used:
                if k not in commodities:
                    self.fail(path, f"unknown commodity {k}")
            for tool in design.tools:
                if tool in commodities and not commodities[tool].is_tool:
                    self.fail(f"{path}.tools", f"{tool} is not a tool")
            if design.is_servicer and BIPROPELLANT not in commodities:
                self.fail(path, f"servicers need the {BIPROPELLANT} commodity")
            if design.stationkeeping_rate and MONOPROPELLANT not in design.storage:
                self.fail(f"{path}.storage", f"depot must store {MONOPROPELLANT}")
        self.check_fleet(scenario, set(node_ids))
        for site in scenario.earth_supply:
            if site not in scenario.launch_sites:
                self.fail("earth_supply", f"unknown launch site {site}")

    def check_fleet(self, scenario: Scenario, node_ids: set) -> None:
        ids = [entry.id for entry in scenario.fleet]
        located = {}
        for index, entry in enumerate(scenario.fleet):
            path = f"fleet[{index}]"
            if ids.count(entry.id) > 1:
                self.fail(f"{path}.id", f"duplicate vehicle id {entry.id}")
            design = scenario.designs.get(entry.design)
            if design is None:
                self.fail(f"{path}.design", f"unknown design {entry.design}")
                continue
            if entry.node not in node_ids:
                self.fail(f"{path}.node", f"unknown node {entry.node}")
                continue
            located[entry.id] = (entry.node, design)
            on_ground = entry.node in scenario.launch_sites
            if on_ground and not scenario.launches_enabled:
                self.fail(f"{path}.node", "ground vehicle but launches are disabled")
            if design.is_depot and not on_ground:
                if entry.node not in [n.id for n in scenario.parking]:
                    self.fail(f"{path}.node", "depots stay at parking slots")
            vehicle = Vehicle(entry.id, design)
            carried = vehicle.carried(scenario.commodities)
            for k, amount in entry.cargo.items():
                commodity = scenario.commodities.get(k)
                if commodity is None or k not in carried:
                    self.fail(f"{path}.cargo.{k}", f"{entry.design} cannot carry {k}")
                elif commodity.is_tool:
                    self.fail(f"{path}.cargo.{k}", "tools come with the design")
                elif amount > vehicle.capacity(commodity) + 1e-9:
                    self.fail(f"{path}.cargo.{k}", f"{amount} exceeds capacity")
        grid = scenario.grid
        busy = set()
        for index, entry in enumerate(scenario.in_progress):
            path = f"in_progress[{index}]"
            node, design = located.get(entry.vehicle, (None, None))
            if design is None or not design.is_servicer:
                self.fail(f"{path}.vehicle", f"unknown servicer {entry.vehicle}")
                continue
            if node != entry.satellite:
                self.fail(path, f"{entry.vehicle} is not at {entry.satellite}")
            if entry.vehicle in busy:
                self.fail(path, f"{entry.vehicle} already has a service in progress")
            busy.add(entry.vehicle)
            try:
                service = scenario.service_type(entry.service)
                scenario.satellite(entry.satellite)
            except KeyError as e:
                self.fail(path, f"unknown {e.args[0]}")
                continue
            if not design.tools.get(service.tool):
                self.fail(path, f"{entry.vehicle} lacks tool {service.tool}")
            if entry.occurrence % grid.T:
                self.fail(f"{path}.occurrence_day", "not an interval boundary")
                continue
            pending = ServiceNeed("pending", entry.satellite, service, entry.occurrence)
            if entry.start not in build_window(pending, grid):
                self.fail(f"{path}.start_day", "not in the service window")
            elif not entry.start < 0 < occupancy_end(
                entry.start, service.duration, grid
            ):
                self.fail(f"{path}.start_day", "service is not running at day 0")


def load_scenario(file_path: Path, fleet_size: Optional[int] = None) -> Scenario:
    """
    Load and validate a scenario file.

    :param file_path: JSON scenario.
    :param fleet_size: Resize the customer fleet, see
        :meth:`Scenario.with_fleet_size`.
    :raises ScenarioError: If the file is unreadable or invalid.
    """
    try:
        with open(file_path) as scenario_file:
            data = YAML(typ="safe").load(scenario_file)
    except (OSError, YAMLError) as e:
        raise ScenarioError([f"{file_path}: {e}"])
    scenario = Scenario.from_dict(data, source=str(file_path))
    if fleet_size is not None:
        scenario = scenario.with_fleet_size(fleet_size)
    logger.info(
        "Loaded scenario %s: %d satellites, %d vehicles",
        scenario.name,
        len(scenario.satellites),
        len(scenario.fleet),
    )
    return scenario


def save_scenario(scenario: Scenario, file_path: Path) -> None:
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w") as scenario_file:
        json.dump(scenario.to_dict(), scenario_file, indent=2)
        scenario_file.write("\n")


def bundled(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``usecase1``."""
    path = DATA_DIR / f"{name}.json"
    if not path.exists():
        available = sorted(p.stem for p in DATA_DIR.glob("*.json"))
        raise ScenarioError([f"{name}: no bundled scenario (have {available})"])
    return path


def bundled_names() -> Sequence[str]:
    return sorted(p.stem for p in DATA_DIR.glob("*.json"))
