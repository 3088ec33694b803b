"""Customer satellites, service types and service-need generation."""

import math

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from oosplan.network import TimeGrid

BIPROPELLANT = "bipropellant"
MONOPROPELLANT = "monopropellant"
SPARES = "spares"
HISTORY_COLUMNS = [
    "s",
    "satellite",
    "type",
    "occurrence",
    "start",
    "vehicle",
    "revenue",
    "delay_penalty",
]


class ServiceName(Enum):
    """Services an OOS infrastructure can sell"""

    inspection = "Inspection"
    refueling = "Refueling"
    station_keeping = "StationKeeping"
    repositioning = "Repositioning"
    retirement = "Retirement"
    repair = "Repair"
    mechanism_deployment = "MechanismDeployment"


class DemandKind(Enum):
    """How occurrences of a service need are generated"""

    deterministic = "deterministic"
    random = "random"


@dataclass(frozen=True)
class ServiceType:
    """
    One kind of service and the terms it is sold on.

    :param name: Service name, one of :class:`ServiceName`.
    :param kind: Regularly spaced or Poisson occurrences.
    :param revenue: Revenue when provided, $.
    :param delay_penalty: Penalty per day between occurrence and start, $/day.
    :param duration: Days the servicer stays docked.
    :param window_length: Days after the occurrence during which it may start.
    :param interoccurrence: Spacing (deterministic) or mean spacing (random) of
        occurrences, days; ``math.inf`` disables the service.
    :param tool: The single tool kind able to provide the service.
    :param propellant_kg: Propellant handed to the customer, in the customer's
        station-keeping propellant.
    :param spares: Spare units consumed at the customer.
    """

    name: str
    kind: DemandKind
    revenue: float
    delay_penalty: float
    duration: int
    window_length: int
    interoccurrence: float
    tool: str
    propellant_kg: float = 0.0
    spares: int = 0

    def __post_init__(self):
        ServiceName(self.name)
        if self.duration <= 0 or self.window_length < 0:
            raise ValueError(
                f"{self.name}: duration must be positive and window nonnegative"
            )
        if self.interoccurrence <= 0:
            raise ValueError(f"{self.name}: interoccurrence must be positive")
        if self.revenue < 0 or self.delay_penalty < 0:
            raise ValueError(f"{self.name}: revenue and penalty must be nonnegative")
        if self.propellant_kg < 0 or self.spares < 0:
            raise ValueError(f"{self.name}: commodity demand must be nonnegative")


@dataclass(frozen=True)
class Satellite:
    """
    Customer satellite on the shared circular orbit.

    :param phase_offsets: Days from the start to the first occurrence of each
        deterministic service, keyed by service name.
    """

    name: str
    longitude: float
    wet_mass: float = 0.0
    propellant: str = BIPROPELLANT
    phase_offsets: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not -180.0 <= self.longitude < 180.0:
            raise ValueError(
                f"{self.name}: longitude {self.longitude} not in [-180, 180)"
            )
        if self.propellant not in (BIPROPELLANT, MONOPROPELLANT):
            raise ValueError(f"{self.name}: unsupported propellant {self.propellant}")


@dataclass(frozen=True)
class ServiceNeed:
    id: str
    satellite: str
    service: ServiceType
    occurrence: int
    propellant: str = BIPROPELLANT
    window: Tuple[int, ...] = ()

    @property
    def kind(self) -> DemandKind:
        return self.service.kind

    @property
    def deliveries(self) -> Dict[str, float]:
        """Commodities consumed at the customer when the service starts."""
        deliveries = {}
        if self.service.propellant_kg > 0:
            deliveries[self.propellant] = self.service.propellant_kg
        if self.service.spares > 0:
            deliveries[SPARES] = float(self.service.spares)
        return deliveries

    def delay(self, start: int) -> int:
        return start - self.occurrence

    def with_window(self, grid: TimeGrid) -> "ServiceNeed":
        return replace(self, window=build_window(self, grid))


def _need(
    satellite: Satellite, service: ServiceType, occurrence: int, count: int
) -> ServiceNeed:
    return ServiceNeed(
        id=f"{service.kind.value[0]}:{satellite.name}:{service.name}:{count}",
        satellite=satellite.name,
        service=service,
        occurrence=occurrence,
        propellant=satellite.propellant,
    )


def generate_deterministic(
    satellites: Sequence[Satellite],
    types: Sequence[ServiceType],
    horizon: int,
    t0: int = 0,
    interval: int = 10,
    seed: int = 0,
) -> List[ServiceNeed]:
    """
    Regularly spaced needs of every deterministic service type.

    Needs fall at ``offset + m * interoccurrence`` after ``t0``, snapped to the
    nearest interval boundary and kept when inside ``[t0, t0 + horizon)``.
    Offsets missing from ``Satellite.phase_offsets`` are drawn uniformly from
    ``[0, interoccurrence)`` with a generator seeded by ``seed``.
    """
    rng = np.random.default_rng(seed)
    needs = []
    for satellite in satellites:
        for service in types:
            if service.kind is not DemandKind.deterministic:
                continue
            if math.isinf(service.interoccurrence):
                continue
            drawn = rng.uniform(0.0, service.interoccurrence)
            offset = satellite.phase_offsets.get(service.name, drawn)
            count = 0
            date = float(offset)
            while date < horizon + interval:
                occurrence = snap(t0 + date, interval)
                if t0 <= occurrence < t0 + horizon:
                    needs.append(_need(satellite, service, occurrence, count))
                    count += 1
                date += service.interoccurrence
    return needs


def draw_interarrivals(
    mean: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Exponential gaps between Poisson arrivals of mean spacing ``mean``."""
    if math.isinf(mean):
        return np.full(size, math.inf)
    return rng.exponential(scale=mean, size=size)


def generate_random(
    satellites: Sequence[Satellite],
    types: Sequence[ServiceType],
    horizon: int,
    t0: int = 0,
    seed: int = 0,
    interval: int = 10,
) -> List[ServiceNeed]:
    """
    Poisson-arriving needs of every random service type.

    Gaps are exponential with the type's mean interoccurrence, drawn per
    satellite and type from one generator seeded by ``seed``; arrival dates are
    snapped to interval boundaries and kept inside ``[t0, t0 + horizon)``.
    """
    rng = np.random.default_rng(seed)
    needs = []
    for satellite in satellites:
        for service in types:
            if service.kind is not DemandKind.random:
                continue
            count = 0
            elapsed = 0.0
            while True:
                elapsed += draw_interarrivals(service.interoccurrence, 1, rng)[0]
                if elapsed >= horizon:
                    break
                occurrence = snap(t0 + elapsed, interval)
                if occurrence < t0 + horizon:
                    needs.append(_need(satellite, service, occurrence, count))
                    count += 1
    return sorted(needs, key=lambda need: (need.occurrence, need.id))


def snap(date: float, interval: int) -> int:
    """Round ``date`` to the nearest multiple of ``interval``, halves up."""
    return int(math.floor(date / interval + 0.5)) * interval


def build_window(need: ServiceNeed, grid: TimeGrid) -> Tuple[int, ...]:
    """
    Admissible start dates of a need: the last spaceflight node of every
    interval starting between the occurrence and the end of its window.
    """
    if need.occurrence % grid.T:
        raise ValueError(
            f"{need.id}: occurrence {need.occurrence} is not an interval boundary"
        )
    last = need.occurrence + need.service.window_length
    return tuple(
        start + grid.n * grid.dt
        for start in range(need.occurrence, last + 1, grid.T)
    )


def occupancy_end(start: int, duration: int, grid: TimeGrid) -> int:
    """Interval boundary at which a service started at ``start`` frees its servicer."""
    return grid.interval_start(start) + math.ceil(duration / grid.T) * grid.T


def build_occupancy(need: ServiceNeed, start: int, grid: TimeGrid) -> Tuple[int, ...]:
    """Time nodes during which a service started at ``start`` pins its servicer."""
    end = occupancy_end(start, need.service.duration, grid)
    return tuple(grid.nodes_between(start, end))


@dataclass
class DemandRecord:
    """Outcome of one need, one row of the demand history."""

    need: ServiceNeed
    start: Optional[int] = None
    vehicle: Optional[str] = None

    @property
    def served(self) -> bool:
        return self.start is not None

    @property
    def delay_penalty(self) -> float:
        if self.start is None:
            return 0.0
        return self.need.service.delay_penalty * self.need.delay(self.start)


def write_demand_history(records: Iterable[DemandRecord], file_path: Path) -> None:
    """Write the service-demand history as CSV."""
    file_path.parent.mkdir(parents=True, exist_ok=True)
    rows = [
        dict(
            s=record.need.id,
            satellite=record.need.satellite,
            type=record.need.service.name,
            occurrence=record.need.occurrence,
            start=record.start if record.served else "declined",
            vehicle=record.vehicle or "",
            revenue=record.need.service.revenue if record.served else 0.0,
            delay_penalty=record.delay_penalty,
        )
        for record in sorted(records, key=lambda r: (r.need.occurrence, r.need.id))
    ]
    history = pd.DataFrame(rows, columns=HISTORY_COLUMNS, dtype=object)
    history.to_csv(file_path, index=False)
