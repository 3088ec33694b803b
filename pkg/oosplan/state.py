"""Infrastructure state handed from one planning horizon to the next."""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from oosplan.demand import ServiceNeed, occupancy_end
from oosplan.network import TimeGrid


@dataclass(frozen=True)
class VehicleState:
    """
    :param vehicle: Vehicle id.
    :param node: Node the vehicle departs from at the state date; a launch
        site while the vehicle waits on the ground.
    :param cargo: Commodities on board, by commodity id.
    """

    vehicle: str
    node: str
    cargo: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class InProgressService:
    """A service started before the state date that still pins its servicer."""

    need: ServiceNeed
    vehicle: str
    start: int

    def end(self, grid: TimeGrid) -> int:
        return occupancy_end(self.start, self.need.service.duration, grid)


@dataclass
class InfrastructureState:
    date: int
    vehicles: Dict[str, VehicleState] = field(default_factory=dict)
    in_progress: List[InProgressService] = field(default_factory=list)

    def __post_init__(self):
        for vehicle_state in self.vehicles.values():
            for commodity, amount in vehicle_state.cargo.items():
                if amount < 0:
                    raise ValueError(
                        f"{vehicle_state.vehicle} carries {amount} of {commodity}"
                    )
        for service in self.in_progress:
            located = self.vehicles.get(service.vehicle)
            if located is None or located.node != service.need.satellite:
                raise ValueError(
                    f"{service.vehicle} must be at {service.need.satellite} "
                    f"to continue {service.need.id}"
                )

    def located(self, vehicle: str) -> str:
        return self.vehicles[vehicle].node

    def supply(self) -> Dict[str, Dict[str, float]]:
        """Commodity totals by node at the state date."""
        totals: Dict[str, Dict[str, float]] = defaultdict(lambda: defaultdict(float))
        for vehicle_state in self.vehicles.values():
            for commodity, amount in vehicle_state.cargo.items():
                totals[vehicle_state.node][commodity] += amount
        return {node: dict(amounts) for node, amounts in totals.items()}

    def total(self, commodity: str) -> float:
        return sum(v.cargo.get(commodity, 0.0) for v in self.vehicles.values())

    def occupied(self) -> Tuple[str, ...]:
        return tuple(sorted({v.node for v in self.vehicles.values()}))
