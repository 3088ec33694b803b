"""Commodities and the vehicles that carry them."""

import math

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional, Tuple

from oosplan.demand import BIPROPELLANT, MONOPROPELLANT


class CommodityClass(Enum):
    """How a commodity is counted"""

    continuous = "continuous"
    integer = "integer"
    tool = "tool"


class VehicleRole(Enum):
    """Vehicles modeled as commodities"""

    servicer = "servicer"
    depot = "depot"


LAUNCHER = "launcher"
"""Pseudo-vehicle carrying loose cargo on launch arcs."""


@dataclass(frozen=True)
class Commodity:
    """
    :param id: Commodity id, e.g. ``bipropellant`` or ``T1``.
    :param kind: Continuous (kg), integer units, or tool units.
    :param unit_mass: Mass of one unit, kg (1 for continuous commodities).
    :param cost: Procurement cost of one unit, $.
    """

    id: str
    kind: CommodityClass
    unit_mass: float = 1.0
    cost: float = 0.0

    def __post_init__(self):
        if self.unit_mass < 0 or self.cost < 0:
            raise ValueError(f"{self.id}: mass and cost must be nonnegative")

    @property
    def is_integer(self) -> bool:
        return self.kind is not CommodityClass.continuous

    @property
    def is_tool(self) -> bool:
        return self.kind is CommodityClass.tool


@dataclass(frozen=True)
class VehicleDesign:
    """
    Design shared by vehicles of one type.

    :param dry_mass: Structure mass, tools excluded, kg.
    :param cost: Manufacturing cost, $.
    :param operating_cost: $/day while in orbit.
    :param tank_capacity: Bipropellant a servicer can hold, kg.
    :param payload_capacity: Cargo a servicer can hold besides its tank and
        tools, kg.
    :param isp: Specific impulse of the servicer engine, s.
    :param tools: Integrated tool counts.
    :param cargo: Commodities a servicer may carry as payload.
    :param storage: Depot storage per commodity, in commodity units.
    :param stationkeeping_rate: Depot monopropellant use, kg/day.
    """

    name: str
    role: VehicleRole
    dry_mass: float
    cost: float
    operating_cost: float
    tank_capacity: float = 0.0
    payload_capacity: float = 0.0
    isp: float = 316.0
    tools: Mapping[str, int] = field(default_factory=dict)
    cargo: Tuple[str, ...] = ()
    storage: Mapping[str, float] = field(default_factory=dict)
    stationkeeping_rate: float = 0.0

    def __post_init__(self):
        values = (
            self.dry_mass,
            self.cost,
            self.operating_cost,
            self.tank_capacity,
            self.payload_capacity,
            self.stationkeeping_rate,
        )
        if any(value < 0 for value in values):
            raise ValueError(f"{self.name}: masses, costs and capacities must be >= 0")
        if self.isp <= 0:
            raise ValueError(f"{self.name}: isp must be positive")

    @property
    def is_servicer(self) -> bool:
        return self.role is VehicleRole.servicer

    @property
    def is_depot(self) -> bool:
        return self.role is VehicleRole.depot


@dataclass(frozen=True)
class Vehicle:
    id: str
    design: VehicleDesign

    @property
    def is_servicer(self) -> bool:
        return self.design.is_servicer

    @property
    def is_depot(self) -> bool:
        return self.design.is_depot

    def carried(self, commodities: Mapping[str, Commodity]) -> Tuple[str, ...]:
        """Commodities this vehicle can hold, in table order."""
        design = self.design
        if design.is_depot:
            allowed = set(design.storage)
        else:
            allowed = {BIPROPELLANT} | set(design.tools) | set(design.cargo)
        return tuple(k for k in commodities if k in allowed)

    def capacity(self, commodity: Commodity) -> float:
        """Largest amount of ``commodity`` on board, in its own units."""
        design = self.design
        if design.is_depot:
            return float(design.storage.get(commodity.id, 0.0))
        if commodity.id == BIPROPELLANT:
            return design.tank_capacity
        if commodity.is_tool:
            return float(design.tools.get(commodity.id, 0))
        if commodity.unit_mass == 0:
            return design.payload_capacity
        amount = design.payload_capacity / commodity.unit_mass
        return math.floor(amount + 1e-9) if commodity.is_integer else amount

    def tool_mass(self, commodities: Mapping[str, Commodity]) -> float:
        return sum(
            count * commodities[tool].unit_mass
            for tool, count in self.design.tools.items()
            if tool in commodities
        )

    def burned(self) -> Optional[str]:
        """Commodity consumed on the vehicle's own arcs."""
        if self.design.is_depot:
            return MONOPROPELLANT if self.design.stationkeeping_rate > 0 else None
        return BIPROPELLANT

    def has_tool(self, tool: str) -> bool:
        return self.design.tools.get(tool, 0) > 0


def commodity_table(commodities: Dict[str, Commodity]) -> Dict[str, Commodity]:
    """Commodities sorted by id, the order used for variables and reports."""
    return {key: commodities[key] for key in sorted(commodities)}
