"""Commodities, the sparse MILP and its assembly from a planning horizon."""

from oosplan.model.builder import ModelBuilder, PlanningInputs, assemble
from oosplan.model.commodities import (
    LAUNCHER,
    Commodity,
    CommodityClass,
    Vehicle,
    VehicleDesign,
    VehicleRole,
    commodity_table,
)
from oosplan.model.milp import (
    COMPONENTS,
    Assign,
    Dispatch,
    FlowX,
    FlowY,
    MilpModel,
    ObjectiveBreakdown,
    Sense,
)

__all__ = [
    "COMPONENTS",
    "LAUNCHER",
    "Assign",
    "Commodity",
    "CommodityClass",
    "Dispatch",
    "FlowX",
    "FlowY",
    "MilpModel",
    "ModelBuilder",
    "ObjectiveBreakdown",
    "PlanningInputs",
    "Sense",
    "Vehicle",
    "VehicleDesign",
    "VehicleRole",
    "assemble",
    "commodity_table",
]
