"""Schedule reports, output files and independent schedule validation."""

import json
import logging
import math

from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence

import pandas as pd

from oosplan.demand import (
    BIPROPELLANT,
    MONOPROPELLANT,
    DemandRecord,
    write_demand_history,
)
from oosplan.horizon import (
    Action,
    CommittedSchedule,
    Plan,
    RunResult,
    TradeResult,
    ValuePoint,
)
from oosplan.model.builder import PlanningInputs
from oosplan.model.commodities import LAUNCHER
from oosplan.model.milp import (
    Assign,
    Dispatch,
    FlowX,
    FlowY,
    MilpModel,
    ObjectiveBreakdown,
)
from oosplan.network import ArcKind
from oosplan.solve.solution import Solution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ItineraryRow:
    time: int
    end: int
    vehicle: str
    location: str
    activity: str
    propellant: float
    destination: str = ""
    need: str = ""


@dataclass(frozen=True)
class GanttRow:
    vehicle: str
    start: int
    end: int
    activity: str
    location: str
    need: str = ""


@dataclass
class ScheduleReport:
    """
    Readable form of one solved planning horizon.

    :param itineraries: Rows per vehicle in time order.
    :param services: Outcome of every need of the horizon.
    :param violations: Problems the independent schedule check found.
    """

    status: str
    objective: float
    gap: Optional[float]
    wall_time: float
    itineraries: Dict[str, List[ItineraryRow]] = field(default_factory=dict)
    services: List[DemandRecord] = field(default_factory=list)
    breakdown: ObjectiveBreakdown = field(default_factory=ObjectiveBreakdown)
    violations: List[str] = field(default_factory=list)

    @classmethod
    def from_plan(
        cls, inputs: PlanningInputs, model: MilpModel, solution: Solution
    ) -> "ScheduleReport":
        plan = Plan(inputs, model, solution)
        dispatched = {
            (index.vehicle, index.time): index.need
            for index, value in plan.values.items()
            if isinstance(index, Dispatch) and value > 0.5
        }
        itineraries = defaultdict(list)
        for vehicle_id, arc in sorted(plan.moves(), key=lambda m: (m[0], m[1].start)):
            vehicle = inputs.vehicle(vehicle_id)
            burned = vehicle.burned() or (
                MONOPROPELLANT if vehicle.is_depot else BIPROPELLANT
            )
            cargo = plan.cargo(vehicle_id, arc)
            need = ""
            if arc.kind is ArcKind.transport:
                activity = "flight"
            elif arc.kind is ArcKind.launch:
                activity = "launch"
            else:
                need = dispatched.get((vehicle_id, arc.start), "")
                activity = "service" if need else "hold"
            itineraries[vehicle_id].append(
                ItineraryRow(
                    time=arc.start,
                    end=arc.end,
                    vehicle=vehicle_id,
                    location=arc.origin,
                    activity=activity,
                    propellant=cargo.get(burned, 0.0),
                    destination=arc.destination,
                    need=need,
                )
            )
        chosen = {
            need.id: (vehicle, start) for need, vehicle, start in plan.assignments()
        }
        services = []
        for need in inputs.needs:
            vehicle, start = chosen.get(need.id, (None, None))
            services.append(DemandRecord(need, start, vehicle))
        return cls(
            status=solution.status.value,
            objective=solution.objective,
            gap=solution.gap,
            wall_time=solution.wall_time,
            itineraries=dict(itineraries),
            services=services,
            breakdown=plan.breakdown(),
        )

    def gantt(self) -> List[GanttRow]:
        """Consecutive rows of the same activity and place merged into bars."""
        bars: List[GanttRow] = []
        for vehicle, rows in sorted(self.itineraries.items()):
            previous = None
            for row in rows:
                location = row.location
                if row.activity == "flight":
                    location = f"{row.location}->{row.destination}"
                bar = GanttRow(
                    vehicle, row.time, row.end, row.activity, location, row.need
                )
                mergeable = (
                    previous is not None
                    and row.activity != "flight"
                    and previous.end == bar.start
                    and (previous.activity, previous.location, previous.need)
                    == (bar.activity, bar.location, bar.need)
                )
                if mergeable:
                    bar = replace(bar, start=previous.start)
                    bars[-1] = bar
                else:
                    bars.append(bar)
                previous = bar
        return bars

    @property
    def served(self) -> List[DemandRecord]:
        return [record for record in self.services if record.served]


def _write_rows(file_path: Path, header: Sequence[str], rows: Iterable) -> None:
    file_path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(header), dtype=object)
    frame.to_csv(file_path, index=False)


def _write_json(file_path: Path, data: dict) -> None:
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w") as json_file:
        json.dump(data, json_file, indent=2, sort_keys=True, default=_plain)
        json_file.write("\n")


def _plain(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"{type(value).__name__} is not serializable")


def write_itineraries(report: ScheduleReport, out_dir: Path) -> List[Path]:
    """One ``itinerary_<vehicle>.csv`` per vehicle."""
    paths = []
    for vehicle, rows in sorted(report.itineraries.items()):
        path = out_dir / f"itinerary_{vehicle}.csv"
        _write_rows(
            path,
            ["time", "location", "activity", "destination", "need", "propellant"],
            (
                [r.time, r.location, r.activity, r.destination, r.need, r.propellant]
                for r in rows
            ),
        )
        paths.append(path)
    return paths


def write_gantt(rows: Iterable[GanttRow], file_path: Path) -> None:
    _write_rows(
        file_path,
        ["vehicle", "start", "end", "activity", "location", "need"],
        ([r.vehicle, r.start, r.end, r.activity, r.location, r.need] for r in rows),
    )


def write_objective(report: ScheduleReport, file_path: Path) -> None:
    _write_json(
        file_path,
        dict(
            status=report.status,
            objective=report.objective,
            gap=report.gap,
            wall_time=report.wall_time,
            breakdown=report.breakdown.to_dict(),
            served=len(report.served),
            declined=len(report.services) - len(report.served),
        ),
    )


def write_actions(actions: Iterable[Action], file_path: Path) -> None:
    """Committed action log, in commitment order."""
    _write_rows(
        file_path,
        ["start", "end", "vehicle", "kind", "origin", "destination", "need", "cargo"],
        (
            [
                a.start,
                a.end,
                a.vehicle,
                a.kind.value,
                a.origin,
                a.destination,
                a.need,
                ";".join(f"{k}={amount!r}" for k, amount in a.cargo),
            ]
            for a in actions
        ),
    )


def write_replans(schedule: CommittedSchedule, file_path: Path) -> None:
    _write_rows(
        file_path,
        ["date", "trigger", "needs", "visible", "objective", "status", "wall_time"],
        (
            [
                r.date,
                r.trigger.value,
                ";".join(r.needs),
                r.visible,
                r.objective,
                r.status,
                r.wall_time,
            ]
            for r in schedule.replans
        ),
    )


def write_value_series(points: Iterable[ValuePoint], file_path: Path) -> None:
    _write_rows(
        file_path,
        ["date", "revenue", "cost", "value"],
        ([p.date, p.revenue, p.cost, p.value] for p in points),
    )


def write_summary(result: RunResult, file_path: Path) -> None:
    _write_json(file_path, result.summary())


def write_run(result: RunResult, out_dir: Path) -> None:
    """Every file of one rolling-horizon run under ``out_dir``."""
    write_summary(result, out_dir / "summary.json")
    write_value_series(result.values, out_dir / "value.csv")
    write_actions(result.schedule.actions, out_dir / "actions.csv")
    write_replans(result.schedule, out_dir / "replans.csv")
    write_demand_history(
        result.schedule.records.values(), out_dir / "demand_history.csv"
    )


def write_trade(trade: TradeResult, out_dir: Path) -> List[Path]:
    """
    Files of a trade study.

    Each run goes to ``<architecture>/seed<seed>/``; seed-averaged series go
    to ``value_<architecture>.csv`` and one row per run (and per failure) to
    ``trade_summary.csv``.
    """
    paths = []
    for result in trade.results:
        run_dir = out_dir / result.name / f"seed{result.seed}"
        write_run(result, run_dir)
        paths.append(run_dir)
    for name in trade.architectures():
        path = out_dir / f"value_{name}.csv"
        write_value_series(trade.mean_series(name), path)
        paths.append(path)
    header = [
        "architecture",
        "seed",
        "final_value",
        "revenue",
        "cost",
        "investment",
        "served",
        "declined",
        "replans",
        "payback",
        "error",
    ]
    rows = []
    for result in sorted(trade.results, key=lambda r: (r.name, r.seed)):
        summary = result.summary()
        rows.append([summary[key] for key in header[:-1]] + [""])
    for name, seed, error in trade.failures:
        rows.append([name, seed] + [""] * (len(header) - 3) + [error])
    path = out_dir / "trade_summary.csv"
    _write_rows(path, header, rows)
    paths.append(path)
    return paths


def validate_schedule(
    inputs: PlanningInputs,
    values: Mapping[Hashable, float],
    tolerance: float = 1e-6,
) -> List[str]:
    """
    Check a solved plan without the model rows.

    Checked: starts inside the service windows, at most one service per
    customer and time, flows within vehicle and launch capacities, flows only
    on arcs the vehicle takes, nonnegative flows and a servicer present at its
    customer throughout each service.

    :param values: Solution values keyed by variable index.
    :returns: One message per violation; empty when the plan is valid.
    """
    problems = []
    needs = {need.id: need for need in inputs.needs}
    needs.update({s.need.id: s.need for s in inputs.state.in_progress})
    fixed = {(s.need.id, s.vehicle, s.start) for s in inputs.state.in_progress}
    flows = {}
    busy = defaultdict(list)
    launched = defaultdict(float)
    static = inputs.network.static
    for index, value in values.items():
        if isinstance(index, FlowY):
            key = (index.origin, index.destination, index.start)
            flows[(index.vehicle, *key)] = value
            if not static.node(index.origin).is_orbital:
                dry_mass = inputs.vehicle(index.vehicle).design.dry_mass
                launched[key] += dry_mass * value
        elif isinstance(index, Assign) and value > 0.5:
            key = (index.need, index.vehicle, index.start)
            if key not in fixed and index.start not in inputs.starts(needs[index.need]):
                problems.append(f"{index}: start outside the service window")
        elif isinstance(index, Dispatch) and value > 0.5:
            busy[(needs[index.need].satellite, index.time)].append(index)

    for (satellite, t), dispatches in sorted(busy.items()):
        if len(dispatches) > 1:
            problems.append(f"{satellite}@{t}: {len(dispatches)} services at once")
        for dispatch in dispatches:
            present = flows.get((dispatch.vehicle, satellite, satellite, t), 0.0)
            if present < 0.5:
                problems.append(f"{dispatch}: servicer not at {satellite}")

    for index, value in values.items():
        if not isinstance(index, FlowX):
            continue
        if value < -tolerance:
            problems.append(f"{index}: negative flow {value}")
        commodity = inputs.commodities[index.commodity]
        if not static.node(index.origin).is_orbital:
            launched[(index.origin, index.destination, index.start)] += (
                commodity.unit_mass * value
            )
        if index.vehicle == LAUNCHER:
            continue
        vehicle = inputs.vehicle(index.vehicle)
        y = flows.get((index.vehicle, index.origin, index.destination, index.start))
        limit = vehicle.capacity(commodity) * (y or 0.0)
        if value > limit + tolerance * max(1.0, limit):
            problems.append(f"{index}: {value} exceeds capacity {limit}")

    if inputs.launch is not None:
        for arc, mass in sorted(launched.items()):
            if mass > inputs.launch.capacity * (1 + tolerance):
                problems.append(f"launch {arc}: {mass} kg exceeds launch capacity")
    if problems:
        logger.warning("Schedule validation found %d problem(s)", len(problems))
    return problems

