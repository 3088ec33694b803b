"""Solver-independent sparse MILP."""

import math

from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Tuple

import numpy as np
from scipy import sparse

from oosplan.exceptions import ModelBuildError


@dataclass(frozen=True)
class FlowX:
    """Commodity flow leaving (``+``) or reaching (``-``) an arc."""

    vehicle: str
    origin: str
    destination: str
    start: int
    commodity: str
    sign: str = "+"


@dataclass(frozen=True)
class FlowY:
    vehicle: str
    origin: str
    destination: str
    start: int


@dataclass(frozen=True)
class Assign:
    """Servicer ``vehicle`` starts ``need`` at ``start``."""

    need: str
    vehicle: str
    start: int


@dataclass(frozen=True)
class Dispatch:
    """Servicer ``vehicle`` is busy with ``need`` at ``time``."""

    need: str
    vehicle: str
    time: int


class Sense(Enum):
    """Row senses, valued with their MPS codes"""

    le = "L"
    eq = "E"
    ge = "G"


COMPONENTS: Tuple[str, ...] = (
    "revenue",
    "pdm",
    "launch",
    "delay",
    "depots",
    "servicers",
)


@dataclass
class Variable:
    index: Hashable
    lower: float = 0.0
    upper: float = math.inf
    integer: bool = False


@dataclass
class Constraint:
    label: str
    coefficients: Dict[int, float]
    sense: Sense
    rhs: float = 0.0


@dataclass(frozen=True)
class ObjectiveBreakdown:
    revenue: float = 0.0
    pdm: float = 0.0
    launch: float = 0.0
    delay: float = 0.0
    depots: float = 0.0
    servicers: float = 0.0

    @property
    def total(self) -> float:
        return self.revenue - (
            self.pdm + self.launch + self.delay + self.depots + self.servicers
        )

    def to_dict(self) -> dict:
        return dict(asdict(self), total=self.total)


class MilpModel:
    """
    Maximization MILP over named index objects.

    The objective is kept per component so that the profit can be decomposed
    into revenues and the five cost terms; every component coefficient is a
    nonnegative magnitude and costs enter the objective with a minus sign.
    """

    def __init__(self, name: str = "OOSPLAN"):
        self.name = name
        self.variables: List[Variable] = []
        self.constraints: List[Constraint] = []
        self.components: Dict[str, Dict[int, float]] = {c: {} for c in COMPONENTS}
        self._columns: Dict[Hashable, int] = {}

    def __contains__(self, index: Hashable) -> bool:
        return index in self._columns

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def num_integer(self) -> int:
        return sum(variable.integer for variable in self.variables)

    def add_variable(
        self,
        index: Hashable,
        lower: float = 0.0,
        upper: float = math.inf,
        integer: bool = False,
    ) -> int:
        if index in self._columns:
            raise ModelBuildError([f"duplicate variable {index}"])
        if lower > upper:
            raise ModelBuildError([f"{index}: lower bound above upper bound"])
        self._columns[index] = len(self.variables)
        self.variables.append(Variable(index, lower, upper, integer))
        return self._columns[index]

    def column(self, index: Hashable) -> Optional[int]:
        return self._columns.get(index)

    def add_constraint(
        self,
        label: str,
        terms: Mapping[int, float],
        sense: Sense,
        rhs: float = 0.0,
    ) -> int:
        coefficients: Dict[int, float] = {}
        for column, value in terms.items():
            if not 0 <= column < len(self.variables):
                raise ModelBuildError([f"{label}: undeclared column {column}"])
            coefficients[column] = coefficients.get(column, 0.0) + value
        coefficients = {j: a for j, a in coefficients.items() if a != 0.0}
        self.constraints.append(Constraint(label, coefficients, sense, float(rhs)))
        return len(self.constraints) - 1

    def add_objective_term(self, component: str, column: int, value: float) -> None:
        terms = self.components[component]
        terms[column] = terms.get(column, 0.0) + value

    @property
    def objective(self) -> np.ndarray:
        """Coefficients of the maximized profit."""
        c = np.zeros(len(self.variables))
        for component, terms in self.components.items():
            sign = 1.0 if component == "revenue" else -1.0
            for column, value in terms.items():
                c[column] += sign * value
        return c

    def breakdown(self, values: np.ndarray) -> ObjectiveBreakdown:
        return ObjectiveBreakdown(
            **{
                component: float(
                    sum(value * values[column] for column, value in terms.items())
                )
                for component, terms in self.components.items()
            }
        )

    def evaluate(self, values: np.ndarray) -> float:
        return self.breakdown(values).total

    def matrix(self) -> sparse.csr_matrix:
        rows, cols, data = [], [], []
        for i, constraint in enumerate(self.constraints):
            for j, value in constraint.coefficients.items():
                rows.append(i)
                cols.append(j)
                data.append(value)
        return sparse.coo_matrix(
            (data, (rows, cols)), shape=(len(self.constraints), len(self.variables))
        ).tocsr()

    def row_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.full(len(self.constraints), -np.inf)
        upper = np.full(len(self.constraints), np.inf)
        for i, constraint in enumerate(self.constraints):
            if constraint.sense is not Sense.le:
                lower[i] = constraint.rhs
            if constraint.sense is not Sense.ge:
                upper[i] = constraint.rhs
        return lower, upper

    def column_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.array([v.lower for v in self.variables], dtype=float)
        upper = np.array([v.upper for v in self.variables], dtype=float)
        return lower, upper

    @property
    def integrality(self) -> np.ndarray:
        return np.array([int(v.integer) for v in self.variables], dtype=np.uint8)

    def violations(self, values: np.ndarray, tolerance: float = 1e-6) -> List[str]:
        """
        Bounds and rows violated by ``values``.

        A row is violated when its residual exceeds ``tolerance`` times the
        largest of 1, its right-hand side and its largest term.
        """
        problems = []
        for variable, value in zip(self.variables, values):
            scale = max(1.0, abs(value))
            if value < variable.lower - tolerance * scale:
                problems.append(f"{variable.index} below lower bound ({value})")
            if value > variable.upper + tolerance * scale:
                problems.append(f"{variable.index} above upper bound ({value})")
        for constraint in self.constraints:
            terms = [a * values[j] for j, a in constraint.coefficients.items()]
            activity = sum(terms)
            scale = max([1.0, abs(constraint.rhs)] + [abs(term) for term in terms])
            residual = activity - constraint.rhs
            if constraint.sense is Sense.le:
                excess = residual
            elif constraint.sense is Sense.ge:
                excess = -residual
            else:
                excess = abs(residual)
            if excess > tolerance * scale:
                problems.append(
                    f"{constraint.label}: activity {activity:.9g} "
                    f"{constraint.sense.value} {constraint.rhs:.9g}"
                )
        return problems

    def column_name(self, column: int) -> str:
        return f"C{column + 1:07d}"

    def row_name(self, row: int) -> str:
        return f"R{row + 1:07d}"

    def name_map(self) -> Dict[str, str]:
        names = {
            self.column_name(j): repr(v.index) for j, v in enumerate(self.variables)
        }
        names.update(
            {self.row_name(i): c.label for i, c in enumerate(self.constraints)}
        )
        return names

    def values_by_index(self, values: np.ndarray) -> Dict[Hashable, float]:
        return {v.index: float(values[j]) for j, v in enumerate(self.variables)}

    def columns_of(self, kind: type) -> Iterable[Tuple[int, Hashable]]:
        for column, variable in enumerate(self.variables):
            if isinstance(variable.index, kind):
                yield column, variable.index

    def summary(self) -> dict:
        return dict(
            variables=self.num_variables,
            integer=self.num_integer,
            constraints=self.num_constraints,
            nonzeros=sum(len(c.coefficients) for c in self.constraints),
        )
