"""Fixed-format MPS files."""

import logging
import math

from dataclasses import dataclass, field
from functools import singledispatch
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse

from oosplan.exceptions import MpsError
from oosplan.model.milp import MilpModel, Sense

logger = logging.getLogger(__name__)

OBJECTIVE_ROW = "COST"
RHS_NAME = "RHS"
BOUND_NAME = "BND"
MARKER_NAME = "MARKER"
NEGATED_MARKER = "* OBJSENSE MAXIMIZE-NEGATED"
MAX_MAGNITUDE = 1e30
MIN_MAGNITUDE = 1e-30

_FIELD_STARTS = (1, 4, 14, 24, 39, 49)
_FIELD_WIDTHS = (2, 8, 8, 12, 8, 12)


def format_number(value: float) -> str:
    """
    Shortest representation of ``value`` fitting a 12-character MPS field.

    Integral values print without exponent or decimal point, so formatting a
    parsed number again yields the same text. Values needing more than 12
    characters are rounded to the closest one that fits; the change is logged
    at debug level.

    :raises MpsError: For non-finite values and magnitudes MPS cannot hold.
    """
    if not math.isfinite(value):
        raise MpsError(f"Cannot write non-finite value {value}")
    if value == 0:
        return "0"
    if not MIN_MAGNITUDE <= abs(value) <= MAX_MAGNITUDE:
        raise MpsError(f"Magnitude of {value!r} outside [1e-30, 1e30]")
    for precision in range(12, 0, -1):
        text = f"{value:.{precision}g}"
        if len(text) <= 12:
            break
    parsed = float(text)
    if parsed != value:
        logger.debug("MPS field rounds %r to %s", value, text)
    if parsed.is_integer() and abs(parsed) < 1e12:
        text = str(int(parsed))
    return text


def _line(*fields: str) -> str:
    line = [" "] * 61
    for start, width, text in zip(_FIELD_STARTS, _FIELD_WIDTHS, fields):
        if len(text) > width:
            raise MpsError(f"Field {text!r} wider than {width} characters")
        line[start : start + len(text)] = text
    return "".join(line).rstrip()


@dataclass
class MpsData:
    """
    Content of an MPS file: a minimization over named rows and columns.

    :param rows: ``(name, sense)`` of every constraint row, in file order.
    :param columns: Column names, in file order.
    :param integer: Integrality flag of each column.
    :param entries: Per column, ``(row, value)`` pairs in file order; the
        objective row appears under :data:`OBJECTIVE_ROW`.
    :param rhs: Nonzero right-hand sides by row name.
    :param bounds: ``(lower, upper)`` of every column.
    :param negated: The file minimizes the negation of a maximized objective.
    """

    name: str
    rows: List[Tuple[str, Sense]] = field(default_factory=list)
    columns: List[str] = field(default_factory=list)
    integer: List[bool] = field(default_factory=list)
    entries: Dict[str, List[Tuple[str, float]]] = field(default_factory=dict)
    rhs: Dict[str, float] = field(default_factory=dict)
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    negated: bool = False

    @classmethod
    def from_model(cls, model: MilpModel) -> "MpsData":
        data = cls(name=model.name, negated=True)
        data.rows = [
            (model.row_name(i), c.sense) for i, c in enumerate(model.constraints)
        ]
        by_column: Dict[int, List[Tuple[str, float]]] = {
            j: [] for j in range(model.num_variables)
        }
        cost = model.objective
        for j in range(model.num_variables):
            if cost[j] != 0:
                by_column[j].append((OBJECTIVE_ROW, -float(cost[j])))
        for i, constraint in enumerate(model.constraints):
            for j in sorted(constraint.coefficients):
                by_column[j].append(
                    (model.row_name(i), float(constraint.coefficients[j]))
                )
            if constraint.rhs != 0:
                data.rhs[model.row_name(i)] = constraint.rhs
        for j, variable in enumerate(model.variables):
            name = model.column_name(j)
            data.columns.append(name)
            data.integer.append(variable.integer)
            data.entries[name] = by_column[j] or [(OBJECTIVE_ROW, 0.0)]
            data.bounds[name] = (variable.lower, variable.upper)
        return data

    def to_arrays(
        self,
    ) -> Tuple[
        np.ndarray,
        sparse.csr_matrix,
        np.ndarray,
        np.ndarray,
        np.ndarray,
        np.ndarray,
        np.ndarray,
    ]:
        """
        Dense cost vector, sparse matrix and bounds of the minimization.

        :returns: ``(c, A, row_lower, row_upper, col_lower, col_upper,
            integrality)``.
        """
        row_index = {name: i for i, (name, _) in enumerate(self.rows)}
        c = np.zeros(len(self.columns))
        rows, cols, data = [], [], []
        for j, column in enumerate(self.columns):
            for row, value in self.entries.get(column, []):
                if row == OBJECTIVE_ROW:
                    c[j] += value
                else:
                    rows.append(row_index[row])
                    cols.append(j)
                    data.append(value)
        matrix = sparse.coo_matrix(
            (data, (rows, cols)), shape=(len(self.rows), len(self.columns))
        ).tocsr()
        row_lower = np.full(len(self.rows), -np.inf)
        row_upper = np.full(len(self.rows), np.inf)
        for i, (name, sense) in enumerate(self.rows):
            rhs = self.rhs.get(name, 0.0)
            if sense is not Sense.le:
                row_lower[i] = rhs
            if sense is not Sense.ge:
                row_upper[i] = rhs
        col_lower = np.array([self.bounds[name][0] for name in self.columns])
        col_upper = np.array([self.bounds[name][1] for name in self.columns])
        integrality = np.array(self.integer, dtype=np.uint8)
        return c, matrix, row_lower, row_upper, col_lower, col_upper, integrality


def _bound_lines(name: str, lower: float, upper: float, integer: bool) -> List[str]:
    if lower == upper:
        return [_line("FX", BOUND_NAME, name, format_number(lower))]
    lines = []
    if lower == -math.inf:
        lines.append(_line("MI", BOUND_NAME, name))
    elif lower != 0:
        lines.append(_line("LO", BOUND_NAME, name, format_number(lower)))
    if upper != math.inf:
        lines.append(_line("UP", BOUND_NAME, name, format_number(upper)))
    elif integer:
        lines.append(_line("PL", BOUND_NAME, name))
    return lines


def _mps_lines(data: MpsData) -> List[str]:
    lines = [f"NAME          {data.name}"]
    if data.negated:
        lines.append(NEGATED_MARKER)
    lines.append("ROWS")
    lines.append(_line("N", OBJECTIVE_ROW))
    for name, sense in data.rows:
        lines.append(_line(sense.value, name))
    lines.append("COLUMNS")
    in_integer = False
    for column, integer in zip(data.columns, data.integer):
        if integer != in_integer:
            marker = "'INTORG'" if integer else "'INTEND'"
            lines.append(_line("", MARKER_NAME, "'MARKER'", "", marker))
            in_integer = integer
        for row, value in data.entries[column]:
            lines.append(_line("", column, row, format_number(value)))
    if in_integer:
        lines.append(_line("", MARKER_NAME, "'MARKER'", "", "'INTEND'"))
    lines.append("RHS")
    for name, _ in data.rows:
        value = data.rhs.get(name, 0.0)
        if value != 0:
            lines.append(_line("", RHS_NAME, name, format_number(value)))
    lines.append("BOUNDS")
    for column, integer in zip(data.columns, data.integer):
        lower, upper = data.bounds[column]
        lines.extend(_bound_lines(column, lower, upper, integer))
    lines.append("ENDATA")
    return lines


@singledispatch
def write_mps(model: MilpModel, file_path: Path) -> None:
    """
    Write ``model`` as a fixed-format MPS file.

    The maximized profit is written as the minimization of its negation and
    flagged by a comment line so :func:`read_mps` can tell.

    :param model: Assembled model.
    :param file_path: Destination, created along with its parent directories.
    :raises MpsError: If a coefficient, bound or right-hand side cannot be
        represented.
    """
    write_mps(MpsData.from_model(model), file_path)


@write_mps.register(MpsData)
def _(data: MpsData, file_path: Path) -> None:
    """Write parsed MPS content back out."""
    text = "\n".join(_mps_lines(data)) + "\n"
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w") as mps_file:
        mps_file.write(text)


def _number(text: str, line_number: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise MpsError(f"line {line_number}: {text!r} is not a number")


def read_mps(file_path: Path) -> MpsData:
    """
    Parse a fixed-format MPS file written by :func:`write_mps`.

    Names may not contain spaces; RANGES sections are not supported.

    :raises MpsError: On unknown sections, records or undeclared names.
    """
    data = MpsData(name="")
    section: Optional[str] = None
    objective: Optional[str] = None
    senses: Dict[str, Sense] = {}
    in_integer = False
    with open(file_path) as mps_file:
        for line_number, line in enumerate(mps_file, start=1):
            line = line.rstrip("\n")
            if line.startswith("*"):
                if line.strip() == NEGATED_MARKER:
                    data.negated = True
                continue
            if not line.strip():
                continue
            tokens = line.split()
            if not line.startswith(" "):
                section = tokens[0]
                if section == "NAME":
                    data.name = tokens[1] if len(tokens) > 1 else ""
                elif section == "ENDATA":
                    break
                elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
                    raise MpsError(f"line {line_number}: unsupported section {section}")
                continue
            if section == "ROWS":
                sense, name = tokens
                if sense == "N":
                    if objective is None:
                        objective = name
                    continue
                try:
                    senses[name] = Sense(sense)
                except ValueError:
                    raise MpsError(f"line {line_number}: unknown row type {sense}")
                data.rows.append((name, senses[name]))
            elif section == "COLUMNS":
                if len(tokens) >= 3 and tokens[1] == "'MARKER'":
                    in_integer = tokens[-1] == "'INTORG'"
                    continue
                column = tokens[0]
                if column not in data.entries:
                    data.columns.append(column)
                    data.integer.append(in_integer)
                    data.entries[column] = []
                    data.bounds[column] = (0.0, math.inf)
                for row, value in zip(tokens[1::2], tokens[2::2]):
                    if row == objective:
                        row = OBJECTIVE_ROW
                    elif row not in senses:
                        raise MpsError(f"line {line_number}: undeclared row {row}")
                    data.entries[column].append((row, _number(value, line_number)))
            elif section == "RHS":
                for row, value in zip(tokens[1::2], tokens[2::2]):
                    if row not in senses:
                        raise MpsError(f"line {line_number}: undeclared row {row}")
                    data.rhs[row] = _number(value, line_number)
            elif section == "BOUNDS":
                kind, column = tokens[0], tokens[2]
                if column not in data.bounds:
                    raise MpsError(f"line {line_number}: undeclared column {column}")
                lower, upper = data.bounds[column]
                value = _number(tokens[3], line_number) if len(tokens) > 3 else None
                if kind == "FX":
                    lower = upper = value
                elif kind == "LO":
                    lower = value
                elif kind == "UP":
                    upper = value
                elif kind == "MI":
                    lower = -math.inf
                elif kind == "PL":
                    upper = math.inf
                elif kind == "BV":
                    lower, upper = 0.0, 1.0
                else:
                    raise MpsError(f"line {line_number}: unknown bound type {kind}")
                data.bounds[column] = (lower, upper)
            else:
                raise MpsError(f"line {line_number}: record outside any section")
    return data
