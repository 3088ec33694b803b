"""Configuration for oosplan."""

import click

from dataclasses import dataclass, asdict
from enum import Enum
from pathlib import Path
from typing import Optional

from ruamel.yaml import YAML

__package_name__ = __package__.split(".")[0]

APP_DIR: str = click.get_app_dir(__package_name__)
DEFAULT_CONFIG_FILE_PATH: Path = Path(APP_DIR) / "config.yml"

DEFAULT_SOLVER_CMD: str = (
    "{python} -m oosplan.solve.highs {mps} {solution}"
    " --gap {gap} --time-limit {time_limit}"
)


class SolutionFormat(Enum):
    """Supported solver solution file formats"""

    generic = "generic"
    gurobi = "gurobi"
    cbc = "cbc"


class LogLevel(Enum):
    """Supported logging levels"""

    debug = "DEBUG"
    info = "INFO"
    warning = "WARNING"
    error = "ERROR"


@dataclass
class Config:
    solver_cmd: str = DEFAULT_SOLVER_CMD
    solution_format: str = SolutionFormat.generic.value
    gap: float = 0.01
    time_limit: float = 7200.0
    timeout_grace: float = 60.0
    workers: int = 1
    work_dir: str = ""
    keep_files: bool = False
    log_level: str = LogLevel.warning.value

    def __post_init__(self):
        self.output_format = self.solution_format
        self.logging_level = self.log_level
        self.relative_gap = self.gap
        self.time_limit_s = self.time_limit

    @property
    def output_format(self) -> SolutionFormat:
        return SolutionFormat(self.solution_format)

    @output_format.setter
    def output_format(self, solution_format: str) -> None:
        try:
            SolutionFormat(solution_format)
        except ValueError:
            raise ValueError(f"Unsupported solution format: {solution_format}")
        self.solution_format = solution_format

    @property
    def logging_level(self) -> LogLevel:
        return LogLevel(self.log_level)

    @logging_level.setter
    def logging_level(self, log_level: str) -> None:
        try:
            LogLevel(log_level.upper())
        except ValueError:
            raise ValueError(f"Unsupported log level: {log_level}")
        self.log_level = log_level.upper()

    @property
    def relative_gap(self) -> float:
        return self.gap

    @relative_gap.setter
    def relative_gap(self, gap: float) -> None:
        if not 0.0 <= float(gap) < 1.0:
            raise ValueError(f"Unsupported gap: {gap} (expected 0 <= gap < 1)")
        self.gap = float(gap)

    @property
    def time_limit_s(self) -> float:
        return self.time_limit

    @time_limit_s.setter
    def time_limit_s(self, time_limit: float) -> None:
        if float(time_limit) <= 0:
            raise ValueError(f"Unsupported time limit: {time_limit}")
        self.time_limit = float(time_limit)

    @property
    def work_path(self) -> Optional[Path]:
        return Path(self.work_dir) if self.work_dir else None

    @classmethod
    def from_yaml(cls, file_path: Path) -> "Config":
        config = YAML().load(file_path)
        return cls(**(config or {}))

    def to_yaml(self, file_path: Path) -> None:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        YAML().dump(asdict(self), file_path)


def load_config(config_file_path: Path = DEFAULT_CONFIG_FILE_PATH) -> Config:
    """
    Load configuration settings from a config file (yaml)

    :param config_file_path: pathlib.Path object to the config file.
    :returns: Config object
    """
    if config_file_path.exists():
        config = Config.from_yaml(config_file_path)
    else:
        config = Config()
        config.to_yaml(config_file_path)
    return config


config: Config = load_config(DEFAULT_CONFIG_FILE_PATH)
