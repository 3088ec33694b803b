"""oosplan schedules on-orbit servicing infrastructures and trades architectures"""

__author__ = """Harsh Parekh"""
__email__ = "harsh_parekh@outlook.com"
__version__ = "0.1.0"

from oosplan.oosplan import (  # noqa: F401
    build_model,
    export_mps,
    forecast,
    run_schedule,
    run_trade,
    validate_scenario,
)
from oosplan.horizon import compare_architectures, propagate, run  # noqa: F401
from oosplan.scenario import Scenario, load_scenario, save_scenario  # noqa: F401
