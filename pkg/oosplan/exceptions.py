"""Exceptions raised by oosplan."""

from typing import Iterable, List, Optional


class OOSError(Exception):
    """Base class for every error raised by oosplan."""


class NoFeasibleTransfer(OOSError):
    """No phasing maneuver meets the altitude and time-of-flight limits."""


class ScenarioError(OOSError):
    """A scenario file failed validation.

    :param problems: One ``field.path: message`` entry per problem found.
    """

    def __init__(self, problems: Iterable[str]):
        self.problems: List[str] = list(problems)
        super().__init__("; ".join(self.problems) or "invalid scenario")


class ModelBuildError(OOSError):
    """The MILP could not be assembled.

    :param failures: One entry per failure, each naming where it happened.
    """

    def __init__(self, failures: Iterable[str]):
        self.failures: List[str] = list(failures)
        super().__init__(
            f"{len(self.failures)} model build failure(s): "
            + "; ".join(self.failures[:10])
        )


class MpsError(OOSError):
    """An MPS file cannot be written or read."""


class BackendUnavailable(OOSError):
    """The configured solver command cannot be executed."""


class ProtocolError(OOSError):
    """The solver output could not be interpreted.

    :param output: Captured solver output kept for diagnostics.
    """

    def __init__(self, message: str, output: str = ""):
        self.output = output
        super().__init__(message)


class InstanceTooLarge(OOSError):
    """The instance exceeds the exhaustive enumeration budget."""


class PlanningInfeasible(OOSError):
    """A planning-horizon model has no feasible solution.

    :param diagnostics: Model statistics and solver message of the failed solve.
    """

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class StateCorruption(OOSError):
    """Propagating the committed plan produced an inconsistent state."""
