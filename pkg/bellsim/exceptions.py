"""Exception hierarchy for the bellsim package.

Library code raises these; the command layer maps them onto exit codes
(configuration and schedule problems exit with 1, I/O problems with 2).
"""

from typing import Iterable, List


class BellSimError(Exception):
    """Base class for every error raised by bellsim."""


class ConfigError(BellSimError, ValueError):
    """A run configuration value is missing, malformed or out of range."""


class EstimationError(BellSimError, ValueError):
    """An estimator precondition failed (for example ``n < 1``)."""


class MergeError(EstimationError):
    """Estimates that do not describe the same model and settings were merged."""


class ScheduleError(BellSimError, ValueError):
    """A trial schedule violates the event-ordering rules.

    Attributes:
        diagnoses: One human-readable line per violated rule.
    """

    def __init__(self, diagnoses: Iterable[str]) -> None:
        self.diagnoses: List[str] = list(diagnoses)
        super().__init__("; ".join(self.diagnoses) or "invalid schedule")


class CausalityError(BellSimError):
    """A causal log is incomplete or a station used a channel it does not have."""


class InvalidResult(BellSimError):
    """A result record failed validation before export."""
