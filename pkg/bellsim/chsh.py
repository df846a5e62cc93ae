"""The CHSH combination ``P(a,b) + P(a',b) - P(a,b') + P(a',b')``.

For any assignment of +/-1 values to ``A, A', B, B'`` the single-trial
combination ``AB + A'B - AB' + A'B'`` equals ``A(B - B') + A'(B + B')``,
which is always +/-2; the average over trials is therefore bounded by 2 in
magnitude for models that assign simultaneous values.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple, Union

from bellsim.geometry import UnitVector3
from bellsim.models.base import ParticleKind, map_setting
from bellsim.statistics import CorrelationEstimate

LOCAL_BOUND: float = 2.0
TSIRELSON_BOUND: float = 2.0 * math.sqrt(2.0)

# Analyzer angles in degrees (a, a', b, b') giving maximal quantum violation
CANONICAL_ANGLES_DEG: Dict[ParticleKind, Tuple[float, float, float, float]] = {
    ParticleKind.SPIN_HALF: (0.0, 90.0, 45.0, 135.0),
    ParticleKind.PHOTON: (0.0, 45.0, 22.5, 67.5),
}

# Setting-index pairs (i_a, i_b) in the order of the combination, with signs
TERMS: Tuple[Tuple[Tuple[int, int], int], ...] = (
    ((0, 0), 1),
    ((1, 0), 1),
    ((0, 1), -1),
    ((1, 1), 1),
)


def chsh_combination(a: float, a_prime: float, b: float, b_prime: float) -> float:
    """``AB + A'B - AB' + A'B'`` for one trial's +/-1 values."""
    return a * b + a_prime * b - a * b_prime + a_prime * b_prime


def enumerate_chsh_assignments() -> List[Tuple[Tuple[int, int, int, int], int]]:
    """All 16 +/-1 assignments to ``(A, A', B, B')`` with their combination value."""
    return [
        ((a, a_prime, b, b_prime), int(chsh_combination(a, a_prime, b, b_prime)))
        for a, a_prime, b, b_prime in itertools.product((1, -1), repeat=4)
    ]


@dataclass(frozen=True)
class ChshSettings:
    """The four settings of a CHSH run.

    Attributes:
        a: First setting at station A.
        a_prime: Second setting at station A.
        b: First setting at station B.
        b_prime: Second setting at station B.
    """

    a: UnitVector3
    a_prime: UnitVector3
    b: UnitVector3
    b_prime: UnitVector3

    @classmethod
    def from_angles(
        cls, angles_deg: Sequence[float], kind: Union[ParticleKind, str] = ParticleKind.SPIN_HALF
    ) -> "ChshSettings":
        """Build planar settings from analyzer angles in degrees.

        Raises:
            ValueError: Unless exactly four angles are given.
        """
        if len(angles_deg) != 4:
            raise ValueError(f"CHSH needs four angles (a, a', b, b'), got {len(angles_deg)}")
        vectors = [map_setting(kind, math.radians(float(angle))) for angle in angles_deg]
        return cls(*vectors)

    @staticmethod
    def canonical_angles(kind: Union[ParticleKind, str] = ParticleKind.SPIN_HALF) -> Tuple[float, float, float, float]:
        return CANONICAL_ANGLES_DEG[ParticleKind.parse(kind)]

    @classmethod
    def canonical(cls, kind: Union[ParticleKind, str] = ParticleKind.SPIN_HALF) -> "ChshSettings":
        return cls.from_angles(cls.canonical_angles(kind), kind)

    def station_a(self) -> Tuple[UnitVector3, UnitVector3]:
        return (self.a, self.a_prime)

    def station_b(self) -> Tuple[UnitVector3, UnitVector3]:
        return (self.b, self.b_prime)

    def pair(self, index_a: int, index_b: int) -> Tuple[UnitVector3, UnitVector3]:
        return (self.station_a()[index_a], self.station_b()[index_b])

    def to_dict(self) -> Dict[str, List[float]]:
        return {
            "a": list(self.a.as_tuple()),
            "a_prime": list(self.a_prime.as_tuple()),
            "b": list(self.b.as_tuple()),
            "b_prime": list(self.b_prime.as_tuple()),
        }


@dataclass(frozen=True)
class ChshResult:
    """Four correlation estimates and their CHSH combination.

    ``estimates`` follows ``TERMS``: ``(a, b), (a', b), (a, b'), (a', b')``.
    """

    settings: ChshSettings
    estimates: Tuple[CorrelationEstimate, CorrelationEstimate, CorrelationEstimate, CorrelationEstimate]

    @property
    def s_value(self) -> float:
        return sum(sign * e.mean for (_, sign), e in zip(TERMS, self.estimates))

    @property
    def s_stderr(self) -> float:
        return math.sqrt(sum(e.stderr ** 2 for e in self.estimates))

    @property
    def violates_local_bound(self) -> bool:
        """True when ``|S|`` exceeds 2 by more than four standard errors."""
        return abs(self.s_value) > LOCAL_BOUND + 4.0 * self.s_stderr

    def to_dict(self) -> Dict[str, Any]:
        labels = ("P(a,b)", "P(a',b)", "P(a,b')", "P(a',b')")
        return {
            "settings": self.settings.to_dict(),
            "correlations": [dict(term=label, **e.to_dict()) for label, e in zip(labels, self.estimates)],
            "s_value": self.s_value,
            "s_stderr": self.s_stderr,
            "abs_s": abs(self.s_value),
            "local_bound": LOCAL_BOUND,
            "tsirelson_bound": TSIRELSON_BOUND,
            "violates_local_bound": self.violates_local_bound,
        }
