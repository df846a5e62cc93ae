"""Exact singlet-state statistics.

Joint outcome probabilities for settings ``a`` and ``b`` are
``P(s, t) = (1 - s t (a . b)) / 4``: both marginals are exactly 1/2 and the
correlation is ``-a . b``. Sampling fixes A's outcome from A's own draw and
B's outcome from B's own draw conditioned on A, which needs both settings at
the coincidence stage; stations therefore only record their setting and one
local uniform draw.
"""

import math
from typing import Dict, Tuple, Union

import numpy as np

from bellsim.geometry import RngStream, UnitVector3, dot, dot_rows, relative_angle
from bellsim.models.base import (
    DeferredRecord,
    MeasurementModel,
    PairOutcome,
    PairOutcomeBatch,
    ParticleKind,
    StationRecord,
    StationView,
)


# hbar in the natural units used throughout
HBAR: float = 1.0


def qm_correlation(a: UnitVector3, b: UnitVector3, kind: Union[ParticleKind, str] = ParticleKind.SPIN_HALF) -> float:
    """Singlet correlation of the +/-1 outcomes.

    Args:
        a: Setting (spin) or analyzer direction in the plane (photon).
        b: Setting (spin) or analyzer direction in the plane (photon).
        kind: Spin-1/2 gives ``-a . b``; photon gives ``-cos(2 theta)``
            with ``theta`` the angle between the analyzers.
    """
    if ParticleKind.parse(kind) is ParticleKind.PHOTON:
        return -math.cos(2.0 * relative_angle(a, b))
    return -dot(a, b)


def spin_projection_correlation(a: UnitVector3, b: UnitVector3) -> float:
    """Correlation of the spin projections (+/- hbar/2): ``-a . b hbar^2 / 4``."""
    return -dot(a, b) * HBAR * HBAR / 4.0


def qm_joint_probabilities(a: UnitVector3, b: UnitVector3) -> Dict[Tuple[int, int], float]:
    """The four joint probabilities ``P(s, t)`` keyed by ``(s, t)``."""
    c = dot(a, b)
    return {(s, t): (1.0 - s * t * c) / 4.0 for s in (1, -1) for t in (1, -1)}


def _sample_outcomes(u_a: np.ndarray, u_b: np.ndarray, ab: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a_out = np.where(u_a < 0.5, 1, -1).astype(np.int8)
    # P(t = -s | s) = (1 + a.b) / 2; equals 1 for matched settings
    anti = u_b < (1.0 + ab) / 2.0
    b_out = np.where(anti, -a_out, a_out).astype(np.int8)
    return a_out, b_out


def qm_sample_pair(a: UnitVector3, b: UnitVector3, rng: RngStream) -> PairOutcome:
    """Sample one outcome pair from ``qm_joint_probabilities(a, b)``.

    Consumes two uniform draws: the first fixes A's outcome, the second B's.
    """
    u_a, u_b = np.asarray(rng.random(2))
    a_out, b_out = _sample_outcomes(np.array([u_a]), np.array([u_b]), np.array([dot(a, b)]))
    return PairOutcome(int(a_out[0]), int(b_out[0]))


class QuantumSingletModel(MeasurementModel):
    """Monte Carlo sampling of the exact singlet statistics."""

    name = "qm"
    description = "exact spin-1/2 singlet statistics"

    def measure(self, view: StationView) -> StationRecord:
        return DeferredRecord(setting=view.setting, draws=np.asarray(view.rng.random(len(view))))

    def coincide(self, record_a: StationRecord, record_b: StationRecord) -> PairOutcomeBatch:
        ab = dot_rows(record_a.setting, record_b.setting)
        a_out, b_out = _sample_outcomes(record_a.draws, record_b.draws, ab)
        return PairOutcomeBatch(a_out=a_out, b_out=b_out)

    def expected_correlation(self, a: UnitVector3, b: UnitVector3) -> float:
        return qm_correlation(a, b)
