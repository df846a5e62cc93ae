"""The sign-prescription local hidden variable model.

Each station reports the sign of the shared direction projected on its
setting, with station B carrying the opposite sign so matched settings
anticorrelate perfectly. Averaging over the sphere gives a correlation
linear in the relative angle, ``-1 + 2 theta / pi``.
"""

import math

import numpy as np

from bellsim.geometry import UnitVector3, dot_rows, relative_angle
from bellsim.models.base import (
    MeasurementModel,
    OutcomeRecord,
    PairOutcome,
    PairOutcomeBatch,
    SharedPayload,
    StationRecord,
    StationView,
)


def _sign(projection: np.ndarray) -> np.ndarray:
    # sign(0) is +1
    return np.where(projection >= 0.0, 1, -1).astype(np.int8)


def lhv_sign_outcomes(payload: SharedPayload, a: UnitVector3, b: UnitVector3) -> PairOutcome:
    """Outcomes ``A = sign(lam . a)`` and ``B = -sign(lam . b)`` for a one-trial payload.

    ``-sign(lam . b)`` equals ``sign(-lam . b)`` except on the measure-zero
    tie ``lam . b = 0``, where it keeps matched settings anticorrelated.
    """
    if len(payload) != 1:
        raise ValueError(f"Expected a one-trial payload, got {len(payload)} trials")
    lam = payload.lam
    a_out = _sign(dot_rows(lam, a.as_array()[None, :]))[0]
    b_out = -_sign(dot_rows(lam, b.as_array()[None, :]))[0]
    return PairOutcome(int(a_out), int(b_out))


def lhv_correlation_closed_form(theta: float) -> float:
    """Ensemble correlation of the sign model at relative angle ``theta``."""
    return -1.0 + 2.0 * theta / math.pi


class SignModel(MeasurementModel):
    """Deterministic outcomes from a real shared unit vector."""

    name = "lhv-sign"
    description = "local hidden variable model A = sign(lam . a), B = -A(b)"

    def measure(self, view: StationView) -> StationRecord:
        outcomes = _sign(dot_rows(view.payload.lam, view.setting))
        return OutcomeRecord(outcomes=(view.station.sign * outcomes).astype(np.int8))

    def coincide(self, record_a: StationRecord, record_b: StationRecord) -> PairOutcomeBatch:
        return PairOutcomeBatch(a_out=record_a.outcomes, b_out=record_b.outcomes)

    def expected_correlation(self, a: UnitVector3, b: UnitVector3) -> float:
        return lhv_correlation_closed_form(relative_angle(a, b))
