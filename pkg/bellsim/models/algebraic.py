"""The anticommuting shared-variable model.

Station A holds the local element ``lam . a`` and station B ``-lam . b``,
both kept in algebraic form. At coincidence their product is
``-(a . b) - i (a x b) . l``; the sampled real direction is substituted into
the residual vector term only, giving the complex per-trial value

    z = -[(a . b) + i lam . (a x b)]

Re z is ``-cos(theta)`` on every trial and Im z averages to zero over the
sphere. No rule for extracting +/-1 outcomes from z is assumed: the full
complex value is the trial result.
"""

import numpy as np

from bellsim.algebra import evaluate_rows, vector_product
from bellsim.geometry import UnitVector3, dot
from bellsim.models.base import (
    AlgebraRecord,
    ComplexProduct,
    ComplexProductBatch,
    MeasurementModel,
    SharedPayload,
    StationRecord,
    StationView,
)


def algebraic_pair_value(payload: SharedPayload, a: UnitVector3, b: UnitVector3) -> ComplexProduct:
    """Per-trial value for a one-trial payload."""
    if len(payload) != 1:
        raise ValueError(f"Expected a one-trial payload, got {len(payload)} trials")
    coefficients = vector_product(a.as_array()[None, :], -b.as_array()[None, :])
    return ComplexProduct(complex(evaluate_rows(coefficients, payload.lam)[0]))


class AlgebraicModel(MeasurementModel):
    """Shared direction with anticommuting components."""

    name = "algebraic"
    description = "shared variable with anticommuting components, real lam in the residual term"

    def measure(self, view: StationView) -> StationRecord:
        elements = view.station.sign * np.asarray(view.setting, dtype=float)
        return AlgebraRecord(elements=elements, lam=view.payload.lam)

    def coincide(self, record_a: StationRecord, record_b: StationRecord) -> ComplexProductBatch:
        coefficients = vector_product(record_a.elements, record_b.elements)
        z = evaluate_rows(coefficients, record_a.lam)
        local = np.stack([record_a.local_values(), record_b.local_values()], axis=1)
        return ComplexProductBatch(z=z, local=local)

    def expected_correlation(self, a: UnitVector3, b: UnitVector3) -> float:
        return -dot(a, b)
