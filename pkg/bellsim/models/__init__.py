"""Correlation models.

Every ``MeasurementModel`` subclass with a ``name`` defined in this package
is discovered by ``bellsim.modelloader.ModelLoader``.
"""

from bellsim.models.base import (
    ComplexProduct,
    MeasurementModel,
    PairOutcome,
    ParticleKind,
    SharedPayload,
    Station,
    StationView,
    TrialStreams,
    TrialValue,
    map_setting,
)

__all__ = [
    "ComplexProduct",
    "MeasurementModel",
    "PairOutcome",
    "ParticleKind",
    "SharedPayload",
    "Station",
    "StationView",
    "TrialStreams",
    "TrialValue",
    "map_setting",
]
