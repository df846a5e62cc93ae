"""The pluggable measurement-model contract and its per-trial value types.

A model runs a trial in three stages that mirror the experiment:

1. ``emit`` -- the source draws the shared payload once per trial.
2. ``measure`` -- each station turns (its setting, the payload, its own
   random stream) into a ``StationRecord``. Stations see only those three
   inputs, delivered through a ``StationView``.
3. ``coincide`` -- the two records are brought together after the fact (the
   classical channel used to compare results) and combined into the trial
   value.

All stages work on blocks of trials: settings are ``(m, 3)`` arrays, so the
same code serves a single event-driven trial and a million-trial estimate.
"""

import enum
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, Optional, Set, Tuple, Union

import numpy as np

from bellsim.exceptions import CausalityError
from bellsim.geometry import RngStream, UnitVector3, dot_rows, sample_uniform_sphere_many


class ParticleKind(enum.Enum):
    """Spin-1/2 particles or polarization-entangled photons."""

    SPIN_HALF = "spin"
    PHOTON = "photon"

    @classmethod
    def parse(cls, value: Union[str, "ParticleKind"]) -> "ParticleKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"Unknown particle kind {value!r}; expected 'spin' or 'photon'") from None


class Station(enum.Enum):
    """The two measuring stations; A pairs with +lambda, B with -lambda."""

    A = "A"
    B = "B"

    @property
    def sign(self) -> int:
        return 1 if self is Station.A else -1

    @property
    def permitted_inputs(self) -> frozenset:
        suffix = self.value.lower()
        return frozenset({f"setting_{suffix}", "payload", f"rng_{suffix}"})


def map_setting(kind: Union[ParticleKind, str], analyzer_angle: float) -> UnitVector3:
    """Turn an analyzer angle (radians) into the spin-space setting vector.

    Photon analyzer angles are doubled: orthogonal polarizations sit 90
    degrees apart but must map onto antiparallel spin settings.
    """
    kind = ParticleKind.parse(kind)
    factor = 2.0 if kind is ParticleKind.PHOTON else 1.0
    return UnitVector3.planar(factor * analyzer_angle)


def tile_setting(setting: UnitVector3, size: int) -> np.ndarray:
    """A read-only ``(size, 3)`` view repeating one setting on every row."""
    return np.broadcast_to(setting.as_array(), (size, 3))


@dataclass(frozen=True)
class SharedPayload:
    """Shared directions emitted at the source, one row per trial.

    Station A associates ``+lam`` and station B ``-lam``; the array is never
    modified after emission.
    """

    lam: np.ndarray

    def __post_init__(self) -> None:
        self.lam.setflags(write=False)

    def __len__(self) -> int:
        return len(self.lam)


class StationView:
    """Everything a station procedure receives for a block of trials.

    The harness delivers ``setting``, ``payload`` and ``rng``. ``remote`` is
    the only route to anything else and every use of it is written to the
    ledger; outside the locality harness there is no remote data at all.

    Args:
        station: Which station this view belongs to.
        setting: ``(m, 3)`` array of local settings.
        payload: Shared payload of the block.
        rng: The station's own random stream.
        ledger: Set that collects the names of inputs the station received.
        environment: Full trial environment, present only inside the harness.
    """

    def __init__(
        self,
        station: Station,
        setting: np.ndarray,
        payload: SharedPayload,
        rng: RngStream,
        ledger: Optional[Set[str]] = None,
        environment: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.station = station
        self.setting = setting
        self.payload = payload
        self.rng = rng
        self.ledger: Set[str] = ledger if ledger is not None else set()
        self.ledger.update(station.permitted_inputs)
        self._environment = environment

    def __len__(self) -> int:
        return len(self.setting)

    def remote(self, name: str) -> Any:
        """Read a trial input by name, recording the access in the ledger.

        Raises:
            CausalityError: Outside the locality harness, or for unknown names.
        """
        if self._environment is None:
            raise CausalityError(f"Station {self.station.value} has no channel to '{name}'")
        if name not in self._environment:
            raise CausalityError(f"Unknown trial input '{name}'")
        self.ledger.add(name)
        return self._environment[name]


class StationRecord(ABC):
    """What a station writes down for a block of trials."""

    kind: ClassVar[str] = ""

    @abstractmethod
    def local_values(self) -> np.ndarray:
        """Real per-trial value the station alone would report."""


@dataclass(frozen=True)
class OutcomeRecord(StationRecord):
    """Final +/-1 outcomes fixed at the station."""

    kind: ClassVar[str] = "+/-1 outcome"
    outcomes: np.ndarray

    def local_values(self) -> np.ndarray:
        return self.outcomes.astype(float)


@dataclass(frozen=True)
class AlgebraRecord(StationRecord):
    """The local element ``(+/-lam) . setting`` kept in algebraic form.

    ``elements`` holds the vector coefficients ``sign * setting``; the
    element is ``sum_k elements[:, k] * l_k``.
    """

    kind: ClassVar[str] = "algebra element"
    elements: np.ndarray
    lam: np.ndarray

    def local_values(self) -> np.ndarray:
        return dot_rows(self.elements, self.lam)


@dataclass(frozen=True)
class DeferredRecord(StationRecord):
    """The local setting and one local uniform draw; the outcome is fixed at coincidence."""

    kind: ClassVar[str] = "local draw (outcome fixed at coincidence)"
    setting: np.ndarray
    draws: np.ndarray

    def local_values(self) -> np.ndarray:
        return np.where(self.draws < 0.5, 1.0, -1.0)


@dataclass(frozen=True)
class PairOutcome:
    """One trial's pair of real outcomes."""

    a_out: int
    b_out: int

    def __post_init__(self) -> None:
        if self.a_out not in (-1, 1) or self.b_out not in (-1, 1):
            raise ValueError(f"Outcomes must be +/-1, got ({self.a_out}, {self.b_out})")

    @property
    def product(self) -> int:
        return self.a_out * self.b_out


@dataclass(frozen=True)
class ComplexProduct:
    """One trial's complex pair value."""

    z: complex

    def __post_init__(self) -> None:
        if not (math.isfinite(self.z.real) and math.isfinite(self.z.imag)):
            raise ValueError(f"Non-finite trial value {self.z!r}")
        if abs(self.z.real) > 1.0 + 1e-12 or abs(self.z.imag) > 1.0 + 1e-12:
            raise ValueError(f"Trial value {self.z!r} outside the unit square")

    @property
    def product(self) -> complex:
        return self.z


TrialValue = Union[PairOutcome, ComplexProduct]


class TrialBatch(ABC):
    """Per-trial values of a block, plus the station-level local values."""

    codomain: ClassVar[str] = ""

    @abstractmethod
    def __len__(self) -> int:
        ...

    @abstractmethod
    def products(self) -> np.ndarray:
        """Real per-trial values averaged by the correlation estimator."""

    def imaginary(self) -> Optional[np.ndarray]:
        """Imaginary per-trial parts, or None for real-valued models."""
        return None

    @abstractmethod
    def trial(self, index: int) -> TrialValue:
        ...

    @abstractmethod
    def marginals(self) -> np.ndarray:
        """``(m, 2)`` array of the stations' local values."""


@dataclass
class PairOutcomeBatch(TrialBatch):
    codomain: ClassVar[str] = "real +/-1 pair"
    a_out: np.ndarray
    b_out: np.ndarray

    def __len__(self) -> int:
        return len(self.a_out)

    def products(self) -> np.ndarray:
        return (self.a_out * self.b_out).astype(float)

    def trial(self, index: int) -> PairOutcome:
        return PairOutcome(int(self.a_out[index]), int(self.b_out[index]))

    def marginals(self) -> np.ndarray:
        return np.stack([self.a_out, self.b_out], axis=1).astype(float)


@dataclass
class ComplexProductBatch(TrialBatch):
    codomain: ClassVar[str] = "complex scalar"
    z: np.ndarray
    local: np.ndarray

    def __len__(self) -> int:
        return len(self.z)

    def products(self) -> np.ndarray:
        return np.ascontiguousarray(self.z.real)

    def imaginary(self) -> np.ndarray:
        return np.ascontiguousarray(self.z.imag)

    def trial(self, index: int) -> ComplexProduct:
        return ComplexProduct(complex(self.z[index]))

    def marginals(self) -> np.ndarray:
        return self.local


@dataclass(frozen=True)
class TrialStreams:
    """The independent random streams one block of trials consumes."""

    payload: RngStream
    a: RngStream
    b: RngStream
    choice_a: RngStream
    choice_b: RngStream

    SOURCE: ClassVar[int] = 0
    STATION_A: ClassVar[int] = 1
    STATION_B: ClassVar[int] = 2
    CHOICE_A: ClassVar[int] = 3
    CHOICE_B: ClassVar[int] = 4

    @classmethod
    def for_block(cls, seed: int, stream: int, block: int) -> "TrialStreams":
        base = RngStream(seed, stream).child(block)
        return cls(
            payload=base.child(cls.SOURCE),
            a=base.child(cls.STATION_A),
            b=base.child(cls.STATION_B),
            choice_a=base.child(cls.CHOICE_A),
            choice_b=base.child(cls.CHOICE_B),
        )


class MeasurementModel(ABC):
    """Base class for correlation models.

    Subclasses set ``name`` and implement ``measure``, ``coincide`` and
    ``expected_correlation``. ``emit`` defaults to the uniform sphere.
    """

    name: ClassVar[str] = ""
    description: ClassVar[str] = ""

    def emit(self, rng: RngStream, size: int) -> SharedPayload:
        """Draw the shared payload for ``size`` trials."""
        return SharedPayload(sample_uniform_sphere_many(rng, size))

    @abstractmethod
    def measure(self, view: StationView) -> StationRecord:
        """Run one station's procedure on a block of trials."""

    @abstractmethod
    def coincide(self, record_a: StationRecord, record_b: StationRecord) -> TrialBatch:
        """Combine the two stations' records into per-trial values."""

    @abstractmethod
    def expected_correlation(self, a: UnitVector3, b: UnitVector3) -> float:
        """Closed-form ensemble correlation for settings ``a`` and ``b``."""

    def run_block(
        self, settings_a: np.ndarray, settings_b: np.ndarray, streams: TrialStreams
    ) -> TrialBatch:
        """Evaluate one block of trials without the event harness."""
        return self.run_block_with_records(settings_a, settings_b, streams)[0]

    def run_block_with_records(
        self, settings_a: np.ndarray, settings_b: np.ndarray, streams: TrialStreams
    ) -> Tuple[TrialBatch, StationRecord, StationRecord]:
        """Like ``run_block`` but also return both station records."""
        payload = self.emit(streams.payload, len(settings_a))
        record_a = self.measure(StationView(Station.A, settings_a, payload, streams.a))
        record_b = self.measure(StationView(Station.B, settings_b, payload, streams.b))
        return self.coincide(record_a, record_b), record_a, record_b

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name!r}>"
