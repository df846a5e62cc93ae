"""Event-driven two-station trial harness.

Trials play out on a line: the source sits at ``x = 0`` and the stations at
``x = -L`` (A) and ``x = +L`` (B), with signal speed ``c``. Every trial runs
through the same sequence of events, ordered by time on a priority queue:

    Emit -> ChooseSetting (A, B) -> Measure (A, B) -> Coincide

Stations are handed a ``StationView`` holding only their own setting, the
shared payload and their own random stream. The only way to anything else is
``StationView.remote``, and every use of it ends up in the information-flow
ledger of the ``CausalLog``.

Trials are processed a block at a time, with the same block partition and
random sub-streams as ``bellsim.experiments.estimate_correlation``; the
harness therefore reproduces the direct estimate bit for bit.
"""

import enum
import heapq
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from bellsim.chsh import TERMS, ChshResult, ChshSettings
from bellsim.exceptions import CausalityError, ScheduleError
from bellsim.geometry import UnitVector3
from bellsim.models.base import (
    MeasurementModel,
    Station,
    StationRecord,
    StationView,
    TrialBatch,
    TrialStreams,
    TrialValue,
    tile_setting,
)
from bellsim.statistics import (
    DEFAULT_BLOCK_SIZE,
    CorrelationEstimate,
    block_sizes,
    map_blocks,
    merge_estimates,
)

logger = logging.getLogger(__name__)

LOG_SCHEMA_VERSION = "1.0"

SCOPE_NOTE = (
    "The harness certifies the information-flow structure of the implemented "
    "station procedures (which inputs each station received and when). It "
    "makes no claim about physical collapse or its absence."
)


class Actor(enum.Enum):
    SOURCE = "source"
    STATION_A = "A"
    STATION_B = "B"
    COINCIDENCE = "coincidence"


class EventKind(enum.Enum):
    EMIT = "emit"
    CHOOSE_SETTING = "choose-setting"
    MEASURE = "measure"
    COINCIDE = "coincide"


_STATION_ACTORS: Dict[Station, Actor] = {Station.A: Actor.STATION_A, Station.B: Actor.STATION_B}


@dataclass(frozen=True)
class SpacetimeEvent:
    """One event of a trial block on the 1-D line."""

    actor: Actor
    kind: EventKind
    position: float
    time: float
    summary: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "actor": self.actor.value,
            "kind": self.kind.value,
            "position": self.position,
            "time": self.time,
            "summary": self.summary,
        }


@dataclass(frozen=True)
class TrialSchedule:
    """Station separation, signal speed and the time of every event.

    Attributes:
        separation: Distance ``L`` from the source to each station.
        choose_a: Time station A picks its setting.
        choose_b: Time station B picks its setting.
        measure_a: Time station A measures.
        measure_b: Time station B measures.
        emit: Time the source emits the pair.
        signal_speed: ``c``; 1 in the units used throughout.
    """

    separation: float = 1.0
    choose_a: float = 0.5
    choose_b: float = 0.5
    measure_a: float = 0.9
    measure_b: float = 0.9
    emit: float = 0.0
    signal_speed: float = 1.0

    @classmethod
    def from_times(cls, separation: float, times: Sequence[float]) -> "TrialSchedule":
        """Build a schedule from ``(choose, measure)`` or ``(choose_a, choose_b, measure_a, measure_b)``.

        Raises:
            ScheduleError: For any other number of times.
        """
        times = [float(t) for t in times]
        if len(times) == 2:
            choose, measure = times
            return cls(float(separation), choose, choose, measure, measure)
        if len(times) == 4:
            return cls(float(separation), *times)
        raise ScheduleError([f"Expected 2 or 4 event times, got {len(times)}"])

    def position(self, actor: Actor) -> float:
        if actor is Actor.STATION_A:
            return -self.separation
        if actor is Actor.STATION_B:
            return self.separation
        return 0.0

    @property
    def light_time(self) -> float:
        """Time a light signal needs from one station to the other, ``2L/c``."""
        return 2.0 * self.separation / self.signal_speed

    @property
    def measurement_gap(self) -> float:
        return abs(self.measure_a - self.measure_b)

    @property
    def spacelike(self) -> bool:
        return self.measurement_gap < self.light_time

    @property
    def choice_spacelike(self) -> bool:
        """Each setting choice is outside the light cone of the remote measurement."""
        return (
            abs(self.choose_a - self.measure_b) < self.light_time
            and abs(self.choose_b - self.measure_a) < self.light_time
        )

    @property
    def coincide(self) -> float:
        """Both results reach the coincidence counter at the source."""
        return max(self.measure_a, self.measure_b) + self.separation / self.signal_speed

    def diagnose(self, require_spacelike: bool = False) -> List[str]:
        """Every violated rule, one line each; empty for a valid schedule."""
        values = {
            "separation": self.separation,
            "signal_speed": self.signal_speed,
            "emit": self.emit,
            "choose_a": self.choose_a,
            "choose_b": self.choose_b,
            "measure_a": self.measure_a,
            "measure_b": self.measure_b,
        }
        problems = [f"{name} must be finite, got {value!r}" for name, value in values.items() if not math.isfinite(value)]
        if problems:
            return problems
        if self.separation <= 0:
            problems.append(f"Station separation must be positive, got {self.separation}")
        if self.signal_speed <= 0:
            problems.append(f"Signal speed must be positive, got {self.signal_speed}")
        for station, choose, measure in (
            ("A", self.choose_a, self.measure_a),
            ("B", self.choose_b, self.measure_b),
        ):
            if not choose > self.emit:
                problems.append(
                    f"ChooseSetting at station {station} (t={choose}) must follow Emit (t={self.emit})"
                )
            if not measure > choose:
                problems.append(
                    f"Measure at station {station} (t={measure}) must follow its ChooseSetting (t={choose})"
                )
        if require_spacelike and not problems and not self.spacelike:
            problems.append(
                f"Measurements are not spacelike separated: |dt| = {self.measurement_gap} "
                f">= 2L/c = {self.light_time}"
            )
        return problems

    def validate(self, require_spacelike: bool = False) -> "TrialSchedule":
        """Return the schedule unchanged, or raise with every diagnosis.

        Raises:
            ScheduleError: If ``diagnose`` reports anything.
        """
        problems = self.diagnose(require_spacelike)
        if problems:
            raise ScheduleError(problems)
        return self

    def to_dict(self) -> Dict[str, float]:
        return {
            "separation": self.separation,
            "signal_speed": self.signal_speed,
            "emit": self.emit,
            "choose_a": self.choose_a,
            "choose_b": self.choose_b,
            "measure_a": self.measure_a,
            "measure_b": self.measure_b,
            "coincide": self.coincide,
            "light_time": self.light_time,
        }


@dataclass
class CausalLog:
    """Events and information-flow ledger of one block of trials.

    Attributes:
        events: Events in the order they were processed.
        ledger: Names of the inputs each station received, keyed ``"A"``/``"B"``.
        trials: Number of trials the block covers.
        first_trial: Index of the block's first trial within the run.
    """

    events: List[SpacetimeEvent] = field(default_factory=list)
    ledger: Dict[str, FrozenSet[str]] = field(default_factory=dict)
    trials: int = 0
    first_trial: int = 0

    def find(self, actor: Actor, kind: EventKind) -> Optional[SpacetimeEvent]:
        for event in self.events:
            if event.actor is actor and event.kind is kind:
                return event
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "first_trial": self.first_trial,
            "trials": self.trials,
            "events": [event.to_dict() for event in self.events],
            "ledger": {station: sorted(inputs) for station, inputs in sorted(self.ledger.items())},
        }


@dataclass(frozen=True)
class CausalityReport:
    """Outcome of ``check_causality`` for one log."""

    spacelike: bool
    choice_spacelike: bool
    ledger_clean: bool
    measurement_gap: float
    light_time: float
    violations: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spacelike": self.spacelike,
            "choice_spacelike": self.choice_spacelike,
            "ledger_clean": self.ledger_clean,
            "measurement_gap": self.measurement_gap,
            "light_time": self.light_time,
            "violations": {station: list(names) for station, names in sorted(self.violations.items())},
        }


def _separated(first: SpacetimeEvent, second: SpacetimeEvent, signal_speed: float) -> bool:
    return abs(first.time - second.time) < abs(first.position - second.position) / signal_speed


def check_causality(log: CausalLog, schedule: TrialSchedule) -> CausalityReport:
    """Check spacelike separation and ledger hygiene of a complete log.

    ``spacelike`` compares the two Measure events; ``ledger_clean`` holds
    when each station received exactly its permitted inputs.

    Raises:
        CausalityError: If an Emit, ChooseSetting or Measure event or a
            station's ledger entry is missing.
    """
    required = [
        (Actor.SOURCE, EventKind.EMIT),
        (Actor.STATION_A, EventKind.CHOOSE_SETTING),
        (Actor.STATION_B, EventKind.CHOOSE_SETTING),
        (Actor.STATION_A, EventKind.MEASURE),
        (Actor.STATION_B, EventKind.MEASURE),
    ]
    found = {key: log.find(*key) for key in required}
    missing = [f"{actor.value} {kind.value}" for (actor, kind), event in found.items() if event is None]
    missing += [f"ledger of station {s.value}" for s in Station if s.value not in log.ledger]
    if missing:
        raise CausalityError(f"Incomplete causal log, missing: {', '.join(missing)}")

    measure_a = found[(Actor.STATION_A, EventKind.MEASURE)]
    measure_b = found[(Actor.STATION_B, EventKind.MEASURE)]
    choose_a = found[(Actor.STATION_A, EventKind.CHOOSE_SETTING)]
    choose_b = found[(Actor.STATION_B, EventKind.CHOOSE_SETTING)]
    speed = schedule.signal_speed

    violations: Dict[str, Tuple[str, ...]] = {}
    for station in Station:
        received = log.ledger[station.value]
        if received != station.permitted_inputs:
            violations[station.value] = tuple(sorted(received ^ station.permitted_inputs))

    return CausalityReport(
        spacelike=_separated(measure_a, measure_b, speed),
        choice_spacelike=_separated(choose_a, measure_b, speed) and _separated(choose_b, measure_a, speed),
        ledger_clean=not violations,
        measurement_gap=abs(measure_a.time - measure_b.time),
        light_time=abs(measure_a.position - measure_b.position) / speed,
        violations=violations,
    )


class SettingSampler(ABC):
    """Per-trial setting choice at the stations.

    Each station draws an index into its own list of settings from its own
    choice stream; the samplers never look at the other station.
    """

    name: str = ""

    @abstractmethod
    def settings(self, station: Station) -> Tuple[UnitVector3, ...]:
        """The settings a station can choose from, by index."""

    @abstractmethod
    def choose_indices(self, station: Station, rng: Any, size: int) -> np.ndarray:
        ...

    def choose(self, station: Station, rng: Any, size: int) -> Tuple[np.ndarray, np.ndarray]:
        """Setting indices and the matching ``(size, 3)`` settings for a block."""
        options = self.settings(station)
        indices = self.choose_indices(station, rng, size)
        if len(options) == 1:
            return indices, tile_setting(options[0], size)
        table = np.stack([v.as_array() for v in options])
        return indices, table[indices]

    def combinations(self) -> List[Tuple[int, int]]:
        return [
            (i, j)
            for i in range(len(self.settings(Station.A)))
            for j in range(len(self.settings(Station.B)))
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "a": [list(v.as_tuple()) for v in self.settings(Station.A)],
            "b": [list(v.as_tuple()) for v in self.settings(Station.B)],
        }


class FixedSettings(SettingSampler):
    """The same pair of settings on every trial."""

    name = "fixed"

    def __init__(self, a: UnitVector3, b: UnitVector3) -> None:
        self.a = a
        self.b = b

    def settings(self, station: Station) -> Tuple[UnitVector3, ...]:
        return (self.a,) if station is Station.A else (self.b,)

    def choose_indices(self, station: Station, rng: Any, size: int) -> np.ndarray:
        return np.zeros(size, dtype=np.int64)


class RandomChshSettings(SettingSampler):
    """Each station picks one of its two CHSH settings per trial, uniformly."""

    name = "chsh"

    def __init__(self, chsh_settings: ChshSettings) -> None:
        self.chsh_settings = chsh_settings

    def settings(self, station: Station) -> Tuple[UnitVector3, ...]:
        if station is Station.A:
            return self.chsh_settings.station_a()
        return self.chsh_settings.station_b()

    def choose_indices(self, station: Station, rng: Any, size: int) -> np.ndarray:
        return np.asarray(rng.integers(2, size), dtype=np.int64)


@dataclass
class _BlockOutcome:
    batch: TrialBatch
    log: CausalLog
    indices_a: np.ndarray
    indices_b: np.ndarray


def _run_block(
    schedule: TrialSchedule,
    model: MeasurementModel,
    streams: TrialStreams,
    sampler: SettingSampler,
    size: int,
    first_trial: int = 0,
) -> _BlockOutcome:
    environment: Dict[str, Any] = {"rng_a": streams.a, "rng_b": streams.b}
    ledgers: Dict[Station, Set[str]] = {Station.A: set(), Station.B: set()}
    records: Dict[Station, StationRecord] = {}
    indices: Dict[Station, np.ndarray] = {}
    choice_streams = {Station.A: streams.choice_a, Station.B: streams.choice_b}
    log = CausalLog(trials=size, first_trial=first_trial)
    batch: Optional[TrialBatch] = None

    queue: List[Tuple[float, int, Actor, EventKind]] = [
        (schedule.emit, 0, Actor.SOURCE, EventKind.EMIT),
        (schedule.choose_a, 1, Actor.STATION_A, EventKind.CHOOSE_SETTING),
        (schedule.choose_b, 2, Actor.STATION_B, EventKind.CHOOSE_SETTING),
        (schedule.measure_a, 3, Actor.STATION_A, EventKind.MEASURE),
        (schedule.measure_b, 4, Actor.STATION_B, EventKind.MEASURE),
        (schedule.coincide, 5, Actor.COINCIDENCE, EventKind.COINCIDE),
    ]
    heapq.heapify(queue)
    while queue:
        time, _, actor, kind = heapq.heappop(queue)
        station = Station(actor.value) if actor in (Actor.STATION_A, Actor.STATION_B) else None
        if kind is EventKind.EMIT:
            environment["payload"] = model.emit(streams.payload, size)
            summary = f"{size} shared payloads"
        elif kind is EventKind.CHOOSE_SETTING:
            indices[station], environment[f"setting_{station.value.lower()}"] = sampler.choose(
                station, choice_streams[station], size
            )
            summary = f"{sampler.name} settings"
        elif kind is EventKind.MEASURE:
            suffix = station.value.lower()
            view = StationView(
                station,
                environment[f"setting_{suffix}"],
                environment["payload"],
                environment[f"rng_{suffix}"],
                ledger=ledgers[station],
                environment=environment,
            )
            records[station] = model.measure(view)
            summary = records[station].kind
        else:
            batch = model.coincide(records[Station.A], records[Station.B])
            summary = batch.codomain
        log.events.append(SpacetimeEvent(actor, kind, schedule.position(actor), time, summary))

    log.ledger = {station.value: frozenset(received) for station, received in ledgers.items()}
    return _BlockOutcome(batch, log, indices[Station.A], indices[Station.B])


def run_trial(
    schedule: TrialSchedule,
    model: MeasurementModel,
    rngs: TrialStreams,
    sampler: SettingSampler,
) -> Tuple[TrialValue, CausalLog]:
    """Run a single trial through the event queue.

    Raises:
        ScheduleError: If the schedule breaks the event-ordering rules.
    """
    schedule.validate()
    outcome = _run_block(schedule, model, rngs, sampler, 1)
    return outcome.batch.trial(0), outcome.log


@dataclass
class CausalitySummary:
    """Causality counts aggregated over every trial of a run."""

    schedule: TrialSchedule
    trials: int = 0
    spacelike_trials: int = 0
    choice_spacelike_trials: int = 0
    clean_trials: int = 0
    violations: Dict[str, Set[str]] = field(default_factory=dict)

    def add(self, report: CausalityReport, trials: int) -> None:
        self.trials += trials
        self.spacelike_trials += trials if report.spacelike else 0
        self.choice_spacelike_trials += trials if report.choice_spacelike else 0
        self.clean_trials += trials if report.ledger_clean else 0
        for station, names in report.violations.items():
            self.violations.setdefault(station, set()).update(names)

    @property
    def spacelike(self) -> bool:
        return self.spacelike_trials == self.trials

    @property
    def ledger_clean(self) -> bool:
        return self.clean_trials == self.trials

    @property
    def clean_fraction(self) -> float:
        return self.clean_trials / self.trials if self.trials else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schedule": self.schedule.to_dict(),
            "trials": self.trials,
            "spacelike": self.spacelike,
            "spacelike_trials": self.spacelike_trials,
            "choice_spacelike_trials": self.choice_spacelike_trials,
            "ledger_clean": self.ledger_clean,
            "ledger_clean_trials": self.clean_trials,
            "ledger_violations": {station: sorted(names) for station, names in sorted(self.violations.items())},
            "scope": SCOPE_NOTE,
        }


@dataclass
class LocalityResult:
    """What ``run_experiment`` produced.

    Attributes:
        estimates: One estimate per setting-index pair ``(i_a, i_b)`` that
            occurred in the run.
        causality: Aggregate causality counts.
        logs: Per-block causal logs in trial order.
        chsh: CHSH combination, when the sampler is a ``RandomChshSettings``.
    """

    estimates: Dict[Tuple[int, int], CorrelationEstimate]
    causality: CausalitySummary
    logs: List[CausalLog]
    chsh: Optional[ChshResult] = None

    @property
    def estimate(self) -> CorrelationEstimate:
        """The estimate of a single-setting run.

        Raises:
            ValueError: If the run used more than one setting pair.
        """
        if len(self.estimates) != 1:
            raise ValueError(f"Run covers {len(self.estimates)} setting pairs, not one")
        return next(iter(self.estimates.values()))

    def export_log(self) -> Dict[str, Any]:
        """The causal log export document."""
        return {
            "schema_version": LOG_SCHEMA_VERSION,
            "causality": self.causality.to_dict(),
            "blocks": [log.to_dict() for log in self.logs],
        }


def run_experiment(
    schedule: TrialSchedule,
    model: MeasurementModel,
    sampler: SettingSampler,
    n: int,
    seed: int,
    stream: int = 0,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    require_spacelike: bool = False,
) -> LocalityResult:
    """Run ``n`` trials through the harness and estimate the correlations.

    Args:
        schedule: Event schedule shared by every trial.
        model: The measurement model under test.
        sampler: Per-trial setting choice.
        n: Number of trials.
        seed: Master seed.
        stream: Sub-stream of the seed, as in ``estimate_correlation``.
        threads: Worker threads; does not affect the result.
        block_size: Trials per block and random sub-stream.
        require_spacelike: Refuse schedules whose measurements are not
            spacelike separated instead of flagging them.

    Raises:
        ScheduleError: If the schedule is rejected.
        EstimationError: If ``n`` is below 1.
    """
    schedule.validate(require_spacelike)
    if not schedule.spacelike:
        logger.warning(
            f"Measurements are not spacelike separated (|dt| = {schedule.measurement_gap}, "
            f"2L/c = {schedule.light_time}); results are flagged"
        )
    sizes = block_sizes(n, block_size)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
    pairs = sampler.combinations()

    def run_one(k: int, size: int) -> Tuple[Dict[Tuple[int, int], CorrelationEstimate], CausalLog, CausalityReport]:
        streams = TrialStreams.for_block(seed, stream, k)
        outcome = _run_block(schedule, model, streams, sampler, size, int(starts[k]))
        values = outcome.batch.products()
        imaginary = outcome.batch.imaginary()
        parts: Dict[Tuple[int, int], CorrelationEstimate] = {}
        for pair in pairs:
            a, b = sampler.settings(Station.A)[pair[0]], sampler.settings(Station.B)[pair[1]]
            if len(pairs) == 1:
                parts[pair] = CorrelationEstimate.from_values(model.name, a, b, values, imaginary)
                continue
            mask = (outcome.indices_a == pair[0]) & (outcome.indices_b == pair[1])
            if mask.any():
                parts[pair] = CorrelationEstimate.from_values(
                    model.name, a, b, values[mask], None if imaginary is None else imaginary[mask]
                )
        report = check_causality(outcome.log, schedule)
        logger.debug(f"Block {k} of {model.name}: {size} trials, ledger clean: {report.ledger_clean}")
        return parts, outcome.log, report

    blocks = map_blocks(run_one, sizes, threads)

    summary = CausalitySummary(schedule)
    logs: List[CausalLog] = []
    collected: Dict[Tuple[int, int], List[CorrelationEstimate]] = {}
    for (parts, log, report), size in zip(blocks, sizes):
        summary.add(report, size)
        logs.append(log)
        for pair, part in parts.items():
            collected.setdefault(pair, []).append(part)
    estimates = {pair: merge_estimates(collected[pair]) for pair in pairs if pair in collected}

    if not summary.ledger_clean:
        received = summary.to_dict()["ledger_violations"]
        logger.warning(f"Model {model.name} received inputs outside its permitted set: {received}")

    chsh_result: Optional[ChshResult] = None
    if isinstance(sampler, RandomChshSettings) and all(pair in estimates for pair, _ in TERMS):
        chsh_result = ChshResult(sampler.chsh_settings, tuple(estimates[pair] for pair, _ in TERMS))

    logger.info(
        f"Locality run of {model.name}: {summary.trials} trials, "
        f"spacelike: {summary.spacelike}, ledger clean: {summary.clean_trials}/{summary.trials}"
    )
    return LocalityResult(estimates=estimates, causality=summary, logs=logs, chsh=chsh_result)
