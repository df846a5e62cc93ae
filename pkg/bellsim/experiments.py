"""Correlation estimates, angle sweeps, CHSH runs and the model auditor.

Every Monte Carlo estimate is cut into blocks of ``block_size`` trials. Block
``k`` of sub-stream ``s`` draws from ``TrialStreams.for_block(seed, s, k)``,
so results depend on ``(seed, s, n, block_size)`` only and never on the
number of threads.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from bellsim.chsh import TERMS, ChshResult, ChshSettings
from bellsim.exceptions import EstimationError
from bellsim.geometry import UnitVector3
from bellsim.locality import SCOPE_NOTE, RandomChshSettings, TrialSchedule, run_experiment
from bellsim.models.base import MeasurementModel, ParticleKind, TrialStreams, map_setting, tile_setting
from bellsim.models.quantum import qm_correlation
from bellsim.statistics import (
    DEFAULT_BLOCK_SIZE,
    CorrelationEstimate,
    block_sizes,
    map_blocks,
    merge_estimates,
)

logger = logging.getLogger(__name__)

MONTE_CARLO = "monte-carlo"
ANALYTIC = "analytic"
SWEEP_METHODS: Tuple[str, ...] = (MONTE_CARLO, ANALYTIC)

AUDIT_MIN_TRIALS: int = 10_000

# Sub-streams reserved for the auditor's checks
AUDIT_MATCHED_STREAM: int = 1000
AUDIT_MARGINAL_STREAM: int = 2000
AUDIT_CHSH_STREAM: int = 3000
AUDIT_LOCALITY_STREAM: int = 4000


def estimate_correlation(
    model: MeasurementModel,
    a: UnitVector3,
    b: UnitVector3,
    n: int,
    seed: int,
    stream: int = 0,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> CorrelationEstimate:
    """Monte Carlo estimate of ``P(a, b)`` over ``n`` trials.

    The per-trial value is the product of the outcomes for pair-outcome
    models and ``Re z`` for complex-valued models, whose ``Im z`` is tracked
    alongside.

    Raises:
        EstimationError: If ``n`` is below 1.
    """
    sizes = block_sizes(n, block_size)

    def run_one(k: int, size: int) -> CorrelationEstimate:
        streams = TrialStreams.for_block(seed, stream, k)
        batch = model.run_block(tile_setting(a, size), tile_setting(b, size), streams)
        return CorrelationEstimate.from_values(model.name, a, b, batch.products(), batch.imaginary())

    estimate = merge_estimates(map_blocks(run_one, sizes, threads))
    logger.debug(
        f"{model.name} P(a, b) over {n} trials in {len(sizes)} blocks: "
        f"{estimate.mean} +/- {estimate.stderr}"
    )
    return estimate


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of an angle sweep.

    Attributes:
        theta: Relative analyzer angle in radians.
        kind: Particle kind; photon angles are doubled in the settings.
        estimate: Correlation at settings ``(0, theta)``.
        reference: Quantum reference ``-cos(theta)`` or ``-cos(2 theta)``.
        expected: The model's own closed-form correlation.
    """

    theta: float
    kind: ParticleKind
    estimate: CorrelationEstimate
    reference: float
    expected: float

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)


def sweep(
    model: MeasurementModel,
    angle_grid: Sequence[float],
    n_per_point: int,
    seed: int,
    kind: Union[ParticleKind, str] = ParticleKind.SPIN_HALF,
    method: str = MONTE_CARLO,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> List[SweepPoint]:
    """Estimate the correlation over a grid of relative analyzer angles.

    Station A sits at angle 0 and station B at each grid angle, both in the
    x-y plane. Grid point ``i`` uses sub-stream ``i``.

    Args:
        model: The measurement model.
        angle_grid: Relative analyzer angles in radians.
        n_per_point: Trials per grid point (ignored by the analytic method).
        seed: Master seed.
        kind: Spin-1/2 or photon.
        method: ``"monte-carlo"`` or ``"analytic"`` (closed-form values).
        threads: Worker threads.
        block_size: Trials per random sub-stream block.

    Raises:
        EstimationError: For an empty grid, an unknown method or ``n_per_point < 1``.
    """
    if len(angle_grid) == 0:
        raise EstimationError("Sweep grid is empty")
    if method not in SWEEP_METHODS:
        raise EstimationError(f"Unknown sweep method {method!r}; expected one of {', '.join(SWEEP_METHODS)}")
    kind = ParticleKind.parse(kind)
    a = map_setting(kind, 0.0)
    origin = UnitVector3.planar(0.0)

    points: List[SweepPoint] = []
    for index, theta in enumerate(angle_grid):
        b = map_setting(kind, float(theta))
        expected = model.expected_correlation(a, b)
        if method == ANALYTIC:
            estimate = CorrelationEstimate.exact(model.name, a, b, expected)
        else:
            estimate = estimate_correlation(model, a, b, n_per_point, seed, index, threads, block_size)
        reference = qm_correlation(origin, UnitVector3.planar(float(theta)), kind)
        points.append(SweepPoint(float(theta), kind, estimate, reference, expected))
        logger.info(
            f"Sweep {model.name} ({kind.value}) at {math.degrees(theta):g} deg: "
            f"{estimate.mean:.6f} +/- {estimate.stderr:.6f}"
        )
    return points


def chsh(
    model: MeasurementModel,
    settings: ChshSettings,
    n: int,
    seed: int,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    first_stream: int = 0,
) -> ChshResult:
    """Estimate the four CHSH correlations, each on its own sub-stream.

    Raises:
        EstimationError: If ``n`` is below 1.
    """
    estimates = []
    for offset, ((index_a, index_b), _) in enumerate(TERMS):
        a, b = settings.pair(index_a, index_b)
        estimates.append(estimate_correlation(model, a, b, n, seed, first_stream + offset, threads, block_size))
    result = ChshResult(settings, tuple(estimates))
    logger.info(f"CHSH of {model.name}: S = {result.s_value:.6f} +/- {result.s_stderr:.6f}")
    return result


@dataclass
class AuditReport:
    """Verifiable properties of one model, each taken from executed trials.

    Attributes:
        model: Model name.
        description: Model description.
        codomain: Per-trial value type the model's batches report.
        station_record: Kind of record the stations write down.
        matched_setting_exact: Every matched-setting trial gave exactly -1.
        matched_setting_trials: Trials run for the matched-setting check.
        matched_setting_failures: Matched-setting trials that deviated.
        marginal_a: Mean local value at station A.
        marginal_a_stderr: Its standard error.
        marginal_b: Mean local value at station B.
        marginal_b_stderr: Its standard error.
        marginals_balanced: Both marginals within four standard errors of 0.
        chsh: CHSH result at the canonical spin settings.
        im_mean: Mean imaginary part per CHSH term, None for real models.
        locality_clean: Every harness trial had a clean ledger.
        locality_spacelike: Every harness trial was spacelike separated.
        locality_trials: Trials run through the harness.
        ledger_violations: Inputs received outside the permitted set.
        scope: What the locality check certifies.
        duration: Wall-clock seconds, kept out of the written report by default.
    """

    model: str
    description: str
    codomain: str
    station_record: str
    matched_setting_exact: bool
    matched_setting_trials: int
    matched_setting_failures: int
    marginal_a: float
    marginal_a_stderr: float
    marginal_b: float
    marginal_b_stderr: float
    marginals_balanced: bool
    chsh: ChshResult
    im_mean: Optional[List[float]]
    locality_clean: bool
    locality_spacelike: bool
    locality_trials: int
    ledger_violations: Dict[str, List[str]] = field(default_factory=dict)
    scope: str = SCOPE_NOTE
    duration: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "description": self.description,
            "codomain": self.codomain,
            "station_record": self.station_record,
            "matched_setting": {
                "exact": self.matched_setting_exact,
                "trials": self.matched_setting_trials,
                "failures": self.matched_setting_failures,
            },
            "marginals": {
                "a": self.marginal_a,
                "a_stderr": self.marginal_a_stderr,
                "b": self.marginal_b,
                "b_stderr": self.marginal_b_stderr,
                "balanced": self.marginals_balanced,
            },
            "chsh": self.chsh.to_dict(),
            "im_mean": self.im_mean,
            "locality": {
                "ledger_clean": self.locality_clean,
                "spacelike": self.locality_spacelike,
                "trials": self.locality_trials,
                "ledger_violations": self.ledger_violations,
                "scope": self.scope,
            },
        }

    def table(self) -> List[str]:
        """Human-readable summary lines."""
        rows = [
            ("model", self.model),
            ("codomain", self.codomain),
            ("station record", self.station_record),
            (
                "matched settings",
                "exact" if self.matched_setting_exact else f"{self.matched_setting_failures} deviating trials",
            ),
            (
                "marginals",
                f"A {self.marginal_a:+.4f} +/- {self.marginal_a_stderr:.4f}, "
                f"B {self.marginal_b:+.4f} +/- {self.marginal_b_stderr:.4f} "
                f"({'balanced' if self.marginals_balanced else 'unbalanced'})",
            ),
            ("CHSH S", f"{self.chsh.s_value:+.4f} +/- {self.chsh.s_stderr:.4f}"),
            ("|S| > 2", "yes" if self.chsh.violates_local_bound else "no"),
            ("mean Im z", "n/a" if self.im_mean is None else ", ".join(f"{v:+.4f}" for v in self.im_mean)),
            ("locality ledger", "clean" if self.locality_clean else "violated"),
            ("spacelike", "yes" if self.locality_spacelike else "no"),
        ]
        width = max(len(label) for label, _ in rows)
        lines = [f"{label.ljust(width)}  {value}" for label, value in rows]
        lines.append(f"note: {self.scope}")
        return lines


def _matched_directions() -> List[UnitVector3]:
    return [
        map_setting(ParticleKind.SPIN_HALF, 0.0),
        map_setting(ParticleKind.SPIN_HALF, math.pi / 4),
        UnitVector3.normalized(1.0, 2.0, 3.0),
    ]


def audit_model(
    model: MeasurementModel,
    n: int,
    seed: int,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    schedule: Optional[TrialSchedule] = None,
) -> AuditReport:
    """Run every audit check on ``model``.

    Runs matched-setting trials along several directions, collects the
    station marginals, evaluates CHSH at the canonical spin settings and
    sends canonical CHSH trials through the locality harness.

    Raises:
        EstimationError: If ``n`` is below ``AUDIT_MIN_TRIALS``.
    """
    if n < AUDIT_MIN_TRIALS:
        raise EstimationError(f"Audit needs at least {AUDIT_MIN_TRIALS} trials, got {n}")
    started = time.perf_counter()
    sizes = block_sizes(n, block_size)
    codomains: Set[str] = set()
    record_kinds: Set[str] = set()

    def matched_block(direction: UnitVector3, stream: int):
        def run_one(k: int, size: int) -> Tuple[int, str, str]:
            streams = TrialStreams.for_block(seed, stream, k)
            setting = tile_setting(direction, size)
            batch, record_a, record_b = model.run_block_with_records(setting, setting, streams)
            deviating = batch.products() != -1.0
            imaginary = batch.imaginary()
            if imaginary is not None:
                deviating |= imaginary != 0.0
            return int(np.count_nonzero(deviating)), batch.codomain, f"{record_a.kind}|{record_b.kind}"

        return run_one

    failures = 0
    matched_trials = 0
    for offset, direction in enumerate(_matched_directions()):
        for deviating, codomain, kinds in map_blocks(
            matched_block(direction, AUDIT_MATCHED_STREAM + offset), sizes, threads
        ):
            failures += deviating
            codomains.add(codomain)
            record_kinds.update(kinds.split("|"))
        matched_trials += n

    settings = ChshSettings.canonical(ParticleKind.SPIN_HALF)

    def marginal_block(k: int, size: int) -> Tuple[CorrelationEstimate, CorrelationEstimate]:
        streams = TrialStreams.for_block(seed, AUDIT_MARGINAL_STREAM, k)
        batch = model.run_block(tile_setting(settings.a, size), tile_setting(settings.b, size), streams)
        marginals = batch.marginals()
        return (
            CorrelationEstimate.from_values(model.name, settings.a, settings.b, marginals[:, 0]),
            CorrelationEstimate.from_values(model.name, settings.a, settings.b, marginals[:, 1]),
        )

    parts = map_blocks(marginal_block, sizes, threads)
    marginal_a = merge_estimates([part[0] for part in parts])
    marginal_b = merge_estimates([part[1] for part in parts])
    balanced = all(
        abs(m.mean) <= 4.0 * m.stderr + 1e-12 for m in (marginal_a, marginal_b)
    )

    chsh_result = chsh(model, settings, n, seed, threads, block_size, first_stream=AUDIT_CHSH_STREAM)
    im_mean = None
    if all(e.im_mean is not None for e in chsh_result.estimates):
        im_mean = [e.im_mean for e in chsh_result.estimates]

    locality = run_experiment(
        schedule or TrialSchedule(),
        model,
        RandomChshSettings(settings),
        n,
        seed,
        stream=AUDIT_LOCALITY_STREAM,
        threads=threads,
        block_size=block_size,
    )
    summary = locality.causality

    report = AuditReport(
        model=model.name,
        description=model.description,
        codomain=" / ".join(sorted(codomains)),
        station_record=" / ".join(sorted(record_kinds)),
        matched_setting_exact=failures == 0,
        matched_setting_trials=matched_trials,
        matched_setting_failures=failures,
        marginal_a=marginal_a.mean,
        marginal_a_stderr=marginal_a.stderr,
        marginal_b=marginal_b.mean,
        marginal_b_stderr=marginal_b.stderr,
        marginals_balanced=balanced,
        chsh=chsh_result,
        im_mean=im_mean,
        locality_clean=summary.ledger_clean,
        locality_spacelike=summary.spacelike,
        locality_trials=summary.trials,
        ledger_violations={station: sorted(names) for station, names in sorted(summary.violations.items())},
        duration=time.perf_counter() - started,
    )
    logger.info(
        f"Audit of {model.name}: codomain {report.codomain}, matched settings "
        f"{'exact' if report.matched_setting_exact else 'inexact'}, S = {chsh_result.s_value:.4f}, "
        f"ledger {'clean' if report.locality_clean else 'violated'}"
    )
    return report
