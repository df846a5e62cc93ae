"""Run configuration and the command implementations behind the CLI.

Commands stay thin: they merge their flags into the settings and call
``run_command``, which builds a validated ``RunConfig``, runs the requested
experiment, passes the records through the result pipelines, writes the
output files and maps failures onto exit codes.
"""

import json
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from scrapy.settings import BaseSettings

import bellsim
from bellsim.chsh import ChshSettings
from bellsim.exceptions import (
    CausalityError,
    ConfigError,
    EstimationError,
    InvalidResult,
    ScheduleError,
)
from bellsim.experiments import AUDIT_MIN_TRIALS, SWEEP_METHODS, audit_model, chsh, sweep
from bellsim.exporters import write_json, write_sweep_csv, write_sweep_plot
from bellsim.items import SCHEMA_VERSION, ResultDocument, SweepRowItem
from bellsim.locality import FixedSettings, RandomChshSettings, TrialSchedule, run_experiment
from bellsim.modelloader import ModelLoader
from bellsim.models.base import MeasurementModel, ParticleKind, map_setting
from bellsim.pipelines import ResultPipelineManager

logger = logging.getLogger(__name__)

COMMANDS: Tuple[str, ...] = ("sweep", "chsh", "audit", "locality")
SETTING_CHOICES: Tuple[str, ...] = ("fixed", "chsh")

# Priority of a --config document: above project defaults, below flags
CONFIG_FILE_PRIORITY = 30

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_IO_ERROR = 2

MAX_SEED = 2 ** 64 - 1
MAX_GRID_POINTS = 100_000


def _parse_float(text: str, name: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"{name}: {text!r} is not finite")
    return value


def _get_bool(settings: BaseSettings, name: str) -> bool:
    try:
        return settings.getbool(name)
    except ValueError:
        raise ConfigError(f"{name}: {settings.get(name)!r} is not a boolean") from None


def parse_angle_list(text: Any, name: str = "ANGLES") -> Tuple[float, ...]:
    """Parse angles in degrees.

    Accepts a list, a comma separated string or ``"start:stop:step"`` with
    ``stop`` included when the steps land on it.

    Raises:
        ConfigError: For an empty, malformed or non-finite grid.
    """
    if isinstance(text, (list, tuple)):
        values = tuple(_parse_float(v, name) for v in text)
    else:
        text = str(text).strip()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ConfigError(f"{name}: expected start:stop:step, got {text!r}")
            start, stop, step = (_parse_float(p, name) for p in parts)
            if step <= 0 or stop < start:
                raise ConfigError(f"{name}: need step > 0 and stop >= start, got {text!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            if count > MAX_GRID_POINTS:
                raise ConfigError(f"{name}: {count} grid points exceed the limit of {MAX_GRID_POINTS}")
            values = tuple(start + i * step for i in range(count))
        else:
            values = tuple(_parse_float(p, name) for p in text.split(",") if p.strip())
    if not values:
        raise ConfigError(f"{name}: no angles given")
    return values


def _get_int(settings: BaseSettings, name: str, minimum: int, maximum: Optional[int] = None) -> int:
    raw = settings.get(name)
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: {raw!r} is not an integer") from None
    if isinstance(raw, float) and raw != value:
        raise ConfigError(f"{name}: {raw!r} is not an integer")
    if value < minimum or (maximum is not None and value > maximum):
        bound = f"between {minimum} and {maximum}" if maximum is not None else f"at least {minimum}"
        raise ConfigError(f"{name} must be {bound}, got {value}")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one command run.

    ``to_dict`` holds everything a result depends on; output paths and the
    thread count are left out so files written from the same configuration
    are identical wherever and however they were produced.
    """

    command: str
    model: str
    kind: ParticleKind
    trials: int
    seed: int
    angles_deg: Tuple[float, ...]
    sweep_method: str
    chsh_angles_deg: Tuple[float, float, float, float]
    locality_angles_deg: Tuple[float, float]
    setting_choice: str
    schedule: TrialSchedule
    require_spacelike: bool
    block_size: int
    threads: int = 1
    output: str = ""
    plot: str = ""
    causal_log: str = ""
    record_duration: bool = False

    @classmethod
    def from_settings(cls, settings: BaseSettings, command: str) -> "RunConfig":
        """Build and validate the configuration of ``command``.

        Raises:
            ConfigError: For any missing, malformed or out-of-range value.
        """
        if command not in COMMANDS:
            raise ConfigError(f"Unknown command {command!r}")

        loader = ModelLoader.from_settings(settings)
        model = str(settings.get("MODEL", "")).strip()
        if model not in loader.list():
            raise ConfigError(f"Unknown model {model!r}; available: {', '.join(loader.list())}")

        try:
            kind = ParticleKind.parse(settings.get("KIND"))
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if command == "audit" and kind is not ParticleKind.SPIN_HALF:
            raise ConfigError(f"audit runs spin settings only, got KIND {kind.value!r}")

        minimum_trials = AUDIT_MIN_TRIALS if command == "audit" else 1
        trials = _get_int(settings, "TRIALS", minimum_trials)
        seed = _get_int(settings, "SEED", 0, MAX_SEED)
        threads = _get_int(settings, "THREADS", 1)
        block_size = _get_int(settings, "BLOCK_SIZE", 1)

        method = str(settings.get("SWEEP_METHOD", "monte-carlo"))
        if method not in SWEEP_METHODS:
            raise ConfigError(f"SWEEP_METHOD must be one of {', '.join(SWEEP_METHODS)}, got {method!r}")

        chsh_raw = settings.get("CHSH_ANGLES")
        if chsh_raw:
            chsh_angles = parse_angle_list(chsh_raw, "CHSH_ANGLES")
            if len(chsh_angles) != 4:
                raise ConfigError(f"CHSH_ANGLES needs four angles (a, a', b, b'), got {len(chsh_angles)}")
        else:
            chsh_angles = ChshSettings.canonical_angles(kind)

        locality_angles = parse_angle_list(settings.get("LOCALITY_ANGLES"), "LOCALITY_ANGLES")
        if len(locality_angles) != 2:
            raise ConfigError(f"LOCALITY_ANGLES needs two angles (a, b), got {len(locality_angles)}")

        choice = str(settings.get("LOCALITY_SETTINGS", "fixed"))
        if choice not in SETTING_CHOICES:
            raise ConfigError(f"LOCALITY_SETTINGS must be one of {', '.join(SETTING_CHOICES)}, got {choice!r}")

        separation = _parse_float(settings.get("SCHEDULE_L"), "SCHEDULE_L")
        times = parse_angle_list(settings.get("SCHEDULE_TIMES"), "SCHEDULE_TIMES")
        schedule = TrialSchedule.from_times(separation, times)

        return cls(
            command=command,
            model=model,
            kind=kind,
            trials=trials,
            seed=seed,
            angles_deg=parse_angle_list(settings.get("ANGLES"), "ANGLES"),
            sweep_method=method,
            chsh_angles_deg=tuple(chsh_angles),
            locality_angles_deg=tuple(locality_angles),
            setting_choice=choice,
            schedule=schedule,
            require_spacelike=_get_bool(settings, "LOCALITY_REQUIRE_SPACELIKE"),
            block_size=block_size,
            threads=threads,
            output=str(settings.get("OUTPUT") or ""),
            plot=str(settings.get("PLOT") or ""),
            causal_log=str(settings.get("LOCALITY_LOG") or ""),
            record_duration=_get_bool(settings, "RECORD_DURATION"),
        )

    def to_dict(self) -> Dict[str, Any]:
        config: Dict[str, Any] = {
            "command": self.command,
            "model": self.model,
            "kind": self.kind.value,
            "trials": self.trials,
            "seed": self.seed,
            "block_size": self.block_size,
        }
        if self.command == "sweep":
            config.update(angles_deg=list(self.angles_deg), method=self.sweep_method)
        elif self.command == "chsh":
            config.update(chsh_angles_deg=list(self.chsh_angles_deg))
        elif self.command == "locality":
            config.update(
                setting_choice=self.setting_choice,
                schedule=self.schedule.to_dict(),
                require_spacelike=self.require_spacelike,
            )
            if self.setting_choice == "fixed":
                config.update(locality_angles_deg=list(self.locality_angles_deg))
            else:
                config.update(chsh_angles_deg=list(self.chsh_angles_deg))
        return config


def _document(config: RunConfig, started: float, **fields: Any) -> ResultDocument:
    document = ResultDocument(
        schema_version=SCHEMA_VERSION,
        command=config.command,
        version=bellsim.__version__,
        config=config.to_dict(),
    )
    for name in ResultDocument.field_order:
        if fields.get(name) is not None:
            document[name] = fields[name]
    if config.record_duration:
        document["duration"] = time.perf_counter() - started
    return document


def run_sweep(config: RunConfig, model: MeasurementModel, pipelines: ResultPipelineManager) -> List[SweepRowItem]:
    points = sweep(
        model,
        [math.radians(angle) for angle in config.angles_deg],
        config.trials,
        config.seed,
        kind=config.kind,
        method=config.sweep_method,
        threads=config.threads,
        block_size=config.block_size,
    )
    rows = []
    for angle, point in zip(config.angles_deg, points):
        row = SweepRowItem(
            model=model.name,
            kind=config.kind.value,
            theta_deg=angle,
            mean=point.estimate.mean,
            stderr=point.estimate.stderr,
            n=point.estimate.n,
            im_mean=point.estimate.im_mean,
        )
        rows.append(pipelines.process(row, config.command))
    write_sweep_csv(config.output, rows)
    if config.plot:
        origin = map_setting(config.kind, 0.0)
        curve = [
            (float(theta), model.expected_correlation(origin, map_setting(config.kind, math.radians(theta))))
            for theta in range(0, 181)
        ]
        write_sweep_plot(config.plot, rows, config.kind, curve)
    return rows


def run_chsh(config: RunConfig, model: MeasurementModel, pipelines: ResultPipelineManager) -> ResultDocument:
    started = time.perf_counter()
    settings = ChshSettings.from_angles(config.chsh_angles_deg, config.kind)
    result = chsh(model, settings, config.trials, config.seed, config.threads, config.block_size)
    chsh_block = result.to_dict()
    document = _document(
        config,
        started,
        estimates=chsh_block.pop("correlations"),
        chsh=chsh_block,
    )
    document = pipelines.process(document, config.command)
    write_json(config.output, document)
    return document


def run_audit(config: RunConfig, model: MeasurementModel, pipelines: ResultPipelineManager) -> ResultDocument:
    started = time.perf_counter()
    report = audit_model(model, config.trials, config.seed, config.threads, config.block_size)
    document = _document(config, started, audit=report.to_dict())
    document = pipelines.process(document, config.command)
    write_json(config.output, document)
    for line in report.table():
        print(line)
    return document


def run_locality(config: RunConfig, model: MeasurementModel, pipelines: ResultPipelineManager) -> ResultDocument:
    started = time.perf_counter()
    if config.setting_choice == "chsh":
        sampler = RandomChshSettings(ChshSettings.from_angles(config.chsh_angles_deg, config.kind))
    else:
        a_deg, b_deg = config.locality_angles_deg
        sampler = FixedSettings(
            map_setting(config.kind, math.radians(a_deg)), map_setting(config.kind, math.radians(b_deg))
        )
    result = run_experiment(
        config.schedule,
        model,
        sampler,
        config.trials,
        config.seed,
        threads=config.threads,
        block_size=config.block_size,
        require_spacelike=config.require_spacelike,
    )
    estimates = [
        dict(setting_index=list(pair), **estimate.to_dict()) for pair, estimate in sorted(result.estimates.items())
    ]
    document = _document(
        config,
        started,
        estimates=estimates,
        chsh=result.chsh.to_dict() if result.chsh is not None else None,
        causality=result.causality.to_dict(),
    )
    document = pipelines.process(document, config.command)
    write_json(config.output, document)
    if config.causal_log:
        write_json(config.causal_log, result.export_log())
    return document


RUNNERS: Dict[str, Callable[[RunConfig, MeasurementModel, ResultPipelineManager], Any]] = {
    "sweep": run_sweep,
    "chsh": run_chsh,
    "audit": run_audit,
    "locality": run_locality,
}


def apply_config_file(settings: BaseSettings, path: str) -> None:
    """Load a JSON config document into ``settings`` at ``CONFIG_FILE_PRIORITY``.

    Keys are setting names; lower-case keys are accepted.

    Raises:
        ConfigError: If the file cannot be read or is not a JSON object.
    """
    try:
        with open(path, encoding="utf-8") as stream:
            values = json.load(stream)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e.strerror or e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}") from None
    if not isinstance(values, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    for name, value in values.items():
        settings.set(str(name).upper(), value, priority=CONFIG_FILE_PRIORITY)
    logger.debug(f"Loaded {len(values)} settings from {path}")


def run_command(command: str, settings: BaseSettings) -> int:
    """Run ``command`` with ``settings``; return the process exit code."""
    started = time.perf_counter()
    try:
        config = RunConfig.from_settings(settings, command)
        if not config.output:
            raise ConfigError("No output path given")
        model = ModelLoader.from_settings(settings).load(config.model)()
        pipelines = ResultPipelineManager.from_settings(settings)
        logger.info(
            f"Running {command} for model {config.model} ({config.kind.value}), "
            f"{config.trials} trials, seed {config.seed}, {config.threads} threads"
        )
        RUNNERS[command](config, model, pipelines)
    except ScheduleError as e:
        for diagnosis in e.diagnoses:
            logger.error(f"Invalid schedule: {diagnosis}")
        return EXIT_CONFIG_ERROR
    except (ConfigError, EstimationError, InvalidResult, CausalityError) as e:
        logger.error(f"{command} failed: {e}")
        return EXIT_CONFIG_ERROR
    except OSError as e:
        target = e.filename if e.filename is not None else Path(str(settings.get("OUTPUT") or ""))
        logger.error(f"Cannot write {target}: {e.strerror or e}")
        return EXIT_IO_ERROR
    logger.info(f"{command} finished in {time.perf_counter() - started:.2f} s")
    return EXIT_OK
