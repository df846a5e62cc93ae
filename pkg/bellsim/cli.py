"""Shared base of the bellsim Scrapy commands.

The command classes themselves live in ``bellsim.commands`` (one module per
command, found through the ``COMMANDS_MODULE`` setting). They only declare
their name, defaults and extra flags; flag handling and the hand-off to
``bellsim.runner.run_command`` happen here.
"""

import argparse
import logging
from typing import Any, Dict, List

from scrapy.commands import ScrapyCommand
from scrapy.settings import BaseSettings

from bellsim.exceptions import ConfigError
from bellsim.runner import EXIT_CONFIG_ERROR, apply_config_file, run_command

logger = logging.getLogger(__name__)

# Flag destination -> setting name, for flags every command accepts
COMMON_FLAGS: Dict[str, str] = {
    "model": "MODEL",
    "kind": "KIND",
    "n": "TRIALS",
    "seed": "SEED",
    "out": "OUTPUT",
    "threads": "THREADS",
    "block_size": "BLOCK_SIZE",
}


class BellSimCommand(ScrapyCommand):
    """Base class for the bellsim commands.

    Subclasses set ``command_name`` and ``default_settings`` (at least the
    default ``OUTPUT``), and may add flags through ``add_command_options``
    and map them through ``command_flags``.
    """

    requires_project = False
    command_name: str = ""
    angles_help: str = "angles in degrees"

    # Flag destination -> setting name, for this command's own flags
    command_flags: Dict[str, str] = {}

    def syntax(self) -> str:
        return "[options]"

    def add_options(self, parser: argparse.ArgumentParser) -> None:
        super().add_options(parser)
        group = parser.add_argument_group(title="Run Options")
        group.add_argument("--config", metavar="FILE", help="JSON document of settings; flags override it")
        group.add_argument("--model", metavar="NAME", help="measurement model: qm, lhv-sign or algebraic")
        group.add_argument("--kind", choices=["spin", "photon"], help="particle kind")
        group.add_argument("--n", metavar="TRIALS", help="trials per correlation estimate")
        group.add_argument("--seed", help="master seed")
        group.add_argument("--angles", metavar="DEGREES", help=self.angles_help)
        group.add_argument("--out", metavar="FILE", help="output file")
        group.add_argument("--threads", help="worker threads (does not change results)")
        group.add_argument("--block-size", dest="block_size", metavar="TRIALS", help="trials per random sub-stream block")
        group.add_argument(
            "--record-duration",
            dest="record_duration",
            action="store_true",
            default=None,
            help="write the wall-clock duration into the result document",
        )
        self.add_command_options(group)

    def add_command_options(self, group: argparse._ArgumentGroup) -> None:
        pass

    def angles_setting(self, settings: BaseSettings) -> str:
        """Setting that ``--angles`` fills for this command."""
        return "ANGLES"

    def flag_settings(self, opts: argparse.Namespace, settings: BaseSettings) -> Dict[str, Any]:
        values: Dict[str, Any] = {}
        for dest, name in {**COMMON_FLAGS, **self.command_flags}.items():
            value = getattr(opts, dest, None)
            if value is not None:
                values[name] = value
        if getattr(opts, "record_duration", None):
            values["RECORD_DURATION"] = True
        if opts.angles is not None:
            merged = settings.copy()
            merged.setdict(values, priority="cmdline")
            values[self.angles_setting(merged)] = opts.angles
        return values

    def run(self, args: List[str], opts: argparse.Namespace) -> None:
        settings = self.settings.copy()
        try:
            if opts.config:
                apply_config_file(settings, opts.config)
        except ConfigError as e:
            logger.error(f"{self.command_name} failed: {e}")
            self.exitcode = EXIT_CONFIG_ERROR
            return
        settings.setdict(self.flag_settings(opts, settings), priority="cmdline")
        self.exitcode = run_command(self.command_name, settings)
