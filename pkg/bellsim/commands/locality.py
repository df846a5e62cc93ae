import argparse

from scrapy.settings import BaseSettings

from bellsim.cli import BellSimCommand


class Command(BellSimCommand):
    command_name = "locality"
    default_settings = {"OUTPUT": "locality.json"}
    angles_help = "settings in degrees: a,b for fixed settings, a,a',b,b' for chsh"
    command_flags = {
        "schedule_L": "SCHEDULE_L",
        "schedule_times": "SCHEDULE_TIMES",
        "setting_choice": "LOCALITY_SETTINGS",
        "causal_log": "LOCALITY_LOG",
    }

    def short_desc(self) -> str:
        return "Run trials through the two-station event harness and report causality"

    def add_command_options(self, group: argparse._ArgumentGroup) -> None:
        group.add_argument("--schedule-L", dest="schedule_L", metavar="L", help="source-to-station distance (c = 1)")
        group.add_argument(
            "--schedule-times",
            dest="schedule_times",
            metavar="TIMES",
            help="choose,measure or choose_a,choose_b,measure_a,measure_b",
        )
        group.add_argument(
            "--setting-choice",
            dest="setting_choice",
            choices=["fixed", "chsh"],
            help="fixed settings or a random CHSH setting per trial at each station",
        )
        group.add_argument(
            "--require-spacelike",
            dest="require_spacelike",
            action="store_true",
            default=None,
            help="refuse schedules whose measurements are not spacelike separated",
        )
        group.add_argument("--causal-log", dest="causal_log", metavar="FILE", help="write the causal log as JSON")

    def flag_settings(self, opts: argparse.Namespace, settings: BaseSettings) -> dict:
        values = super().flag_settings(opts, settings)
        if opts.require_spacelike:
            values["LOCALITY_REQUIRE_SPACELIKE"] = True
        return values

    def angles_setting(self, settings: BaseSettings) -> str:
        if settings.get("LOCALITY_SETTINGS") == "chsh":
            return "CHSH_ANGLES"
        return "LOCALITY_ANGLES"
