import argparse

from bellsim.cli import BellSimCommand


class Command(BellSimCommand):
    command_name = "sweep"
    default_settings = {"OUTPUT": "sweep.csv"}
    angles_help = "relative analyzer angles in degrees, start:stop:step or a comma separated list"
    command_flags = {"plot": "PLOT", "method": "SWEEP_METHOD"}

    def short_desc(self) -> str:
        return "Estimate the correlation over a grid of relative angles and write a CSV"

    def add_command_options(self, group: argparse._ArgumentGroup) -> None:
        group.add_argument("--plot", metavar="FILE", help="also write an SVG plot")
        group.add_argument(
            "--method", choices=["monte-carlo", "analytic"], help="Monte Carlo estimates or closed-form values"
        )
