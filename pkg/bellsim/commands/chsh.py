from scrapy.settings import BaseSettings

from bellsim.cli import BellSimCommand


class Command(BellSimCommand):
    command_name = "chsh"
    default_settings = {"OUTPUT": "chsh.json"}
    angles_help = "four analyzer angles in degrees: a,a',b,b' (default: canonical for the kind)"

    def short_desc(self) -> str:
        return "Estimate the CHSH combination and write a result document"

    def angles_setting(self, settings: BaseSettings) -> str:
        return "CHSH_ANGLES"
