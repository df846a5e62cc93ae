from bellsim.cli import BellSimCommand


class Command(BellSimCommand):
    command_name = "audit"
    default_settings = {"OUTPUT": "audit.json"}
    angles_help = "unused by the audit, which runs at fixed canonical settings"

    def short_desc(self) -> str:
        return "Check a model's verifiable properties and print a summary table"
