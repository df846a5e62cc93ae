"""Run bellsim commands without a scrapy.cfg in the working directory."""

import os
import sys

from scrapy.cmdline import execute


def main() -> None:
    """Point Scrapy at the bellsim settings module and dispatch the command."""
    os.environ.setdefault("SCRAPY_SETTINGS_MODULE", "bellsim.settings")
    execute(sys.argv)


if __name__ == "__main__":
    main()
