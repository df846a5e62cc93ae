"""bellsim commands, one module per command.

Scrapy names each command after its module, so ``sweep.py`` provides
``scrapy sweep`` (or ``python -m bellsim sweep``).
"""
