"""Item definitions for the bellsim project.

This module defines the output records every command produces. Items pass
through the result pipelines (``RESULT_PIPELINES``) before they are written,
and every field is documented in the schema files under ``docs/schemas/``.

See documentation:
https://docs.scrapy.org/en/latest/topics/items.html
"""

from typing import Tuple

import scrapy

SCHEMA_VERSION = "1.0"


class SweepRowItem(scrapy.Item):
    """One row of a sweep CSV: the correlation at one relative angle.

    Fields:
        model: Name of the measurement model.
        kind: Particle kind, ``spin`` or ``photon``.
        theta_deg: Relative analyzer angle in degrees, as configured.
        mean: Estimated correlation (mean of the real per-trial values).
        stderr: Standard error of the mean; 0 for closed-form values.
        n: Number of trials; 0 for closed-form values.
        im_mean: Mean imaginary part, empty for real-valued models.
    """

    columns: Tuple[str, ...] = ("model", "kind", "theta_deg", "mean", "stderr", "n", "im_mean")
    essential_fields: Tuple[str, ...] = ("model", "kind", "theta_deg", "mean", "stderr", "n")

    model = scrapy.Field(serializer=str, doc="Name of the measurement model")
    kind = scrapy.Field(serializer=str, doc="Particle kind: spin or photon")

    # Geometry
    theta_deg = scrapy.Field(doc="Relative analyzer angle in degrees")

    # Statistics
    mean = scrapy.Field(doc="Mean of the real per-trial values")
    stderr = scrapy.Field(doc="Standard error of the mean")
    n = scrapy.Field(doc="Number of trials, 0 for closed-form values")
    im_mean = scrapy.Field(doc="Mean of the imaginary parts, empty for real-valued models")


class ResultDocument(scrapy.Item):
    """The JSON document written by the chsh, audit and locality commands.

    Fields:
        schema_version: Version of ``result_document.schema.json``.
        command: Command that produced the document.
        version: bellsim version.
        config: Echo of the run configuration.
        estimates: Correlation estimates, one per setting pair or grid point.
        chsh: CHSH block, when the command evaluates the combination.
        causality: Causality block of a locality run.
        audit: Audit report of the audit command.
        duration: Wall-clock seconds, only with ``RECORD_DURATION``.
    """

    # Output order of the JSON keys
    field_order: Tuple[str, ...] = (
        "schema_version",
        "command",
        "version",
        "config",
        "estimates",
        "chsh",
        "causality",
        "audit",
        "duration",
    )
    essential_fields: Tuple[str, ...] = ("schema_version", "command", "version", "config")

    # Provenance
    schema_version = scrapy.Field(serializer=str, doc="Version of the result document schema")
    command = scrapy.Field(serializer=str, doc="Command that produced the document")
    version = scrapy.Field(serializer=str, doc="bellsim version")
    config = scrapy.Field(doc="Echo of the run configuration")

    # Results
    estimates = scrapy.Field(doc="List of correlation estimates")
    chsh = scrapy.Field(doc="CHSH combination and its four correlations")
    causality = scrapy.Field(doc="Spacelike and ledger summary of a locality run")
    audit = scrapy.Field(doc="Audit report")

    duration = scrapy.Field(doc="Wall-clock seconds of the run")
