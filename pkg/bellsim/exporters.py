"""Writers for sweep CSV files, JSON result documents and SVG plots.

CSV rows go through ``scrapy.exporters.CsvItemExporter`` and JSON through
``ScrapyJSONEncoder``. Floats are written with the shortest representation
that round-trips, so reading a file back gives the exact doubles that were
computed. Nothing time-dependent is written, so identical inputs give
identical bytes.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

from itemadapter import ItemAdapter
from lxml import etree
from scrapy.exporters import CsvItemExporter
from scrapy.utils.serialize import ScrapyJSONEncoder

from bellsim.geometry import UnitVector3
from bellsim.items import ResultDocument, SweepRowItem
from bellsim.models.base import ParticleKind
from bellsim.models.quantum import qm_correlation

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SVG_NAMESPACE = "http://www.w3.org/2000/svg"


def write_sweep_csv(path: PathLike, rows: Iterable[SweepRowItem]) -> int:
    """Write sweep rows with the fixed header; return the number of rows."""
    count = 0
    with open(path, "wb") as stream:
        exporter = CsvItemExporter(
            stream,
            include_headers_line=True,
            fields_to_export=list(SweepRowItem.columns),
            encoding="utf-8",
            lineterminator="\n",
        )
        exporter.start_exporting()
        for row in rows:
            exporter.export_item(row)
            count += 1
        exporter.finish_exporting()
    logger.info(f"Wrote {count} sweep rows to {path}")
    return count


def result_document_json(document: ResultDocument) -> str:
    """Serialise a result document with its keys in schema order."""
    adapter = ItemAdapter(document)
    ordered = {name: adapter[name] for name in ResultDocument.field_order if name in adapter}
    return json.dumps(ordered, cls=ScrapyJSONEncoder, indent=2) + "\n"


def write_json(path: PathLike, payload: Union[ResultDocument, Dict[str, Any]]) -> None:
    """Write a result document (or any JSON-ready dict) with a trailing newline."""
    if isinstance(payload, ResultDocument):
        text = result_document_json(payload)
    else:
        text = json.dumps(payload, cls=ScrapyJSONEncoder, indent=2) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as stream:
        stream.write(text)
    logger.info(f"Wrote {path}")


def _svg_element(parent: etree._Element, tag: str, **attributes: str) -> etree._Element:
    return etree.SubElement(parent, f"{{{SVG_NAMESPACE}}}{tag}", **attributes)


class SweepPlot:
    """SVG figure of correlation against relative angle.

    Model estimates are drawn as markers with 2-sigma error bars over the
    quantum reference curve and, when given, the model's own closed form.

    Args:
        kind: Particle kind; photons use the doubled reference ``-cos(2 theta)``.
        width: Figure width in pixels.
        height: Figure height in pixels.
    """

    margin = 50.0
    x_max = 180.0

    def __init__(self, kind: ParticleKind, width: float = 640.0, height: float = 400.0) -> None:
        self.kind = kind
        self.width = width
        self.height = height
        self.root = etree.Element(
            f"{{{SVG_NAMESPACE}}}svg",
            nsmap={None: SVG_NAMESPACE},
            width=f"{width:g}",
            height=f"{height:g}",
            viewBox=f"0 0 {width:g} {height:g}",
        )
        _svg_element(self.root, "rect", width="100%", height="100%", fill="white")

    def x(self, theta_deg: float) -> float:
        return self.margin + (self.width - 2 * self.margin) * theta_deg / self.x_max

    def y(self, value: float) -> float:
        return self.height - self.margin - (self.height - 2 * self.margin) * (value + 1.0) / 2.0

    def _line(self, x1: float, y1: float, x2: float, y2: float, colour: str) -> None:
        _svg_element(
            self.root,
            "line",
            x1=f"{x1:.2f}",
            y1=f"{y1:.2f}",
            x2=f"{x2:.2f}",
            y2=f"{y2:.2f}",
            stroke=colour,
        )

    def _text(self, x: float, y: float, text: str) -> None:
        node = _svg_element(self.root, "text", x=f"{x:.2f}", y=f"{y:.2f}", fill="black")
        node.set("font-size", "12")
        node.text = text

    def axes(self) -> None:
        left, right = self.x(0.0), self.x(self.x_max)
        for value in (-1.0, 0.0, 1.0):
            self._line(left, self.y(value), right, self.y(value), "#999999" if value else "#333333")
            self._text(left - 30, self.y(value) + 4, f"{value:+g}")
        for tick in range(0, int(self.x_max) + 1, 45):
            self._text(self.x(tick) - 8, self.height - self.margin + 18, f"{tick}")
        self._text(self.width / 2 - 60, self.height - 8, "relative angle (deg)")

    def curve(self, values: Sequence[Tuple[float, float]], colour: str, label: str, index: int) -> None:
        points = " ".join(f"{self.x(t):.2f},{self.y(v):.2f}" for t, v in values)
        _svg_element(self.root, "polyline", points=points, fill="none", stroke=colour)
        self._legend(colour, label, index)

    def markers(self, rows: Sequence[SweepRowItem], colour: str, label: str, index: int) -> None:
        for row in rows:
            theta, mean = float(row["theta_deg"]), float(row["mean"])
            spread = 2.0 * float(row["stderr"])
            if spread > 0:
                self._line(self.x(theta), self.y(mean - spread), self.x(theta), self.y(mean + spread), colour)
            _svg_element(
                self.root, "circle", cx=f"{self.x(theta):.2f}", cy=f"{self.y(mean):.2f}", r="3", fill=colour
            )
        self._legend(colour, label, index)

    def _legend(self, colour: str, label: str, index: int) -> None:
        y = self.margin - 30 + 14 * index
        x = self.width - self.margin - 170
        _svg_element(self.root, "rect", x=f"{x:.2f}", y=f"{y - 8:.2f}", width="10", height="10", fill=colour)
        self._text(x + 16, y + 1, label)

    def tostring(self) -> bytes:
        return etree.tostring(self.root, pretty_print=True, xml_declaration=True, encoding="utf-8")


def reference_curve(kind: ParticleKind, samples: int = 181, x_max: float = 180.0) -> List[Tuple[float, float]]:
    """``(theta_deg, value)`` samples of the quantum correlation for ``kind``."""
    origin = UnitVector3.planar(0.0)
    curve = []
    for i in range(samples):
        theta_deg = x_max * i / (samples - 1)
        curve.append((theta_deg, qm_correlation(origin, UnitVector3.planar(math.radians(theta_deg)), kind)))
    return curve


def write_sweep_plot(
    path: PathLike,
    rows: Sequence[SweepRowItem],
    kind: ParticleKind,
    model_curve: Sequence[Tuple[float, float]] = (),
) -> None:
    """Write the sweep SVG.

    Args:
        path: Output file.
        rows: Sweep rows, already normalised.
        kind: Particle kind of the sweep.
        model_curve: Optional ``(theta_deg, value)`` samples of the model's
            closed-form correlation.
    """
    plot = SweepPlot(kind)
    plot.axes()
    reference_label = "-cos 2theta (quantum)" if kind is ParticleKind.PHOTON else "-cos theta (quantum)"
    plot.curve(reference_curve(kind), "#1f77b4", reference_label, 0)
    model = str(rows[0]["model"]) if rows else "model"
    if model_curve:
        plot.curve(model_curve, "#2ca02c", f"{model} closed form", 1)
    plot.markers(rows, "#d62728", f"{model} estimate", 2)
    with open(path, "wb") as stream:
        stream.write(plot.tostring())
    logger.info(f"Wrote plot {path}")
