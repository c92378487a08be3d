"""Rule-based recovery of data and encodings from classified chart elements.

Legend symbols are paired with labels by top-left corner distance, marks are
matched to legend entries by color, and values come from arc lengths (pie),
nearby value labels, or a least-squares fit through the y-axis labels.
"""

from __future__ import annotations

import json
import logging
import math
import re
import xml.etree.ElementTree as ET
from typing import Optional
from xml.sax.saxutils import escape

from .errors import IdCollision, InsufficientAxis, MalformedAcData, MalformedXml, UnparsableLabel
from .model import (
    DEFAULT_TAXONOMY,
    MARK_SUBS,
    NONE_FIELD,
    DataTable,
    LabeledChart,
    Row,
    Taxonomy,
)
from .svg import ArcTo, SvgElement, element_bbox, parse_svg, segment_length

log = logging.getLogger(__name__)

COLOR_TOL = 1 / 255 + 1e-9
VALUE_DECIMALS = 4

_NUM_RE = re.compile(r"^([+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|[+-]?\.\d+)\s*([kKmMbB%]?)$")
_SUFFIX = {"": 1.0, "%": 1.0, "k": 1e3, "K": 1e3, "m": 1e6, "M": 1e6, "b": 1e9, "B": 1e9}


def parse_number(text: str) -> float:
    """Parse an axis or value label: ``1,200``, ``35%``, ``2.5k``, ``1M``."""
    t = text.strip().replace("−", "-")
    if t.startswith("$"):
        t = t[1:]
    m = _NUM_RE.match(t)
    if not m:
        raise UnparsableLabel(text)
    return float(m.group(1).replace(",", "")) * _SUFFIX[m.group(2)]


def _same_color(a, b) -> bool:
    if a is None or b is None:
        return False
    return all(abs(x - y) <= COLOR_TOL for x, y in zip(a, b))


def _primary_color(e: SvgElement):
    return e.fill if e.fill is not None else e.stroke


def pair_legend(chart: LabeledChart) -> dict[int, int]:
    """Legend symbol element -> nearest legend label element (top-left corners)."""
    labels = chart.elements_of("legend-label")
    pairs = {}
    if not labels:
        return pairs
    boxes = {lab.index: element_bbox(lab) for lab in labels}
    for sym in chart.elements_of("legend-symbol"):
        sb = element_bbox(sym)
        best = min(labels, key=lambda lab: (math.hypot(boxes[lab.index].x - sb.x,
                                                       boxes[lab.index].y - sb.y), lab.index))
        pairs[sym.index] = best.index
    return pairs


def match_legend(chart: LabeledChart) -> dict[int, str]:
    """Mark element index -> legend entry text.  Unmatched marks are absent."""
    pairs = pair_legend(chart)
    if not pairs:
        return {}
    symbols = sorted((e for e in chart.elements_of("legend-symbol") if e.index in pairs),
                     key=lambda e: e.index)
    text_of = {e.index: e.text for e in chart.elements_of("legend-label")}
    out = {}
    for mark in chart.elements_of(*MARK_SUBS):
        chosen = None
        for pick in (lambda e: e.fill, lambda e: e.stroke, _primary_color):
            hits = [s for s in symbols if _same_color(pick(mark), pick(s))]
            if hits:
                chosen = hits[0]
                break
        if chosen is None:
            hits = [s for s in symbols if _same_color(_primary_color(mark), _primary_color(s))]
            chosen = hits[0] if hits else None
        if chosen is not None:
            out[mark.index] = text_of[pairs[chosen.index]]
    return out


def _outer_arc_length(e: SvgElement) -> float:
    arcs = [segment_length(s) for s in e.geometry.segments if isinstance(s, ArcTo)]
    return max(arcs) if arcs else 0.0


def _field_names(chart: LabeledChart, has_legend: bool):
    x_name = chart.first_text("x-title")
    y_name = chart.first_text("y-title")
    legend_name = chart.first_text("legend-title") if has_legend else None
    return x_name, y_name, legend_name


def _fit_axis(chart: LabeledChart):
    """Least-squares map from vertical pixel position to data value."""
    pts, bad = [], []
    for lab in chart.elements_of("y-label"):
        try:
            v = parse_number(lab.text)
        except UnparsableLabel:
            bad.append(lab.text)
            continue
        pts.append((element_bbox(lab).center[1], v))
    if len({p[0] for p in pts}) < 2:
        if bad:
            raise UnparsableLabel(bad[0])
        raise InsufficientAxis("need at least two numeric y-labels")
    if bad:
        log.warning("ignoring non-numeric y-labels: %s", bad)
    n = len(pts)
    mx = sum(p[0] for p in pts) / n
    my = sum(p[1] for p in pts) / n
    sxx = sum((p[0] - mx) ** 2 for p in pts)
    sxy = sum((p[0] - mx) * (p[1] - my) for p in pts)
    slope = sxy / sxx
    return lambda y: my + slope * (y - mx)


def _nearest_x_label(x: float, xlabels) -> str:
    best = min(xlabels, key=lambda item: (abs(item[0] - x), item[2]))
    return best[1]


def _mark_anchors(e: SvgElement, sub: str) -> list[tuple[float, float]]:
    if sub == "bar":
        b = element_bbox(e)
        return [(b.center[0], b.y)]
    if sub == "point":
        return [element_bbox(e).center]
    anchors = []
    for run in e.anchors():
        anchors.extend(run)
    return anchors


def recover_data(chart: LabeledChart) -> DataTable:
    """Recover the data table encoded by the chart's marks."""
    series = chart.series if chart.series else match_legend(chart)
    has_legend = bool(chart.elements_of("legend-symbol", "legend-label"))
    if chart.chart_type == "pie":
        return _recover_polar(chart, series, has_legend)
    return _recover_cartesian(chart, series, has_legend)


def _recover_polar(chart, series, has_legend) -> DataTable:
    sectors = chart.elements_of("sector")
    lengths = [(e, _outer_arc_length(e)) for e in sectors]
    lengths = [(e, L) for e, L in lengths if L > 0]
    total = sum(L for _, L in lengths)
    if total <= 0:
        raise InsufficientAxis("no sector arcs to measure")
    rows = []
    for k, (e, L) in enumerate(lengths):
        name = series.get(e.index) or f"slice-{k}"
        rows.append(Row(name, round(L / total * 100, VALUE_DECIMALS), None, (e.index,)))
    x_name = chart.first_text("legend-title") if has_legend else NONE_FIELD
    return DataTable(x_name, NONE_FIELD, None, rows)


def _recover_cartesian(chart, series, has_legend) -> DataTable:
    marks = [(e, chart.labels[e.index]) for e in chart.elements_of("bar", "line-segment", "point")]
    if not marks:
        raise InsufficientAxis("no Cartesian marks")
    value_labels = []
    for lab in chart.elements_of("mark-label"):
        try:
            value_labels.append((element_bbox(lab).center, parse_number(lab.text)))
        except UnparsableLabel:
            continue
    axis = None
    if not value_labels:
        axis = _fit_axis(chart)
    else:
        try:
            axis = _fit_axis(chart)
        except (InsufficientAxis, UnparsableLabel):
            axis = None

    xlabels = [(element_bbox(e).center[0], e.text, e.index) for e in chart.elements_of("x-label")]
    xs_sorted = sorted({round(a[0], 6) for e, sub in marks for a in _mark_anchors(e, sub)})

    def x_of(x):
        if xlabels:
            return _nearest_x_label(x, xlabels)
        return f"x-{xs_sorted.index(round(x, 6))}"

    def y_of(anchor, e):
        if not value_labels:
            return axis(anchor[1])
        # prefer labels sitting horizontally over the mark
        half = element_bbox(e).w / 2
        over = [item for item in value_labels if abs(item[0][0] - anchor[0]) <= half]
        pool = over or value_labels
        return min(pool, key=lambda item: math.hypot(item[0][0] - anchor[0],
                                                     item[0][1] - anchor[1]))[1]

    x_name, y_name, legend_name = _field_names(chart, has_legend)
    rows: dict[tuple, Row] = {}
    for e, sub in marks:
        s = series.get(e.index) if has_legend else None
        if has_legend and s is None:
            s = NONE_FIELD
        for a in _mark_anchors(e, sub):
            key = (x_of(a[0]), s)
            if key in rows:
                old = rows[key]
                rows[key] = Row(old.x, old.y, old.series, old.marks + (e.index,))
                continue
            y = y_of(a, e) if (value_labels and sub == "bar") or axis is None else axis(a[1])
            rows[key] = Row(key[0], round(float(y), VALUE_DECIMALS), s, (e.index,))
    return DataTable(x_name, y_name, legend_name, list(rows.values()))


# --------------------------------------------------------------------------
# labeled SVG

def _attr(v: str) -> str:
    return escape(v, {'"': "&quot;"})


def ac_record(table: DataTable, rows: list[Row]) -> dict:
    def cells(r):
        return [r.x, r.y] + ([r.series if r.series is not None else NONE_FIELD]
                             if table.legend_name is not None else [])
    values = cells(rows[0]) if len(rows) == 1 else [cells(r) for r in rows]
    return {"fields": table.field_names, "values": values}


def emit_labeled_svg(chart: LabeledChart, table: DataTable) -> str:
    """Insert class, id and ac-data attributes; every other byte is preserved."""
    raw = chart.doc.raw
    tax = chart.taxonomy
    new_ids = set(chart.ids.values())
    for e in chart.doc.elements:
        if e.id_attr is not None and e.id_attr in new_ids and chart.ids.get(e.index) != e.id_attr:
            raise IdCollision(f"input already uses id {e.id_attr!r}")
    # also catch ids on elements outside the drawable set
    for m in re.finditer(r'\sid\s*=\s*["\']([^"\']*)["\']', raw):
        if m.group(1) in new_ids:
            raise IdCollision(f"input already uses id {m.group(1)!r}")

    rows_of: dict[int, list[Row]] = {}
    for r in table.rows:
        for idx in r.marks:
            rows_of.setdefault(idx, []).append(r)

    edits = []
    for e in chart.doc.elements:
        sub = chart.labels.get(e.index)
        if sub is None:
            continue
        attrs = f' class="{_attr(tax.primary(sub) + " " + sub)}" id="{_attr(chart.ids[e.index])}"'
        if sub in MARK_SUBS and e.index in rows_of:
            rec = json.dumps(ac_record(table, rows_of[e.index]), ensure_ascii=False)
            attrs += f' ac-data="{_attr(rec)}"'
        start, end = e.tag_span
        tag = raw[start:end]
        tag_clean = re.sub(r'\s(class|id|ac-data)\s*=\s*("[^"]*"|\'[^\']*\')', "", tag)
        if tag_clean != tag:
            # existing attributes of the same name are replaced
            edits.append((start, end, _insert(tag_clean, attrs)))
        else:
            pos = end - 2 if tag.endswith("/>") else end - 1
            edits.append((pos, pos, attrs))
    out = []
    last = 0
    for s, e, text in sorted(edits):
        out.append(raw[last:s])
        out.append(text)
        last = e
    out.append(raw[last:])
    return "".join(out)


def _insert(tag: str, attrs: str) -> str:
    pos = len(tag) - 2 if tag.endswith("/>") else len(tag) - 1
    return tag[:pos] + attrs + tag[pos:]


_ADDED_RE = re.compile(r' class="[^"]*" id="[^"]*"(?: ac-data="[^"]*")?')


def strip_labels(labeled_svg: str) -> str:
    """Remove the attributes added by :func:`emit_labeled_svg`."""
    return _ADDED_RE.sub("", labeled_svg)


def _rows_from_record(rec: dict) -> tuple[list, list]:
    fields = rec.get("fields")
    values = rec.get("values")
    if not isinstance(fields, list) or not isinstance(values, list) or not values:
        raise MalformedAcData("ac-data needs 'fields' and 'values'")
    rows = values if isinstance(values[0], list) else [values]
    for r in rows:
        if len(r) != len(fields):
            raise MalformedAcData("ac-data row width differs from field count")
    return fields, rows


def parse_ac_data(svg_text: str) -> DataTable:
    """Rebuild the data table from every ``ac-data`` attribute in document order."""
    try:
        root = ET.fromstring(svg_text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from None
    fields = None
    rows: dict[tuple, Row] = {}
    for node in root.iter():
        raw = node.get("ac-data")
        if raw is None:
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedAcData(f"ac-data is not JSON: {exc}") from None
        f, rs = _rows_from_record(rec)
        if fields is None:
            fields = f
        elif f != fields:
            raise MalformedAcData("ac-data field names differ between marks")
        for r in rs:
            try:
                y = float(r[1])
            except (TypeError, ValueError):
                raise MalformedAcData(f"non-numeric value {r[1]!r}") from None
            row = Row(str(r[0]), y, str(r[2]) if len(r) > 2 else None)
            rows.setdefault((row.x, row.series), row)
    if fields is None:
        raise MalformedAcData("document carries no ac-data attributes")
    if len(fields) not in (2, 3):
        raise MalformedAcData("ac-data must have two or three fields")
    return DataTable(fields[0], fields[1], fields[2] if len(fields) > 2 else None, list(rows.values()))


def element_rows(svg_text: str) -> dict[str, list[Row]]:
    """Element id -> rows from its ac-data attribute."""
    root = ET.fromstring(svg_text)
    out = {}
    for node in root.iter():
        raw = node.get("ac-data")
        if raw is None or node.get("id") is None:
            continue
        _, rs = _rows_from_record(json.loads(raw))
        out[node.get("id")] = [Row(str(r[0]), float(r[1]), str(r[2]) if len(r) > 2 else None)
                               for r in rs]
    return out


def chart_from_labeled_svg(text: str, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> LabeledChart:
    """Recover labels and ids from a labeled SVG's class/id attributes."""
    doc = parse_svg(text)
    names = set(taxonomy.names)
    labels, ids = {}, {}
    for e in doc.elements:
        parts = (e.class_attr or "").split()
        sub = next((p for p in parts if p in names), None)
        if sub is not None:
            labels[e.index] = sub
            if e.id_attr:
                ids[e.index] = e.id_attr
    chart = LabeledChart(doc, labels, taxonomy, ids=ids or {})
    return chart
