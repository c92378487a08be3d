"""Deterministic synthetic bar/line/pie charts with per-element ground truth."""

from __future__ import annotations

import hashlib
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional
from xml.sax.saxutils import escape, quoteattr

from .errors import InvalidSpec
from .model import NONE_FIELD, DataTable, Row

CHART_TYPES = ("bar", "line", "pie")
PATTERNS = ("none", "monotone_up", "monotone_down", "outlier", "dominant_slice")

PALETTES = (
    {"bg": "#ffffff", "grid": "#dddddd", "axis": "#333333", "text": "#222222",
     "series": ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7"]},
    {"bg": "#fafafa", "grid": "#e5e5e5", "axis": "#444444", "text": "#111111",
     "series": ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]},
    {"bg": "#ffffff", "grid": "#eeeeee", "axis": "#000000", "text": "#000000",
     "series": ["#636efa", "#ef553b", "#00cc96", "#ab63fa", "#ffa15a", "#19d3f3", "#ff6692", "#b6e880"]},
    {"bg": "#f7f7f2", "grid": "#d9d9cf", "axis": "#555555", "text": "#333333",
     "series": ["#8dd3c7", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#bc80bd"]},
    {"bg": "#ffffff", "grid": "#cccccc", "axis": "#222222", "text": "#222222",
     "series": ["#003f5c", "#58508d", "#bc5090", "#ff6361", "#ffa600", "#2f4b7c", "#a05195", "#d45087"]},
)

_MONTHS = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"]
_WORDS = ["Apple", "Banana", "Cherry", "Grape", "Lemon", "Mango", "Olive", "Peach", "Pear",
          "Plum", "Kiwi", "Melon", "Alpha", "Beta", "Gamma", "Delta", "Omega", "Sigma",
          "Tokyo", "Paris", "Lima", "Oslo", "Cairo", "Delhi", "Rome", "Quito"]
_SERIES = ["North", "South", "East", "West", "Online", "Retail", "Team A", "Team B"]
_X_TITLES = {"month": "Month", "year": "Year", "word": "Category"}
_Y_TITLES = ["Revenue", "Sales", "Visitors", "Count", "Score", "Volume", "Share"]
_TITLES = ["Quarterly Overview", "Annual Report", "Market Snapshot", "Survey Results",
           "Traffic Summary", "Regional Performance", "Product Mix", "Weekly Activity"]
_LEGEND_TITLES = ["Region", "Channel", "Group", "Segment", "Type"]


@dataclass
class Style:
    palette: int = 0
    legend: str = "none"              # right | top | none
    grid: bool = True
    donut: float = 0.0
    mark_labels: bool = False
    axis_titles: bool = True
    title: bool = True
    points: bool = False
    font_size: int = 12
    width: int = 600
    height: int = 400
    tick_format: str = "plain"        # plain | comma | k | percent


@dataclass
class ChartSpec:
    chart_type: str
    seed: int = 0
    style: Style = field(default_factory=Style)
    pattern: str = "none"
    categories: Optional[list[str]] = None
    series: Optional[list[str]] = None
    values: Optional[list[list[float]]] = None    # values[series][category]
    y_max: Optional[float] = None
    title: str = ""
    x_title: str = ""
    y_title: str = ""
    legend_title: str = ""

    def validate(self) -> None:
        if self.chart_type not in CHART_TYPES:
            raise InvalidSpec(f"unknown chart type {self.chart_type!r}")
        if self.pattern not in PATTERNS:
            raise InvalidSpec(f"unknown pattern {self.pattern!r}")
        st = self.style
        if st.legend not in ("right", "top", "none"):
            raise InvalidSpec(f"bad legend position {st.legend!r}")
        if not 0 <= st.donut <= 0.7:
            raise InvalidSpec("donut ratio must lie in [0, 0.7]")
        if not 0 <= st.palette < len(PALETTES):
            raise InvalidSpec("unknown palette")
        if self.values is None or self.categories is None or self.series is None:
            raise InvalidSpec("spec has no data")
        n = len(self.categories)
        lo, hi = {"bar": (3, 12), "line": (5, 20), "pie": (2, 8)}[self.chart_type]
        if not lo <= n <= hi:
            raise InvalidSpec(f"{self.chart_type} needs {lo}-{hi} categories, got {n}")
        if not 1 <= len(self.series) <= 4:
            raise InvalidSpec("series count must be 1-4")
        if st.legend == "none" and len(self.series) != 1:
            raise InvalidSpec("charts without a legend carry exactly one series")
        if self.chart_type == "pie" and len(self.series) != 1:
            raise InvalidSpec("pie charts carry one series")
        if len(self.values) != len(self.series) or any(len(v) != n for v in self.values):
            raise InvalidSpec("values shape does not match categories x series")
        if any(v <= 0 for row in self.values for v in row):
            raise InvalidSpec("values must be positive")

    @classmethod
    def random(cls, chart_type: str, seed: int, pattern: Optional[str] = None) -> "ChartSpec":
        """Sample style, data and titles from ``seed``."""
        if chart_type not in CHART_TYPES:
            raise InvalidSpec(f"unknown chart type {chart_type!r}")
        rng = random.Random(f"{chart_type}:{seed}")
        st = Style(
            palette=rng.randrange(len(PALETTES)),
            legend=rng.choice(["right", "right", "top", "none"]),
            grid=rng.random() < 0.6,
            donut=rng.choice([0.0, 0.0, 0.4, 0.55, 0.7]) if chart_type == "pie" else 0.0,
            mark_labels=rng.random() < (0.4 if chart_type != "line" else 0.0),
            axis_titles=rng.random() < 0.9,
            title=rng.random() < 0.92,
            points=chart_type == "line" and rng.random() < 0.5,
            font_size=rng.randint(10, 14),
            width=rng.choice([600, 600, 640, 720, 800]),
            height=rng.choice([400, 400, 450, 480]),
        )
        if pattern is None:
            options = {"bar": ["none", "none", "monotone_up", "monotone_down", "outlier"],
                       "line": ["none", "monotone_up", "monotone_down", "outlier"],
                       "pie": ["none", "none", "dominant_slice"]}[chart_type]
            pattern = rng.choice(options)
        lo, hi = {"bar": (3, 12), "line": (5, 20), "pie": (2, 8)}[chart_type]
        n = rng.randint(lo, hi)
        vocab = rng.choice(["month", "year", "word"]) if chart_type != "pie" else "word"
        if vocab == "month" and n <= 12:
            start = rng.randrange(12 - n + 1)
            cats = _MONTHS[start:start + n]
        elif vocab == "word" or vocab == "month":
            vocab = "word"
            cats = rng.sample(_WORDS, n)
        else:
            y0 = rng.randint(1990, 2010)
            cats = [str(y0 + i) for i in range(n)]
        n_series = 1 if (st.legend == "none" or chart_type == "pie") else rng.randint(1, 4)
        if chart_type == "pie" and st.legend == "none":
            st.mark_labels = True
        series = rng.sample(_SERIES, n_series)

        scale = rng.choice([1, 10, 100, 1000, 10000])
        if scale >= 1000:
            st.tick_format = rng.choice(["plain", "comma", "k"])
        else:
            st.tick_format = rng.choice(["plain", "plain", "percent"])
        decimals = 1 if scale <= 10 else 0
        top = scale * rng.uniform(2, 10)
        values = []
        for _ in range(n_series):
            if chart_type == "line":
                v = rng.uniform(0.3, 0.8) * top
                row = []
                for _ in range(n):
                    v = min(top, max(0.08 * top, v + rng.gauss(0, 0.12) * top))
                    row.append(v)
            else:
                row = [rng.uniform(0.12, 1.0) * top for _ in range(n)]
            values.append(row)
        values = [_inject(row, pattern, rng) for row in values]
        values = [[max(round(v, decimals), 10 ** -decimals) for v in row] for row in values]
        if chart_type == "pie":
            values = [[max(1.0, round(v / top * 100)) for v in row] for row in values]

        spec = cls(
            chart_type=chart_type, seed=seed, style=st, pattern=pattern,
            categories=cats, series=series, values=values,
            title=rng.choice(_TITLES) if st.title else "",
            x_title=_X_TITLES[vocab] if st.axis_titles and chart_type != "pie" else "",
            y_title=rng.choice(_Y_TITLES) if st.axis_titles and chart_type != "pie" else "",
            legend_title=rng.choice(_LEGEND_TITLES) if st.legend != "none" else "",
        )
        if chart_type == "pie" and st.legend != "none":
            spec.legend_title = rng.choice(["Category", "Product", "Source", "Item"])
        return spec


def _inject(row, pattern, rng):
    row = list(row)
    if pattern == "monotone_up":
        row.sort()
    elif pattern == "monotone_down":
        row.sort(reverse=True)
    elif pattern == "outlier" and len(row) >= 4:
        med = sorted(row)[len(row) // 2]
        for i in range(len(row)):
            row[i] = med * rng.uniform(0.8, 1.2)
        row[rng.randrange(len(row))] = med * rng.uniform(2.6, 3.2)
    elif pattern == "dominant_slice":
        k = rng.randrange(len(row))
        row[k] = 1.5 * (sum(row) - row[k])
    return row


@dataclass
class GroundTruth:
    labels: dict[int, str]
    table: DataTable
    meta: dict

    def to_json(self) -> str:
        return json.dumps({"labels": {str(k): v for k, v in sorted(self.labels.items())},
                           "table": self.table.to_dict(), "meta": self.meta},
                          indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        d = json.loads(text)
        return cls({int(k): v for k, v in d["labels"].items()},
                   DataTable.from_dict(d["table"]), d["meta"])


# --------------------------------------------------------------------------
# rendering

def fmt(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def format_number(v: float, style: str = "plain") -> str:
    if style == "comma":
        return f"{v:,.0f}" if float(v).is_integer() else f"{v:,.1f}"
    if style == "k":
        return f"{v / 1000:g}k"
    if style == "percent":
        return f"{v:g}%"
    return f"{v:g}"


def nice_ticks(vmax: float) -> tuple[float, float]:
    """Return ``(axis max, step)`` with 4-6 steps covering ``[0, vmax]``."""
    exp = math.floor(math.log10(vmax / 5))
    for base in (1, 2, 2.5, 5, 10, 20):
        step = base * 10 ** exp
        top = math.ceil(vmax / step - 1e-9) * step
        if top / step <= 6:
            return top, step
    return math.ceil(vmax / (50 * 10 ** exp)) * 50 * 10 ** exp, 50 * 10 ** exp


class LinearScale:
    def __init__(self, domain: tuple[float, float], range_: tuple[float, float]):
        self.d0, self.d1 = domain
        self.r0, self.r1 = range_

    def __call__(self, v: float) -> float:
        return self.r0 + (v - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)


class _Svg:
    def __init__(self, w, h):
        self.parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
                      f'viewBox="0 0 {w} {h}">']
        self.labels: dict[int, str] = {}
        self.n = 0

    def el(self, tag: str, label: str, text: Optional[str] = None, **attrs):
        a = "".join(f" {k.replace('_', '-')}={quoteattr(str(v))}" for k, v in attrs.items())
        if text is None:
            self.parts.append(f"<{tag}{a}/>")
        else:
            self.parts.append(f"<{tag}{a}>{escape(text)}</{tag}>")
        self.labels[self.n] = label
        self.n += 1

    def raw(self, s: str):
        self.parts.append(s)

    def text(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def generate_chart(spec: ChartSpec) -> tuple[str, GroundTruth]:
    """Render ``spec`` to SVG text and its ground truth."""
    spec.validate()
    st = spec.style
    pal = PALETTES[st.palette]
    W, H, fs = st.width, st.height, st.font_size
    svg = _Svg(W, H)
    svg.el("rect", "canvas", x=0, y=0, width=W, height=H, fill=pal["bg"])
    if spec.title:
        svg.el("text", "chart-title", spec.title, x=fmt(W / 2), y=28, font_size=fs + 4,
               text_anchor="middle", fill=pal["text"], font_family="sans-serif")

    legend = st.legend
    left = 60.0
    right = W - (150.0 if legend == "right" else 30.0)
    top = 70.0 if legend == "top" else 50.0
    bottom = H - 50.0
    colors = pal["series"]
    entries = spec.series if spec.chart_type != "pie" else spec.categories
    meta = {"chart_type": spec.chart_type, "title": spec.title or NONE_FIELD,
            "x_title": spec.x_title or NONE_FIELD, "y_title": spec.y_title or NONE_FIELD,
            "legend_title": spec.legend_title or NONE_FIELD,
            "legend_entries": list(entries) if legend != "none" else [],
            "categories": list(spec.categories), "series": list(spec.series)}

    if spec.chart_type == "pie":
        table = _draw_pie(svg, spec, pal, left, right, top, bottom)
    else:
        table = _draw_cartesian(svg, spec, pal, left, right, top, bottom, meta)

    if legend != "none":
        _draw_legend(svg, spec, pal, entries, colors, W)

    meta["element_count"] = svg.n
    return svg.text(), GroundTruth(dict(svg.labels), table, meta)


def _draw_legend(svg, spec, pal, entries, colors, W):
    st = spec.style
    fs = st.font_size
    line_symbol = spec.chart_type == "line"

    def symbol(x, y, color):
        if line_symbol:
            svg.el("line", "legend-symbol", x1=fmt(x), y1=fmt(y + 6), x2=fmt(x + 14), y2=fmt(y + 6),
                   stroke=color, stroke_width=2)
        else:
            svg.el("rect", "legend-symbol", x=fmt(x), y=fmt(y), width=12, height=12, fill=color)

    if st.legend == "right":
        x0 = W - 130.0
        svg.el("text", "legend-title", spec.legend_title, x=fmt(x0), y=62, font_size=fs,
               fill=pal["text"], font_family="sans-serif", font_weight="bold")
        for i, name in enumerate(entries):
            y = 72.0 + 20 * i
            symbol(x0, y, colors[i % len(colors)])
            svg.el("text", "legend-label", name, x=fmt(x0 + 18), y=fmt(y + 10), font_size=fs - 1,
                   fill=pal["text"], font_family="sans-serif")
    else:
        x = 60.0
        y = 44.0
        svg.el("text", "legend-title", spec.legend_title, x=fmt(x), y=fmt(y + 10), font_size=fs,
               fill=pal["text"], font_family="sans-serif", font_weight="bold")
        x += 0.6 * fs * len(spec.legend_title) + 14
        for i, name in enumerate(entries):
            symbol(x, y, colors[i % len(colors)])
            svg.el("text", "legend-label", name, x=fmt(x + 18), y=fmt(y + 10), font_size=fs - 1,
                   fill=pal["text"], font_family="sans-serif")
            x += 18 + 0.6 * (fs - 1) * len(name) + 14


def _draw_cartesian(svg, spec, pal, left, right, top, bottom, meta) -> DataTable:
    st = spec.style
    fs = st.font_size
    cats, series, values = spec.categories, spec.series, spec.values
    vmax = max(max(r) for r in values)
    if spec.y_max is not None:
        y_max = spec.y_max
        step = _step_for(y_max)
    else:
        y_max, step = nice_ticks(vmax)
    meta["y_domain"] = [0, y_max]
    ys = LinearScale((0.0, y_max), (bottom, top))
    n = len(cats)
    band = (right - left) / n
    ax = pal["axis"]

    # the plot body lives in a translated group so transforms get exercised
    svg.raw(f'<g transform="translate({fmt(left)},0)">')
    X = lambda x: fmt(x - left)  # noqa: E731

    ticks = []
    k = 0
    while k * step <= y_max + 1e-9:
        ticks.append(k * step)
        k += 1
    if st.grid:
        for t in ticks[1:]:
            svg.el("line", "grid-line", x1=X(left), y1=fmt(ys(t)), x2=X(right), y2=fmt(ys(t)),
                   stroke=pal["grid"], stroke_width=1)
    svg.el("line", "axis-line", x1=X(left), y1=fmt(bottom), x2=X(right), y2=fmt(bottom),
           stroke=ax, stroke_width=1)
    svg.el("line", "axis-line", x1=X(left), y1=fmt(top), x2=X(left), y2=fmt(bottom),
           stroke=ax, stroke_width=1)
    for t in ticks:
        y = ys(t)
        svg.el("line", "tick", x1=X(left - 5), y1=fmt(y), x2=X(left), y2=fmt(y),
               stroke=ax, stroke_width=1)
        svg.el("text", "y-label", format_number(t, st.tick_format), x=X(left - 8),
               y=fmt(y + 0.4 * fs), font_size=fs, text_anchor="end", fill=pal["text"],
               font_family="sans-serif")
    for i, c in enumerate(cats):
        cx = left + (i + 0.5) * band
        svg.el("line", "tick", x1=X(cx), y1=fmt(bottom), x2=X(cx), y2=fmt(bottom + 5),
               stroke=ax, stroke_width=1)
        svg.el("text", "x-label", c, x=X(cx), y=fmt(bottom + 8 + fs), font_size=fs,
               text_anchor="middle", fill=pal["text"], font_family="sans-serif")

    colors = pal["series"]
    legend = st.legend != "none"
    rows = []
    if spec.chart_type == "bar":
        group = 0.72 * band
        bw = group / len(series)
        for i, c in enumerate(cats):
            for s, name in enumerate(series):
                v = values[s][i]
                x = left + (i + 0.5) * band - group / 2 + s * bw
                y = ys(v)
                svg.el("rect", "bar", x=X(x), y=fmt(y), width=fmt(bw * 0.92),
                       height=fmt(bottom - y), fill=colors[s % len(colors)])
                if st.mark_labels:
                    svg.el("text", "mark-label", format_number(v), x=X(x + bw * 0.46),
                           y=fmt(y - 4), font_size=max(8, fs - 3), text_anchor="middle",
                           fill=pal["text"], font_family="sans-serif")
        for s, name in enumerate(series):
            rows += [Row(c, values[s][i], name if legend else None) for i, c in enumerate(cats)]
    else:
        for s, name in enumerate(series):
            color = colors[s % len(colors)]
            pts = [(left + (i + 0.5) * band, ys(values[s][i])) for i in range(n)]
            d = "M" + " L".join(f"{X(x)} {fmt(y)}" for x, y in pts)
            svg.el("path", "line-segment", d=d, fill="none", stroke=color, stroke_width=2)
            if st.points:
                for x, y in pts:
                    svg.el("circle", "point", cx=X(x), cy=fmt(y), r=3.5, fill=color,
                           stroke="#ffffff", stroke_width=1)
            rows += [Row(c, values[s][i], name if legend else None) for i, c in enumerate(cats)]
    svg.raw("</g>")

    if spec.x_title:
        svg.el("text", "x-title", spec.x_title, x=fmt((left + right) / 2), y=fmt(bottom + 2.6 * fs + 8),
               font_size=fs + 1, text_anchor="middle", fill=pal["text"], font_family="sans-serif")
    if spec.y_title:
        svg.el("text", "y-title", spec.y_title, x=12, y=fmt(top - 14), font_size=fs + 1,
               fill=pal["text"], font_family="sans-serif")
    return DataTable(spec.x_title or NONE_FIELD, spec.y_title or NONE_FIELD,
                     (spec.legend_title or NONE_FIELD) if legend else None, rows)


def _step_for(y_max: float) -> float:
    for k in (5, 4, 6, 10, 2):
        if (y_max / k).is_integer() or k == 2:
            return y_max / k
    return y_max / 5


def _draw_pie(svg, spec, pal, left, right, top, bottom) -> DataTable:
    st = spec.style
    vals = spec.values[0]
    total = sum(vals)
    cx, cy = (left + right) / 2, (top + bottom) / 2
    R = min(right - left, bottom - top) / 2 - 4
    r_in = st.donut * R
    colors = pal["series"]
    legend = st.legend != "none"
    a0 = -math.pi / 2
    rows = []
    label_specs = []
    for i, v in enumerate(vals):
        a1 = a0 + 2 * math.pi * v / total
        large = 1 if a1 - a0 > math.pi else 0
        p0 = (cx + R * math.cos(a0), cy + R * math.sin(a0))
        p1 = (cx + R * math.cos(a1), cy + R * math.sin(a1))
        if r_in > 0:
            q1 = (cx + r_in * math.cos(a1), cy + r_in * math.sin(a1))
            q0 = (cx + r_in * math.cos(a0), cy + r_in * math.sin(a0))
            d = (f"M{fmt(p0[0])} {fmt(p0[1])} A{fmt(R)} {fmt(R)} 0 {large} 1 {fmt(p1[0])} {fmt(p1[1])} "
                 f"L{fmt(q1[0])} {fmt(q1[1])} A{fmt(r_in)} {fmt(r_in)} 0 {large} 0 {fmt(q0[0])} {fmt(q0[1])} Z")
        else:
            d = (f"M{fmt(cx)} {fmt(cy)} L{fmt(p0[0])} {fmt(p0[1])} "
                 f"A{fmt(R)} {fmt(R)} 0 {large} 1 {fmt(p1[0])} {fmt(p1[1])} Z")
        svg.el("path", "sector", d=d, fill=colors[i % len(colors)], stroke="#ffffff", stroke_width=1)
        pct = v / total * 100
        name = spec.categories[i] if legend else f"slice-{i}"
        rows.append(Row(name, pct))
        mid = (a0 + a1) / 2
        rl = (R + r_in) / 2 if r_in > 0 else 0.65 * R
        label_specs.append((cx + rl * math.cos(mid), cy + rl * math.sin(mid), pct))
        a0 = a1
    if st.mark_labels:
        for x, y, pct in label_specs:
            svg.el("text", "mark-label", f"{pct:.0f}%", x=fmt(x), y=fmt(y + 4),
                   font_size=max(8, st.font_size - 2), text_anchor="middle", fill="#ffffff",
                   font_family="sans-serif")
    x_name = (spec.legend_title or NONE_FIELD) if legend else NONE_FIELD
    return DataTable(x_name, NONE_FIELD, None, rows)


# --------------------------------------------------------------------------
# datasets

def _chart_seed(seed: int, chart_type: str, i: int) -> int:
    h = hashlib.sha256(f"{seed}:{chart_type}:{i}".encode()).digest()
    return int.from_bytes(h[:4], "little")


def assign_splits(seed: int, names: list[str]) -> dict[str, str]:
    """Exact 80/10/10 cut of ``names`` in a seeded hash order."""
    order = sorted(names, key=lambda n: hashlib.sha256(f"split:{seed}:{n}".encode()).digest())
    n_train, n_val = round(0.8 * len(order)), round(0.9 * len(order))
    return {n: "train" if k < n_train else ("val" if k < n_val else "test")
            for k, n in enumerate(order)}


def _render_one(args):
    chart_type, cseed = args
    return generate_chart(ChartSpec.random(chart_type, cseed))


def generate_dataset(count_per_type: int, seed: int, out_dir, jobs: int = 1) -> dict:
    """Write SVGs, ground-truth sidecars and ``manifest.json`` into ``out_dir``."""
    if count_per_type < 1:
        raise InvalidSpec("count_per_type must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    work = [(t, i, _chart_seed(seed, t, i)) for t in CHART_TYPES for i in range(count_per_type)]
    args = [(t, s) for t, _, s in work]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_render_one, args, chunksize=16))
    else:
        results = [_render_one(a) for a in args]
    charts = []
    # stratified per chart type so every split sees all three types
    splits = {}
    for t in CHART_TYPES:
        splits.update(assign_splits(seed, [f"{t}_{i:05d}.svg" for i in range(count_per_type)]))
    for (t, i, cseed), (svg_text, gt) in zip(work, results):
        name = f"{t}_{i:05d}.svg"
        (out / name).write_text(svg_text)
        (out / name.replace(".svg", ".json")).write_text(gt.to_json())
        charts.append({"path": name, "type": t, "seed": cseed, "split": splits[name]})
    manifest = {"seed": seed, "count_per_type": count_per_type, "charts": charts}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest


def load_manifest(out_dir) -> dict:
    return json.loads((Path(out_dir) / "manifest.json").read_text())


def spec_to_dict(spec: ChartSpec) -> dict:
    return asdict(spec)
