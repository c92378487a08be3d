"""Shared value types: element taxonomy, recovered data tables and labeled charts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .svg import SvgDocument

NONE_FIELD = "None"

PRIMARIES = ("background", "title", "legend", "mark", "axis")

DEFAULT_SUBS = (
    ("canvas", "background"),
    ("grid-line", "background"),
    ("chart-title", "title"),
    ("legend-symbol", "legend"),
    ("legend-label", "legend"),
    ("legend-title", "legend"),
    ("bar", "mark"),
    ("line-segment", "mark"),
    ("point", "mark"),
    ("sector", "mark"),
    ("mark-label", "mark"),
    ("axis-line", "axis"),
    ("tick", "axis"),
    ("x-label", "axis"),
    ("y-label", "axis"),
    ("x-title", "axis"),
    ("y-title", "axis"),
)

MARK_SUBS = ("bar", "line-segment", "point", "sector")


@dataclass(frozen=True)
class Taxonomy:
    primaries: tuple[str, ...]
    subs: tuple[tuple[str, str], ...]  # (sub name, primary)

    def __post_init__(self):
        names = [s for s, _ in self.subs]
        if len(set(names)) != len(names):
            raise ValueError("sub-category names must be unique")
        for s, p in self.subs:
            if p not in self.primaries:
                raise ValueError(f"sub-category {s!r} maps to unknown primary {p!r}")

    @property
    def names(self) -> list[str]:
        return [s for s, _ in self.subs]

    def primary(self, sub: str) -> str:
        for s, p in self.subs:
            if s == sub:
                return p
        raise KeyError(sub)

    def index(self, sub: str) -> int:
        return self.names.index(sub)

    def to_json(self) -> str:
        return json.dumps({"primaries": list(self.primaries),
                           "subs": [{"name": s, "primary": p} for s, p in self.subs]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Taxonomy":
        d = json.loads(text)
        return cls(tuple(d["primaries"]), tuple((s["name"], s["primary"]) for s in d["subs"]))

    @classmethod
    def load(cls, path) -> "Taxonomy":
        return cls.from_json(Path(path).read_text())


DEFAULT_TAXONOMY = Taxonomy(PRIMARIES, DEFAULT_SUBS)


@dataclass(frozen=True)
class Row:
    x: str
    y: float
    series: Optional[str] = None
    # element indices of the marks that encode this row; not part of row identity
    marks: tuple[int, ...] = field(default=(), compare=False, repr=False)


@dataclass
class DataTable:
    """Recovered data.  ``legend_name`` is None for two-dimensional tables."""

    x_name: str = NONE_FIELD
    y_name: str = NONE_FIELD
    legend_name: Optional[str] = None
    rows: list[Row] = field(default_factory=list)

    @property
    def field_names(self) -> list[str]:
        names = [self.x_name, self.y_name]
        if self.legend_name is not None:
            names.append(self.legend_name)
        return names

    @property
    def dims(self) -> int:
        return len(self.field_names)

    @property
    def values(self) -> list[float]:
        return [r.y for r in self.rows]

    def series_names(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.series is not None and r.series not in seen:
                seen.append(r.series)
        return seen

    def x_values(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.x not in seen:
                seen.append(r.x)
        return seen

    def to_dict(self) -> dict:
        return {"fields": self.field_names,
                "rows": [[r.x, r.y] + ([r.series] if self.legend_name is not None else [])
                         for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "DataTable":
        f = d["fields"]
        legend = f[2] if len(f) > 2 else None
        rows = [Row(str(r[0]), float(r[1]), r[2] if len(r) > 2 else None) for r in d["rows"]]
        return cls(f[0], f[1], legend, rows)

    def to_csv(self) -> str:
        lines = [",".join(self.field_names)]
        for r in self.rows:
            cells = [r.x, f"{r.y:g}"] + ([r.series or ""] if self.legend_name is not None else [])
            lines.append(",".join(cells))
        return "\n".join(lines)


@dataclass
class LabeledChart:
    doc: SvgDocument
    labels: dict[int, str]
    taxonomy: Taxonomy = DEFAULT_TAXONOMY
    series: dict[int, str] = field(default_factory=dict)
    ids: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.ids:
            self.ids = assign_ids(self.labels)

    def elements_of(self, *subs: str):
        return [e for e in self.doc.elements if self.labels.get(e.index) in subs]

    def first_text(self, sub: str) -> str:
        els = self.elements_of(sub)
        text = els[0].text.strip() if els else ""
        return text or NONE_FIELD

    @property
    def chart_type(self) -> Optional[str]:
        kinds = set(self.labels.values())
        if "sector" in kinds:
            return "pie"
        if "bar" in kinds:
            return "bar"
        if "line-segment" in kinds or "point" in kinds:
            return "line"
        return None

    def meta(self) -> dict:
        return {
            "chart_type": self.chart_type,
            "title": self.first_text("chart-title"),
            "x_title": self.first_text("x-title"),
            "y_title": self.first_text("y-title"),
            "legend_title": self.first_text("legend-title"),
            "legend_entries": [e.text for e in self.elements_of("legend-label")],
            "mark_count": len(self.elements_of(*MARK_SUBS)),
        }


def assign_ids(labels: dict[int, str]) -> dict[int, str]:
    """``<sub>-<n>`` with a per-sub ordinal in document order."""
    counters: dict[str, int] = {}
    ids = {}
    for idx in sorted(labels):
        sub = labels[idx]
        n = counters.get(sub, 0)
        counters[sub] = n + 1
        ids[idx] = f"{sub}-{n}"
    return ids
