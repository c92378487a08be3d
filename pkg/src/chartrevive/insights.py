"""Deterministic data facts over a recovered table, salience distillation and validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import TooFewRows, UnknownField
from .model import DataTable

INSIGHT_TYPES = ("value", "proportion", "difference", "trend", "rank", "aggregation",
                 "extreme", "outlier", "distribution")

SUB_TYPES = {
    "value": ("first", "last"),
    "proportion": ("majority", "minority"),
    "difference": ("range", "top_two"),
    "trend": ("fluctuate", "increase", "decrease", "fluctuate_increase", "fluctuate_decrease"),
    "rank": ("top",),
    "aggregation": ("average", "sum", "count"),
    "extreme": ("maximum", "minimum"),
    "outlier": ("outlier",),
    "distribution": ("normal", "uniform", "none"),
}

FIXED_SCORES = {"extreme": 0.5, "aggregation": 0.3, "rank": 0.4, "value": 0.2}

# chart type -> insight types that make no sense for it
EXCLUDED = {
    "line": ("proportion",),
    "bar": ("trend", "proportion"),
    "pie": ("trend", "difference"),
}

REL_TOL = 1e-6


@dataclass(frozen=True)
class InsightConfig:
    slope_min: float = 0.05
    r2_strong: float = 0.9
    r2_weak: float = 0.3
    tukey_k: float = 1.5
    uniform_max: float = 0.1
    skew_max: float = 0.5
    kurtosis_max: float = 1.0
    max_distilled: int = 2
    rank_top: int = 3


DEFAULT_CONFIG = InsightConfig()


class DataPoint(NamedTuple):
    x: str
    series: Optional[str]
    value: float


@dataclass(frozen=True)
class SubInsight:
    sub_type: str
    relevant_data: tuple[DataPoint, ...]
    value: Optional[float] = None     # the numeric claim (share, slope, sum, ...)


@dataclass(frozen=True)
class Insight:
    insight_type: str
    subs: tuple[SubInsight, ...]
    score: float
    sentence: Optional[str] = None
    phrases: tuple = ()               # (phrase text, sub_type, (word_start, word_end))

    def __post_init__(self):
        if self.insight_type not in SUB_TYPES:
            raise ValueError(f"unknown insight type {self.insight_type!r}")
        if not self.subs:
            raise ValueError("insight needs at least one sub-insight")
        for s in self.subs:
            if s.sub_type not in SUB_TYPES[self.insight_type]:
                raise ValueError(f"{s.sub_type!r} is not a {self.insight_type} sub-type")
            if not s.relevant_data:
                raise ValueError("sub-insight without relevant data")
        if not self.score >= 0:
            raise ValueError("score must be non-negative")

    @property
    def sub_type(self) -> str:
        return self.subs[0].sub_type

    @property
    def relevant_data(self) -> list[DataPoint]:
        out: list[DataPoint] = []
        for s in self.subs:
            for p in s.relevant_data:
                if p not in out:
                    out.append(p)
        return out

    def to_dict(self) -> dict:
        subs = []
        for s in self.subs:
            d = {"subType": s.sub_type,
                 "relevantData": [{"x": p.x, "series": p.series, "value": p.value}
                                  for p in s.relevant_data]}
            if s.value is not None:
                d["value"] = s.value
            subs.append(d)
        out = {"insightType": self.insight_type, "subInsights": subs, "score": self.score}
        if self.sentence is not None:
            out["sentence"] = self.sentence
            out["phrases"] = [{"text": t, "subType": st, "words": list(w)}
                              for t, st, w in self.phrases]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Insight":
        subs = tuple(
            SubInsight(s["subType"],
                       tuple(DataPoint(str(p["x"]), p.get("series"), float(p["value"]))
                             for p in s["relevantData"]),
                       s.get("value"))
            for s in d["subInsights"])
        phrases = tuple((p["text"], p["subType"], tuple(p["words"])) for p in d.get("phrases", ()))
        return cls(d["insightType"], subs, float(d.get("score", 0.0)), d.get("sentence"), phrases)


def insights_json(items: Sequence[Insight]) -> str:
    return json.dumps([i.to_dict() for i in items], indent=2)


def load_insights(text: str) -> list[Insight]:
    return [Insight.from_dict(d) for d in json.loads(text)]


# --------------------------------------------------------------------------
# statistics helpers

def quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    """Q1, median, Q3 with linear interpolation between order statistics."""
    q = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return float(q[0]), float(q[1]), float(q[2])


def linear_trend(values: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares slope over the index, range-normalized slope and R^2."""
    y = np.asarray(values, dtype=float)
    n = len(y)
    x = np.arange(n, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    value_range = float(y.max() - y.min())
    # constant series: the float mean may leave a tiny nonzero ss_tot, so test the range
    if value_range == 0:
        return 0.0, 0.0, 0.0
    ss_tot = float(((y - ym) ** 2).sum())
    resid = y - (ym + slope * (x - xm))
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot
    m_norm = slope * (n - 1) / value_range
    return slope, m_norm, max(0.0, r2)


def classify_trend(m_norm: float, r2: float, cfg: InsightConfig = DEFAULT_CONFIG) -> str:
    if abs(m_norm) >= cfg.slope_min:
        up = m_norm > 0
        if r2 >= cfg.r2_strong:
            return "increase" if up else "decrease"
        if r2 >= cfg.r2_weak:
            return "fluctuate_increase" if up else "fluctuate_decrease"
    return "fluctuate"


def _points(t: DataTable) -> list[DataPoint]:
    return [DataPoint(r.x, r.series, float(r.y)) for r in t.rows]


def _by_series(t: DataTable) -> dict[Optional[str], list[DataPoint]]:
    out: dict[Optional[str], list[DataPoint]] = {}
    for p in _points(t):
        out.setdefault(p.series, []).append(p)
    return out


# --------------------------------------------------------------------------
# per-type computations

def _value(pts, cfg):
    subs = (SubInsight("first", (pts[0],), pts[0].value),
            SubInsight("last", (pts[-1],), pts[-1].value))
    return Insight("value", subs, FIXED_SCORES["value"])


def _proportion(pts, cfg):
    total = sum(p.value for p in pts)
    if total <= 0:
        return None
    shares = [p.value / total for p in pts]
    imax = int(np.argmax(shares))
    imin = int(np.argmin(shares))
    subs = []
    if shares[imax] >= 0.5:
        subs.append(SubInsight("majority", (pts[imax],), shares[imax]))
    subs.append(SubInsight("minority", (pts[imin],), shares[imin]))
    return Insight("proportion", tuple(subs), shares[imax])


def _difference(pts, cfg):
    vals = [p.value for p in pts]
    imax, imin = int(np.argmax(vals)), int(np.argmin(vals))
    order = sorted(range(len(pts)), key=lambda i: (-vals[i], i))
    a, b = order[0], order[1]
    subs = (SubInsight("range", (pts[imax], pts[imin]), vals[imax] - vals[imin]),
            SubInsight("top_two", (pts[a], pts[b]), vals[a] - vals[b]))
    score = (vals[imax] - vals[imin]) / vals[imax] if vals[imax] > 0 else 0.0
    return Insight("difference", subs, max(0.0, score))


def _trend(t, cfg):
    subs, score = [], 0.0
    for _, pts in _by_series(t).items():
        if len(pts) < 2:
            continue
        _, m_norm, r2 = linear_trend([p.value for p in pts])
        subs.append(SubInsight(classify_trend(m_norm, r2, cfg), tuple(pts), m_norm))
        score = max(score, abs(m_norm) * r2)
    if not subs:
        return None
    return Insight("trend", tuple(subs), score)


def _rank(pts, cfg):
    order = sorted(range(len(pts)), key=lambda i: (-pts[i].value, i))[:cfg.rank_top]
    top = tuple(pts[i] for i in order)
    return Insight("rank", (SubInsight("top", top, top[0].value),), FIXED_SCORES["rank"])


def _aggregation(pts, cfg):
    vals = [p.value for p in pts]
    total = math.fsum(vals)
    rel = tuple(pts)
    subs = (SubInsight("average", rel, total / len(vals)),
            SubInsight("sum", rel, total),
            SubInsight("count", rel, float(len(vals))))
    return Insight("aggregation", subs, FIXED_SCORES["aggregation"])


def _extreme(pts, cfg):
    vals = [p.value for p in pts]
    imax, imin = int(np.argmax(vals)), int(np.argmin(vals))
    subs = (SubInsight("maximum", (pts[imax],), vals[imax]),
            SubInsight("minimum", (pts[imin],), vals[imin]))
    return Insight("extreme", subs, FIXED_SCORES["extreme"])


def tukey_outliers(values: Sequence[float], k: float = 1.5) -> list[int]:
    q1, _, q3 = quartiles(values)
    iqr = q3 - q1
    lo, hi = q1 - k * iqr, q3 + k * iqr
    return [i for i, v in enumerate(values) if v < lo or v > hi]


def _outlier(pts, cfg):
    vals = [p.value for p in pts]
    idx = tukey_outliers(vals, cfg.tukey_k)
    if not idx:
        return None
    q1, med, q3 = quartiles(vals)
    iqr = q3 - q1
    dev = max(abs(vals[i] - med) for i in idx)
    score = dev / iqr if iqr > 0 else 1.0
    subs = tuple(SubInsight("outlier", (pts[i],), vals[i]) for i in idx)
    return Insight("outlier", subs, score)


def distribution_kind(values: Sequence[float], cfg: InsightConfig = DEFAULT_CONFIG) -> str:
    v = np.asarray(values, dtype=float)
    spread = float(v.max() - v.min())
    mean = float(v.mean())
    if spread == 0 or (mean != 0 and spread / abs(mean) <= cfg.uniform_max):
        return "uniform"
    if len(v) >= 3:
        skew = float(stats.skew(v))
        kurt = float(stats.kurtosis(v))
        if abs(skew) <= cfg.skew_max and abs(kurt) <= cfg.kurtosis_max:
            return "normal"
    return "none"


def _distribution(pts, cfg):
    kind = distribution_kind([p.value for p in pts], cfg)
    return Insight("distribution", (SubInsight(kind, tuple(pts)),),
                   0.6 if kind in ("normal", "uniform") else 0.0)


def compute_insights(t: DataTable, cfg: InsightConfig = DEFAULT_CONFIG) -> list[Insight]:
    """Every fact type that applies to ``t``, in type order."""
    if len(t.rows) < 2:
        raise TooFewRows(f"need at least 2 rows, got {len(t.rows)}")
    pts = _points(t)
    out = []
    for kind in INSIGHT_TYPES:
        if kind == "trend":
            ins = _trend(t, cfg)
        else:
            ins = _COMPUTE[kind](pts, cfg)
        if ins is not None:
            out.append(ins)
    return out


_COMPUTE = {"value": _value, "proportion": _proportion, "difference": _difference,
            "rank": _rank, "aggregation": _aggregation, "extreme": _extreme,
            "outlier": _outlier, "distribution": _distribution}


def distill(items: Sequence[Insight], chart_type: Optional[str] = None,
            max_distilled: int = DEFAULT_CONFIG.max_distilled) -> list[Insight]:
    """Top insights by score for the chart type; ties go to type order then input order."""
    excluded = EXCLUDED.get(chart_type, ())
    pool = [(i, ins) for i, ins in enumerate(items) if ins.insight_type not in excluded]
    pool.sort(key=lambda p: (-p[1].score, INSIGHT_TYPES.index(p[1].insight_type), p[0]))
    return [ins for _, ins in pool[:max_distilled]]


@dataclass(frozen=True)
class InsightReport:
    all: list[Insight]
    distilled: list[Insight] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"all": [i.to_dict() for i in self.all],
                "distilled": [i.to_dict() for i in self.distilled]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "InsightReport":
        d = json.loads(text)
        return cls([Insight.from_dict(x) for x in d["all"]],
                   [Insight.from_dict(x) for x in d["distilled"]])


def analyze(t: DataTable, chart_type: Optional[str], cfg: InsightConfig = DEFAULT_CONFIG) -> InsightReport:
    items = compute_insights(t, cfg)
    return InsightReport(items, distill(items, chart_type, cfg.max_distilled))


# --------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Validation:
    valid: bool
    corrected: Optional[Insight] = None


def _close(a: Optional[float], b: Optional[float]) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= REL_TOL * max(1.0, abs(a), abs(b))


def _same_sub(claim: SubInsight, truth: SubInsight) -> bool:
    if claim.sub_type != truth.sub_type or not _close(claim.value, truth.value):
        return False
    if len(claim.relevant_data) != len(truth.relevant_data):
        return False
    return all(c.x == r.x and c.series == r.series and _close(c.value, r.value)
               for c, r in zip(claim.relevant_data, truth.relevant_data))


def validate_insight(ins: Insight, t: DataTable, cfg: InsightConfig = DEFAULT_CONFIG) -> Validation:
    """Recompute the insight's numbers from ``t``; return a corrected copy on disagreement."""
    keys = {(r.x, r.series) for r in t.rows}
    xs = {r.x for r in t.rows}
    for p in ins.relevant_data:
        if (p.x, p.series) not in keys and not (p.series is None and p.x in xs):
            raise UnknownField(f"data point ({p.x!r}, {p.series!r}) is not in the table")
    truth = compute_insights(t, cfg)
    match = next((i for i in truth if i.insight_type == ins.insight_type), None)
    if match is None:
        # e.g. an outlier claim on outlier-free data cannot be corrected into existence
        return Validation(False, None)
    # a claim may cover a subset of the sub-insights; each one must be reproduced
    ok = all(any(_same_sub(c, r) for r in match.subs) for c in ins.subs)
    if ok:
        return Validation(True)
    return Validation(False, replace(match, sentence=None, phrases=()))
