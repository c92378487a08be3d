"""Animation planning as (target, effect, interval) entries and CSS keyframe rendering."""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .dataset import fmt as fmt_num
from .errors import MarkerWordMissing, MissingTimings, NoRelevantElements, SelectorMiss
from .insights import DataPoint, Insight
from .model import MARK_SUBS, LabeledChart
from .narration import NarrationScript, fmt_value
from .recovery import element_rows
from .svg import Rect, element_bbox

log = logging.getLogger(__name__)

RENDER_VERSION = 1
HEADER = f"<!-- chartrevive live chart v{RENDER_VERSION} -->"

ENTRANCE_EFFECTS = ("fade_in", "wipe")
EXIT_EFFECTS = ("fade_out",)
EMPHASIS_EFFECTS = ("show_box", "show_text", "change_color", "highlight", "bar_bounce",
                    "show_arrow", "show_circle")
EFFECT_TABLE = {
    "bar": ("show_box", "show_text", "change_color", "highlight", "bar_bounce", "show_arrow",
            "show_circle"),
    "line": ("show_box", "show_text", "change_color", "highlight", "show_arrow", "show_circle"),
    "pie": ("show_box", "show_text", "change_color", "highlight"),
}
# effects drawn with an overlay element that the chart does not contain
OVERLAY_EFFECTS = ("show_box", "show_text", "show_arrow", "show_circle")

HIGHLIGHT = "#ffd54f"
BOX_PADDING = 4.0
BOUNCE_PX = 6.0
ARROW_LENGTH = 24.0
CIRCLE_R = 8.0


def phase_of(effect: str) -> str:
    if effect in ENTRANCE_EFFECTS:
        return "entrance"
    if effect in EXIT_EFFECTS:
        return "exit"
    if effect in EMPHASIS_EFFECTS:
        return "emphasis"
    raise ValueError(f"unknown effect {effect!r}")


@dataclass(frozen=True)
class AnimationEntry:
    target: str
    effect: str
    word_interval: tuple[int, int]
    part: str = "insight"                       # context | insight
    time_interval: Optional[tuple[float, float]] = None
    params: dict = field(default_factory=dict, hash=False, compare=True)

    def __post_init__(self):
        s, e = self.word_interval
        if not s < e:
            raise ValueError(f"empty word interval {self.word_interval}")

    @property
    def phase(self) -> str:
        return phase_of(self.effect)

    def to_dict(self) -> dict:
        return {"target": self.target, "effect": self.effect, "phase": self.phase,
                "part": self.part, "wordInterval": list(self.word_interval),
                "timeMs": list(self.time_interval) if self.time_interval else None,
                "params": self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "AnimationEntry":
        t = d.get("timeMs")
        return cls(d["target"], d["effect"], tuple(d["wordInterval"]), d.get("part", "insight"),
                   tuple(t) if t else None, dict(d.get("params", {})))


@dataclass
class AnimationPlan:
    entries: list[AnimationEntry] = field(default_factory=list)
    annotations: list[dict] = field(default_factory=list)   # synthesized overlay elements
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries],
                "annotations": self.annotations, "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "AnimationPlan":
        d = json.loads(text)
        return cls([AnimationEntry.from_dict(e) for e in d["entries"]],
                   list(d.get("annotations", [])), list(d.get("notes", [])))


def chart_hash(raw: str) -> int:
    return int.from_bytes(hashlib.sha256(raw.encode()).digest()[:4], "little")


def _ids(chart: LabeledChart, elements) -> str:
    return ", ".join(f"#{chart.ids[e.index]}" for e in elements)


def _is_horizontal(e) -> bool:
    b = element_bbox(e)
    return b.w >= b.h


def axis_groups(chart: LabeledChart) -> dict[str, list]:
    """Elements of the x-axis, y-axis and legend groups in document order."""
    groups = {"x": [], "y": [], "legend": []}
    for e in chart.doc.elements:
        sub = chart.labels.get(e.index)
        if sub in ("x-label", "x-title"):
            groups["x"].append(e)
        elif sub in ("y-label", "y-title"):
            groups["y"].append(e)
        elif sub == "axis-line":
            groups["x" if _is_horizontal(e) else "y"].append(e)
        elif sub == "tick":
            # x ticks hang below the axis (vertical strokes), y ticks stick out sideways
            groups["y" if _is_horizontal(e) else "x"].append(e)
        elif sub in ("legend-symbol", "legend-label", "legend-title"):
            groups["legend"].append(e)
    return groups


def _find_marker(words: Sequence[str], marker: str, start: int, end: int) -> Optional[int]:
    for k in range(start, end):
        if words[k].strip(".,;:'\"").lower() == marker:
            return k
    return None


def plan_context_animations(script: NarrationScript, chart: LabeledChart,
                            notes: Optional[list] = None) -> list[AnimationEntry]:
    """Title on sentence one; axes and legend (or sectors and legend) on sentence two."""
    if len(script.context_sentences) < 2:
        raise MarkerWordMissing("context part needs two sentences")
    notes = notes if notes is not None else []
    ranges = script.sentence_word_ranges()
    offset = chart_hash(chart.doc.raw) % len(ENTRANCE_EFFECTS)
    effects = itertools.cycle(ENTRANCE_EFFECTS[offset:] + ENTRANCE_EFFECTS[:offset])
    out = []

    title = chart.elements_of("chart-title") or chart.elements_of("canvas")
    if title:
        out.append(AnimationEntry(_ids(chart, title), next(effects), ranges[0], "context"))
    else:
        notes.append("no title element; first context sentence left unanimated")

    s, e = ranges[1]
    if chart.chart_type == "pie":
        targets = chart.elements_of("sector", "legend-symbol", "legend-label", "legend-title")
        if targets:
            out.append(AnimationEntry(_ids(chart, targets), next(effects), (s, e), "context"))
        return out

    words = [w.text for w in script.words]
    groups = axis_groups(chart)
    xi = _find_marker(words, "x-axis", s, e)
    yi = _find_marker(words, "y-axis", s, e)
    li = _find_marker(words, "legend", s, e)
    if xi is None or yi is None or not xi < yi:
        n = e - s
        cuts = [s, s + n // 3, s + 2 * n // 3, e]
        notes.append(f"{MarkerWordMissing.__name__}: axis markers not found, split into thirds")
        spans = {"x": (cuts[0], cuts[1]), "y": (cuts[1], cuts[2]), "legend": (cuts[2], cuts[3])}
    else:
        y_end = li if li is not None and li > yi else e
        spans = {"x": (s, yi), "y": (yi, y_end)}
        if li is not None and li > yi:
            spans["legend"] = (li, e)
    for name in ("x", "y", "legend"):
        if name in spans and groups[name] and spans[name][0] < spans[name][1]:
            out.append(AnimationEntry(_ids(chart, groups[name]), next(effects), spans[name], "context"))
    return out


def _matches(row, p: DataPoint) -> bool:
    return row.x == p.x and row.series == p.series


def _anchor(e, sub: str, row_index: int) -> tuple[float, float]:
    b = element_bbox(e)
    if sub == "bar":
        return (b.center[0], b.y)
    if sub == "line-segment":
        pts = [p for run in e.anchors() for p in run]
        if 0 <= row_index < len(pts):
            return pts[row_index]
    return b.center


def _union(boxes: Sequence[Rect]) -> Rect:
    x0 = min(b.x for b in boxes)
    y0 = min(b.y for b in boxes)
    x1 = max(b.x2 for b in boxes)
    y1 = max(b.y2 for b in boxes)
    return Rect(x0, y0, x1 - x0, y1 - y0)


def _overlay(effect: str, anno_id: str, targets, anchors, value: Optional[float]) -> dict:
    box = _union([element_bbox(e) for e in targets]).inflate(BOX_PADDING)
    ax, ay = anchors[0]
    if effect == "show_box":
        return {"id": anno_id, "shape": "rect", "x": box.x, "y": box.y,
                "width": box.w, "height": box.h}
    if effect == "show_text":
        return {"id": anno_id, "shape": "text", "x": ax, "y": ay - 2 * BOX_PADDING,
                "text": fmt_value(value) if value is not None else ""}
    if effect == "show_arrow":
        tip = ay - BOX_PADDING
        return {"id": anno_id, "shape": "arrow", "x": ax, "y1": tip - ARROW_LENGTH, "y2": tip}
    return {"id": anno_id, "shape": "circle", "cx": ax, "cy": ay, "r": CIRCLE_R}


def plan_insight_animations(script: NarrationScript, chart: LabeledChart,
                            distilled: Sequence[Insight], rows_by_id: dict,
                            notes: Optional[list] = None,
                            annotations: Optional[list] = None) -> list[AnimationEntry]:
    """One emphasis entry per sub-insight phrase, with overlay entrance/exit pairs."""
    notes = notes if notes is not None else []
    annotations = annotations if annotations is not None else []
    kind = chart.chart_type or "bar"
    table = EFFECT_TABLE.get(kind, EFFECT_TABLE["bar"])
    offset = chart_hash(chart.doc.raw) % len(table)
    marks = chart.elements_of(*MARK_SUBS)
    out = []
    k = 0
    for ins_idx, phrase, (ws, we) in script.insight_phrases():
        ins = distilled[ins_idx]
        sub = next((s for s in ins.subs if s.sub_type == phrase.sub_type), None)
        if sub is None:
            continue
        targets, anchors = [], []
        for p in sub.relevant_data:
            for e in marks:
                rows = rows_by_id.get(chart.ids[e.index], [])
                for ri, row in enumerate(rows):
                    if _matches(row, p):
                        if e not in targets:
                            targets.append(e)
                        anchors.append(_anchor(e, chart.labels[e.index], ri))
                        break
        if not targets:
            msg = f"{NoRelevantElements.__name__}: phrase {phrase.text!r} matches no mark"
            log.warning(msg)
            notes.append(msg)
            continue
        targets.sort(key=lambda e: e.index)
        effect = table[(offset + k) % len(table)]
        k += 1
        selector = _ids(chart, targets)
        params = {"subType": phrase.sub_type}
        if effect in OVERLAY_EFFECTS:
            anno_id = f"anno-{len(annotations)}"
            annotations.append(_overlay(effect, anno_id, targets, anchors, sub.value))
            params["annotation"] = anno_id
            out.append(AnimationEntry(f"#{anno_id}", "fade_in", (ws, ws + 1), "insight"))
            out.append(AnimationEntry(selector, effect, (ws, we), "insight", params=params))
            out.append(AnimationEntry(f"#{anno_id}", "fade_out", (we - 1, we), "insight"))
        else:
            if effect == "change_color":
                params["property"] = "stroke" if kind == "line" else "fill"
            out.append(AnimationEntry(selector, effect, (ws, we), "insight", params=params))
    return out


def plan_animations(script: NarrationScript, chart: LabeledChart, labeled_svg: str,
                    distilled: Sequence[Insight]) -> AnimationPlan:
    plan = AnimationPlan()
    plan.entries += plan_context_animations(script, chart, plan.notes)
    rows = element_rows(labeled_svg)
    plan.entries += plan_insight_animations(script, chart, distilled, rows, plan.notes,
                                            plan.annotations)
    return plan


def resolve_intervals(plan: AnimationPlan, script: NarrationScript) -> AnimationPlan:
    """Fill millisecond intervals from word timings and sort entries by start."""
    if script.timings is None:
        raise MissingTimings("script has no timings")
    n = len(script.timings)
    entries = []
    for e in plan.entries:
        s, t = e.word_interval
        if not 0 <= s < t <= n:
            raise ValueError(f"word interval {e.word_interval} outside script of {n} words")
        entries.append(replace(e, time_interval=(script.timings[s][0], script.timings[t - 1][1])))
    entries.sort(key=lambda e: e.time_interval[0])
    return AnimationPlan(entries, list(plan.annotations), list(plan.notes))


# --------------------------------------------------------------------------
# rendering

def _selector_parts(selector: str) -> list[str]:
    return [p.strip() for p in selector.split(",") if p.strip()]


def resolve_selector(selector: str, ids: set, classes: dict[str, list[str]],
                     order: dict[str, int]) -> list[str]:
    """Element ids matched by a comma-separated list of ``#id`` / ``.class`` selectors."""
    found: list[str] = []
    for part in _selector_parts(selector):
        if part.startswith("#"):
            hits = [part[1:]] if part[1:] in ids else []
        elif part.startswith("."):
            hits = classes.get(part[1:], [])
        else:
            raise SelectorMiss(f"unsupported selector {part!r}")
        if not hits:
            raise SelectorMiss(f"selector {part!r} matches nothing")
        for h in hits:
            if h not in found:
                found.append(h)
    return sorted(found, key=lambda i: order.get(i, 1 << 30))


def _index(svg_text: str, annotations: Sequence[dict]):
    root = ET.fromstring(svg_text)
    ids, classes, order = set(), {}, {}
    for k, node in enumerate(root.iter()):
        i = node.get("id")
        if i is None:
            continue
        ids.add(i)
        order[i] = k
        for c in (node.get("class") or "").split():
            classes.setdefault(c, []).append(i)
    for k, a in enumerate(annotations):
        ids.add(a["id"])
        order[a["id"]] = (1 << 20) + k
        classes.setdefault("annotation", []).append(a["id"])
    return ids, classes, order


def _seconds(ms: float) -> str:
    s = f"{ms / 1000:.3f}".rstrip("0").rstrip(".")
    return f"{s}s"


def _keyframes(name: str, e: AnimationEntry) -> str:
    eff = e.effect
    if eff == "fade_in":
        body = "from { opacity: 0; } to { opacity: 1; }"
    elif eff == "wipe":
        body = "from { clip-path: inset(0 100% 0 0); } to { clip-path: inset(0 0 0 0); }"
    elif eff == "fade_out":
        body = "from { opacity: 1; } to { opacity: 0; }"
    elif eff == "change_color":
        prop = e.params.get("property", "fill")
        body = f"0%, 100% {{ }} 20%, 80% {{ {prop}: {HIGHLIGHT}; }}"
    elif eff == "highlight":
        body = f"0%, 100% {{ }} 20%, 80% {{ stroke: {HIGHLIGHT}; stroke-width: 3px; }}"
    elif eff == "bar_bounce":
        body = (f"0%, 60%, 100% {{ transform: translateY(0); }} "
                f"30% {{ transform: translateY(-{fmt_num(BOUNCE_PX)}px); }} "
                f"80% {{ transform: translateY(-{fmt_num(BOUNCE_PX / 2)}px); }}")
    else:
        # overlay effects: the overlay carries the message, the marks pulse gently
        body = "0%, 100% { opacity: 1; } 50% { opacity: 0.85; }"
    return f"@keyframes {name} {{ {body} }}"


_FILL_MODE = {"entrance": "both", "emphasis": "none", "exit": "forwards"}


def _annotation_svg(a: dict) -> str:
    common = f'id="{a["id"]}" class="annotation" opacity="0"'
    shape = a["shape"]
    if shape == "rect":
        return (f'<rect {common} x="{fmt_num(a["x"])}" y="{fmt_num(a["y"])}" '
                f'width="{fmt_num(a["width"])}" height="{fmt_num(a["height"])}" fill="none" '
                f'stroke="{HIGHLIGHT}" stroke-width="2"/>')
    if shape == "text":
        text = a["text"].replace("&", "&amp;").replace("<", "&lt;")
        return (f'<text {common} x="{fmt_num(a["x"])}" y="{fmt_num(a["y"])}" font-size="12" '
                f'text-anchor="middle" fill="#333333" stroke="{HIGHLIGHT}" stroke-width="0.5">'
                f'{text}</text>')
    if shape == "arrow":
        x, y1, y2 = a["x"], a["y1"], a["y2"]
        d = (f"M{fmt_num(x)} {fmt_num(y1)} L{fmt_num(x)} {fmt_num(y2)} "
             f"M{fmt_num(x - 5)} {fmt_num(y2 - 7)} L{fmt_num(x)} {fmt_num(y2)} "
             f"L{fmt_num(x + 5)} {fmt_num(y2 - 7)}")
        return f'<path {common} d="{d}" fill="none" stroke="{HIGHLIGHT}" stroke-width="2"/>'
    return (f'<circle {common} cx="{fmt_num(a["cx"])}" cy="{fmt_num(a["cy"])}" '
            f'r="{fmt_num(a["r"])}" fill="none" stroke="{HIGHLIGHT}" stroke-width="2"/>')


_XML_DECL_RE = re.compile(r"^\s*<\?xml[^>]*\?>\s*")
_ROOT_RE = re.compile(r"<svg\b[^>]*>")


def _with_header(text: str) -> str:
    m = _XML_DECL_RE.match(text)
    pos = m.end() if m else 0
    if text.startswith(HEADER, pos):
        return text
    return text[:pos] + HEADER + "\n" + text[pos:]


def render_animated_svg(labeled_svg: str, plan: AnimationPlan) -> str:
    """Inject a style block of keyframe animations plus any overlay elements."""
    out = _with_header(labeled_svg)
    if not plan.entries:
        return out
    ids, classes, order = _index(labeled_svg, plan.annotations)
    per_element: dict[str, list[str]] = {}
    frames = []
    for k, e in enumerate(plan.entries):
        if e.time_interval is None:
            raise MissingTimings("plan has unresolved entries")
        name = f"anim-{k}"
        frames.append(_keyframes(name, e))
        start, end = e.time_interval
        spec = (f"{name} {_seconds(end - start)} ease-in-out {_seconds(start)} "
                f"{_FILL_MODE[e.phase]}")
        for target in resolve_selector(e.target, ids, classes, order):
            per_element.setdefault(target, []).append(spec)
    rules = [f"#{t} {{ animation: {', '.join(specs)}; }}"
             for t, specs in sorted(per_element.items(), key=lambda kv: order[kv[0]])]
    style = ("<style type=\"text/css\"><![CDATA[\n" + "\n".join(frames + rules)
             + "\n]]></style>")
    m = _ROOT_RE.search(out)
    if m is None:
        raise SelectorMiss("document has no svg root element")
    out = out[:m.end()] + "\n" + style + out[m.end():]
    if plan.annotations:
        close = out.rfind("</svg>")
        overlay = "\n".join(_annotation_svg(a) for a in plan.annotations)
        out = out[:close] + overlay + "\n" + out[close:]
    return out


def validate_plan(plan: AnimationPlan, labeled_svg: str, script: NarrationScript) -> None:
    """Selectors resolve, intervals lie in the script, context precedes insight."""
    ids, classes, order = _index(labeled_svg, plan.annotations)
    n = len(script.words)
    for e in plan.entries:
        resolve_selector(e.target, ids, classes, order)
        s, t = e.word_interval
        if not 0 <= s < t <= n:
            raise ValueError(f"word interval {e.word_interval} outside script")
    ctx_end = max((e.time_interval[1] for e in plan.entries
                   if e.part == "context" and e.time_interval), default=None)
    ins_start = min((e.time_interval[0] for e in plan.entries
                     if e.part == "insight" and e.time_interval), default=None)
    if ctx_end is not None and ins_start is not None and ctx_end > ins_start:
        raise ValueError("context animations overlap the insight part")
