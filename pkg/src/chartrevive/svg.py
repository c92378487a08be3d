"""SVG document model: parsing, path data, colors, bounding boxes and arc lengths.

Only presentation attributes (plus a flat ``style`` declaration list) are read;
there is no CSS cascade.  Group transforms are restricted to axis-aligned
scale/translate, which is all that chart generators emit.
"""

from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import (
    ColorSyntax,
    EmptyGeometry,
    MalformedXml,
    MissingViewport,
    PathSyntax,
    UnsupportedTransform,
)

Point = tuple[float, float]
RGB = tuple[float, float, float]

ELEMENT_KINDS = ("path", "line", "rect", "circle", "ellipse", "polyline", "polygon", "text")

FLATNESS = 0.1
LENGTH_RTOL = 1e-4

BASIC_COLORS = {
    "black": (0, 0, 0),
    "silver": (192, 192, 192),
    "gray": (128, 128, 128),
    "white": (255, 255, 255),
    "maroon": (128, 0, 0),
    "red": (255, 0, 0),
    "purple": (128, 0, 128),
    "fuchsia": (255, 0, 255),
    "green": (0, 128, 0),
    "lime": (0, 255, 0),
    "olive": (128, 128, 0),
    "yellow": (255, 255, 0),
    "navy": (0, 0, 128),
    "blue": (0, 0, 255),
    "teal": (0, 128, 128),
    "aqua": (0, 255, 255),
}

# Containers whose children are never rendered directly.
_NON_RENDERED = {"defs", "clipPath", "mask", "pattern", "marker", "symbol",
                 "linearGradient", "radialGradient", "filter", "title", "desc",
                 "metadata", "style", "script"}


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ValueError(f"negative rect size {self.w}x{self.h}")

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def center(self) -> Point:
        return (self.x + self.w / 2, self.y + self.h / 2)

    @property
    def area(self) -> float:
        return self.w * self.h

    @classmethod
    def from_points(cls, pts) -> "Rect":
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return cls(min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys))

    def inflate(self, d: float) -> "Rect":
        return Rect(self.x - d, self.y - d, self.w + 2 * d, self.h + 2 * d)

    def contains(self, p: Point, eps: float = 1e-9) -> bool:
        return (self.x - eps <= p[0] <= self.x2 + eps
                and self.y - eps <= p[1] <= self.y2 + eps)


# --------------------------------------------------------------------------
# path segments

@dataclass(frozen=True)
class MoveTo:
    end: Point


@dataclass(frozen=True)
class LineTo:
    start: Point
    end: Point


@dataclass(frozen=True)
class CubicTo:
    start: Point
    c1: Point
    c2: Point
    end: Point


@dataclass(frozen=True)
class QuadTo:
    start: Point
    c: Point
    end: Point


@dataclass(frozen=True)
class ArcTo:
    start: Point
    rx: float
    ry: float
    rotation: float
    large_arc: bool
    sweep: bool
    end: Point


@dataclass(frozen=True)
class ClosePath:
    start: Point
    end: Point


Segment = Union[MoveTo, LineTo, CubicTo, QuadTo, ArcTo, ClosePath]


@dataclass(frozen=True)
class PathData:
    subpaths: tuple[tuple[Segment, ...], ...] = ()

    @property
    def segments(self) -> Iterator[Segment]:
        for sp in self.subpaths:
            yield from sp

    def is_empty(self) -> bool:
        return not any(self.subpaths)

    def map_points(self, fx, fy, sx: float, sy: float) -> "PathData":
        """Apply the axis-aligned map ``(x, y) -> (fx(x), fy(y))`` with scale ``sx, sy``."""
        def mp(p):
            return (fx(p[0]), fy(p[1]))

        out = []
        for sp in self.subpaths:
            segs = []
            for s in sp:
                if isinstance(s, MoveTo):
                    segs.append(MoveTo(mp(s.end)))
                elif isinstance(s, LineTo):
                    segs.append(LineTo(mp(s.start), mp(s.end)))
                elif isinstance(s, CubicTo):
                    segs.append(CubicTo(mp(s.start), mp(s.c1), mp(s.c2), mp(s.end)))
                elif isinstance(s, QuadTo):
                    segs.append(QuadTo(mp(s.start), mp(s.c), mp(s.end)))
                elif isinstance(s, ArcTo):
                    sweep = s.sweep if sx * sy > 0 else not s.sweep
                    segs.append(ArcTo(mp(s.start), s.rx * abs(sx), s.ry * abs(sy),
                                      s.rotation, s.large_arc, sweep, mp(s.end)))
                else:
                    segs.append(ClosePath(mp(s.start), mp(s.end)))
            out.append(tuple(segs))
        return PathData(tuple(out))


_PATH_ARITY = {"M": 2, "L": 2, "H": 1, "V": 1, "C": 6, "S": 4, "Q": 4, "T": 2, "A": 7, "Z": 0}
_NUM_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_WS = " \t\r\n,"


def parse_path_data(d: str) -> PathData:
    """Parse an SVG ``d`` attribute into absolute segments."""
    pos = 0
    n = len(d)

    def skip_ws():
        nonlocal pos
        while pos < n and d[pos] in _WS:
            pos += 1

    def read_number():
        nonlocal pos
        skip_ws()
        m = _NUM_RE.match(d, pos)
        if not m:
            raise PathSyntax("expected number", pos)
        pos = m.end()
        return float(m.group())

    def read_flag():
        nonlocal pos
        skip_ws()
        if pos < n and d[pos] in "01":
            pos += 1
            return d[pos - 1] == "1"
        raise PathSyntax("expected arc flag", pos)

    def at_number():
        skip_ws()
        return pos < n and (d[pos].isdigit() or d[pos] in "+-.")

    subpaths: list[tuple[Segment, ...]] = []
    current: list[Segment] = []
    cur = (0.0, 0.0)
    start = (0.0, 0.0)
    last_ctrl: Optional[Point] = None
    last_cmd = ""

    def flush():
        if current:
            subpaths.append(tuple(current))
            current.clear()

    skip_ws()
    cmd = None
    while True:
        skip_ws()
        if pos >= n:
            break
        ch = d[pos]
        if ch.isalpha():
            if ch.upper() not in _PATH_ARITY:
                raise PathSyntax(f"unknown command {ch!r}", pos)
            cmd = ch
            cmd_pos = pos
            pos += 1
        elif cmd is None:
            raise PathSyntax("path must start with a command", pos)
        elif cmd in "Zz":
            raise PathSyntax("numbers after closepath", pos)
        else:
            # implicit repetition; a repeated moveto becomes lineto
            if cmd == "M":
                cmd = "L"
            elif cmd == "m":
                cmd = "l"
            cmd_pos = pos

        up = cmd.upper()
        rel = cmd.islower()
        if not current and up not in "MZ":
            if last_cmd == "Z":
                # drawing command after Z starts a new subpath at the old start
                current.append(MoveTo(start))
            else:
                raise PathSyntax("path must start with moveto", cmd_pos)

        if up == "Z":
            if current:
                current.append(ClosePath(cur, start))
                flush()
            cur = start
            last_ctrl = None
            last_cmd = "Z"
            continue

        if not at_number():
            raise PathSyntax(f"command {cmd!r} expects {_PATH_ARITY[up]} arguments", pos)

        ox, oy = cur if rel else (0.0, 0.0)
        try:
            if up == "M":
                x, y = read_number() + ox, read_number() + oy
                flush()
                current.append(MoveTo((x, y)))
                cur = start = (x, y)
                last_ctrl = None
            elif up == "L":
                p = (read_number() + ox, read_number() + oy)
                current.append(LineTo(cur, p))
                cur = p
                last_ctrl = None
            elif up == "H":
                p = (read_number() + ox, cur[1])
                current.append(LineTo(cur, p))
                cur = p
                last_ctrl = None
            elif up == "V":
                p = (cur[0], read_number() + (cur[1] if rel else 0.0))
                current.append(LineTo(cur, p))
                cur = p
                last_ctrl = None
            elif up == "C":
                c1 = (read_number() + ox, read_number() + oy)
                c2 = (read_number() + ox, read_number() + oy)
                p = (read_number() + ox, read_number() + oy)
                current.append(CubicTo(cur, c1, c2, p))
                last_ctrl = c2
                cur = p
            elif up == "S":
                if last_cmd in "CS" and last_ctrl is not None:
                    c1 = (2 * cur[0] - last_ctrl[0], 2 * cur[1] - last_ctrl[1])
                else:
                    c1 = cur
                c2 = (read_number() + ox, read_number() + oy)
                p = (read_number() + ox, read_number() + oy)
                current.append(CubicTo(cur, c1, c2, p))
                last_ctrl = c2
                cur = p
            elif up == "Q":
                c = (read_number() + ox, read_number() + oy)
                p = (read_number() + ox, read_number() + oy)
                current.append(QuadTo(cur, c, p))
                last_ctrl = c
                cur = p
            elif up == "T":
                if last_cmd in "QT" and last_ctrl is not None:
                    c = (2 * cur[0] - last_ctrl[0], 2 * cur[1] - last_ctrl[1])
                else:
                    c = cur
                p = (read_number() + ox, read_number() + oy)
                current.append(QuadTo(cur, c, p))
                last_ctrl = c
                cur = p
            elif up == "A":
                rx, ry = abs(read_number()), abs(read_number())
                rot = read_number()
                large, sweep = read_flag(), read_flag()
                p = (read_number() + ox, read_number() + oy)
                current.append(ArcTo(cur, rx, ry, rot, large, sweep, p))
                cur = p
                last_ctrl = None
        except PathSyntax as exc:
            raise PathSyntax(f"command {cmd!r} expects {_PATH_ARITY[up]} arguments", exc.offset) from None
        last_cmd = up
    flush()
    return PathData(tuple(subpaths))


# --------------------------------------------------------------------------
# segment geometry

def _lerp(a: Point, b: Point, t: float) -> Point:
    return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)


def _arc_center(s: ArcTo):
    """Endpoint to center parameterisation; returns None for a degenerate arc."""
    x1, y1 = s.start
    x2, y2 = s.end
    rx, ry = s.rx, s.ry
    if rx == 0 or ry == 0 or (x1 == x2 and y1 == y2):
        return None
    phi = math.radians(s.rotation)
    cp, sp = math.cos(phi), math.sin(phi)
    dx, dy = (x1 - x2) / 2, (y1 - y2) / 2
    x1p = cp * dx + sp * dy
    y1p = -sp * dx + cp * dy
    lam = (x1p / rx) ** 2 + (y1p / ry) ** 2
    if lam > 1:
        k = math.sqrt(lam)
        rx, ry = rx * k, ry * k
    num = rx * rx * ry * ry - rx * rx * y1p * y1p - ry * ry * x1p * x1p
    den = rx * rx * y1p * y1p + ry * ry * x1p * x1p
    coef = math.sqrt(max(0.0, num / den)) if den else 0.0
    if s.large_arc == s.sweep:
        coef = -coef
    cxp = coef * rx * y1p / ry
    cyp = -coef * ry * x1p / rx
    cx = cp * cxp - sp * cyp + (x1 + x2) / 2
    cy = sp * cxp + cp * cyp + (y1 + y2) / 2

    def ang(ux, uy, vx, vy):
        return math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)

    th1 = ang(1, 0, (x1p - cxp) / rx, (y1p - cyp) / ry)
    dth = ang((x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry)
    if not s.sweep and dth > 0:
        dth -= 2 * math.pi
    elif s.sweep and dth < 0:
        dth += 2 * math.pi
    return cx, cy, rx, ry, phi, th1, dth


def segment_point(s: Segment, t: float) -> Point:
    """Point at parameter ``t`` in [0, 1] along a drawing segment."""
    if isinstance(s, (LineTo, ClosePath)):
        return _lerp(s.start, s.end, t)
    if isinstance(s, CubicTo):
        mt = 1 - t
        a, b, c, e = mt ** 3, 3 * mt * mt * t, 3 * mt * t * t, t ** 3
        return (a * s.start[0] + b * s.c1[0] + c * s.c2[0] + e * s.end[0],
                a * s.start[1] + b * s.c1[1] + c * s.c2[1] + e * s.end[1])
    if isinstance(s, QuadTo):
        mt = 1 - t
        a, b, c = mt * mt, 2 * mt * t, t * t
        return (a * s.start[0] + b * s.c[0] + c * s.end[0],
                a * s.start[1] + b * s.c[1] + c * s.end[1])
    if isinstance(s, ArcTo):
        geo = _arc_center(s)
        if geo is None:
            return _lerp(s.start, s.end, t)
        cx, cy, rx, ry, phi, th1, dth = geo
        th = th1 + dth * t
        ct, st = math.cos(th), math.sin(th)
        return (cx + rx * ct * math.cos(phi) - ry * st * math.sin(phi),
                cy + rx * ct * math.sin(phi) + ry * st * math.cos(phi))
    return s.end


def _dist(a: Point, b: Point) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def segment_length(s: Segment, rtol: float = LENGTH_RTOL) -> float:
    if isinstance(s, MoveTo):
        return 0.0
    if isinstance(s, (LineTo, ClosePath)):
        return _dist(s.start, s.end)
    if isinstance(s, ArcTo) and _arc_center(s) is None:
        return _dist(s.start, s.end)

    def rec(t0, p0, t1, p1, whole, depth):
        tm = (t0 + t1) / 2
        pm = segment_point(s, tm)
        left, right = _dist(p0, pm), _dist(pm, p1)
        halves = left + right
        if depth >= 4 and (abs(halves - whole) <= rtol * halves or depth > 40):
            # chord sums converge as O(h^2); one Richardson step
            return halves + (halves - whole) / 3
        return rec(t0, p0, tm, pm, left, depth + 1) + rec(tm, pm, t1, p1, right, depth + 1)

    p0, p1 = segment_point(s, 0.0), segment_point(s, 1.0)
    return rec(0.0, p0, 1.0, p1, _dist(p0, p1), 0)


def path_arc_length(p: PathData) -> float:
    """Total length of all drawing segments (moves contribute nothing)."""
    return sum(segment_length(s) for s in p.segments)


def flatten_segment(s: Segment, tol: float = FLATNESS) -> list[Point]:
    """Adaptive polyline through the segment, endpoints included."""
    if isinstance(s, MoveTo):
        return [s.end]
    if isinstance(s, (LineTo, ClosePath)):
        return [s.start, s.end]

    pts = [segment_point(s, 0.0)]

    def rec(t0, p0, t1, p1, depth):
        tm = (t0 + t1) / 2
        pm = segment_point(s, tm)
        # deviation of the midpoint from the chord, checked at quarter points too
        q1 = segment_point(s, (t0 + tm) / 2)
        q3 = segment_point(s, (tm + t1) / 2)
        dev = max(_point_line_dist(pm, p0, p1), _point_line_dist(q1, p0, p1),
                  _point_line_dist(q3, p0, p1))
        if depth >= 2 and (dev <= tol or depth > 24):
            pts.append(pm)
            pts.append(p1)
            return
        rec(t0, p0, tm, pm, depth + 1)
        rec(tm, pm, t1, p1, depth + 1)

    rec(0.0, pts[0], 1.0, segment_point(s, 1.0), 0)
    return pts


def _quad_roots(a: float, b: float, c: float) -> list[float]:
    if abs(a) < 1e-12:
        return [-c / b] if abs(b) > 1e-12 else []
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    r = math.sqrt(disc)
    return [(-b - r) / (2 * a), (-b + r) / (2 * a)]


def _extremum_params(s: Segment) -> list[float]:
    """Curve parameters in (0, 1) where x or y is stationary."""
    ts: list[float] = []
    if isinstance(s, CubicTo):
        for k in (0, 1):
            p0, p1, p2, p3 = s.start[k], s.c1[k], s.c2[k], s.end[k]
            # derivative / 3 = a t^2 + b t + c
            ts += _quad_roots(-p0 + 3 * p1 - 3 * p2 + p3, 2 * (p0 - 2 * p1 + p2), p1 - p0)
    elif isinstance(s, QuadTo):
        for k in (0, 1):
            den = s.start[k] - 2 * s.c[k] + s.end[k]
            if abs(den) > 1e-12:
                ts.append((s.start[k] - s.c[k]) / den)
    elif isinstance(s, ArcTo):
        geo = _arc_center(s)
        if geo is None or geo[6] == 0:
            return []
        _, _, rx, ry, phi, th1, dth = geo
        base = (math.atan2(-ry * math.sin(phi), rx * math.cos(phi)),
                math.atan2(ry * math.cos(phi), rx * math.sin(phi)))
        for b in base:
            for k in range(-3, 4):
                ts.append((b + k * math.pi - th1) / dth)
    return [t for t in ts if 0 < t < 1]


def _point_line_dist(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    L = math.hypot(dx, dy)
    if L == 0:
        return _dist(p, a)
    return abs(dx * (a[1] - p[1]) - dy * (a[0] - p[0])) / L


def flatten_path(p: PathData, tol: float = FLATNESS) -> list[Point]:
    out: list[Point] = []
    for s in p.segments:
        out.extend(flatten_segment(s, tol))
    return out


# --------------------------------------------------------------------------
# colors

_HEX_RE = re.compile(r"#([0-9a-fA-F]{3}|[0-9a-fA-F]{6})")
_RGB_RE = re.compile(r"rgb\(\s*(\d{1,3})\s*,\s*(\d{1,3})\s*,\s*(\d{1,3})\s*\)")


def parse_color(s: Optional[str]) -> Optional[RGB]:
    """Parse ``#rgb``, ``#rrggbb``, ``rgb(r,g,b)`` or a basic CSS keyword."""
    if s is None:
        return None
    s = s.strip()
    if s == "" or s.lower() == "none":
        return None
    m = _HEX_RE.fullmatch(s)
    if m:
        h = m.group(1)
        if len(h) == 3:
            h = "".join(c * 2 for c in h)
        return tuple(int(h[i:i + 2], 16) / 255.0 for i in (0, 2, 4))  # type: ignore[return-value]
    m = _RGB_RE.fullmatch(s)
    if m:
        vals = [int(g) for g in m.groups()]
        if any(v > 255 for v in vals):
            raise ColorSyntax(f"rgb component out of range in {s!r}")
        return tuple(v / 255.0 for v in vals)  # type: ignore[return-value]
    kw = BASIC_COLORS.get(s.lower())
    if kw is not None:
        return tuple(v / 255.0 for v in kw)  # type: ignore[return-value]
    raise ColorSyntax(f"unsupported color {s!r}")


def color_hex(c: RGB) -> str:
    return "#" + "".join(f"{round(v * 255):02x}" for v in c)


# --------------------------------------------------------------------------
# document model

@dataclass(frozen=True)
class TextGeom:
    x: float
    y: float
    content: str
    font_size: float
    anchor: str = "start"


@dataclass(frozen=True)
class EllipseGeom:
    cx: float
    cy: float
    rx: float
    ry: float


Geometry = Union[PathData, tuple, Rect, EllipseGeom, TextGeom]


@dataclass(frozen=True)
class SvgElement:
    index: int
    kind: str
    geometry: Geometry
    fill: Optional[RGB] = None
    stroke: Optional[RGB] = None
    stroke_width: float = 0.0
    id_attr: Optional[str] = None
    class_attr: Optional[str] = None
    tag_span: tuple[int, int] = (0, 0)

    @property
    def text(self) -> str:
        return self.geometry.content if isinstance(self.geometry, TextGeom) else ""

    def anchors(self) -> list[list[Point]]:
        """Anchor points grouped by connected run (subpath / polyline)."""
        g = self.geometry
        if self.kind == "path":
            return [[s.end for s in sp if not isinstance(s, ClosePath)] for sp in g.subpaths]
        if self.kind in ("line", "polyline", "polygon"):
            return [list(g)]
        if self.kind == "rect":
            return [[(g.x, g.y), (g.x2, g.y2)]]
        if self.kind in ("circle", "ellipse"):
            return [[(g.cx - g.rx, g.cy), (g.cx + g.rx, g.cy)]]
        r = element_bbox(self)
        return [[(r.x, r.y), (r.x2, r.y), (r.x2, r.y2), (r.x, r.y2)]]


@dataclass(frozen=True)
class SvgDocument:
    width: float
    height: float
    elements: tuple[SvgElement, ...]
    raw: str
    origin: Point = (0.0, 0.0)

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise MissingViewport("viewport must have positive size")


def element_bbox(e: SvgElement) -> Rect:
    """Tight geometric box (stroke width not included)."""
    g = e.geometry
    if e.kind == "path":
        if g.is_empty():
            raise EmptyGeometry(f"path element {e.index} has no segments")
        pts = flatten_path(g)
        for seg in g.segments:
            pts.extend(segment_point(seg, t) for t in _extremum_params(seg))
        return Rect.from_points(pts)
    if e.kind in ("line", "polyline", "polygon"):
        if not g:
            raise EmptyGeometry(f"{e.kind} element {e.index} has no points")
        return Rect.from_points(g)
    if e.kind == "rect":
        return g
    if e.kind in ("circle", "ellipse"):
        return Rect(g.cx - g.rx, g.cy - g.ry, 2 * g.rx, 2 * g.ry)
    # text: font-free estimate
    w = 0.6 * g.font_size * len(g.content)
    h = 1.2 * g.font_size
    if g.anchor == "middle":
        x0 = g.x - w / 2
    elif g.anchor == "end":
        x0 = g.x - w
    else:
        x0 = g.x
    return Rect(x0, g.y - g.font_size, w, h)


def visual_bbox(e: SvgElement) -> Rect:
    """Geometric box grown by half the stroke width (what is actually painted)."""
    r = element_bbox(e)
    if e.stroke is not None and e.stroke_width > 0 and e.kind != "text":
        return r.inflate(e.stroke_width / 2)
    return r


# --------------------------------------------------------------------------
# parsing

_TAG_RE = re.compile(
    r"<!--.*?-->|<!\[CDATA\[.*?\]\]>|<\?.*?\?>|<!DOCTYPE(?:[^\[>]|\[[^\]]*\])*>"
    r"|</[^>]*>"
    r"|<([A-Za-z_][\w:.\-]*)(?:\s+[^\s=/>]+\s*=\s*(?:\"[^\"]*\"|'[^']*'))*\s*/?>",
    re.S,
)


def start_tag_spans(raw: str) -> list[tuple[int, int]]:
    """Byte spans of every start tag, in document order."""
    return [m.span() for m in _TAG_RE.finditer(raw) if m.group(1)]


_TRANSFORM_RE = re.compile(r"([a-zA-Z]+)\s*\(([^)]*)\)")


def parse_transform(s: Optional[str]) -> tuple[float, float, float, float]:
    """Return ``(a, d, e, f)`` for the map ``x' = a*x + e``, ``y' = d*y + f``."""
    a, d, e, f = 1.0, 1.0, 0.0, 0.0
    if not s:
        return a, d, e, f
    pos = 0
    for m in _TRANSFORM_RE.finditer(s):
        if s[pos:m.start()].strip(" ,\t\n"):
            raise UnsupportedTransform(f"cannot parse transform {s!r}")
        pos = m.end()
        name = m.group(1)
        args = [float(v) for v in re.split(r"[\s,]+", m.group(2).strip()) if v]
        if name == "translate" and len(args) in (1, 2):
            ta, td, te, tf = 1.0, 1.0, args[0], args[1] if len(args) > 1 else 0.0
        elif name == "scale" and len(args) in (1, 2):
            ta, td, te, tf = args[0], args[1] if len(args) > 1 else args[0], 0.0, 0.0
        elif name == "matrix" and len(args) == 6:
            if args[1] != 0 or args[2] != 0:
                raise UnsupportedTransform(f"skew/rotation matrix in {s!r}")
            ta, td, te, tf = args[0], args[3], args[4], args[5]
        elif name in ("rotate", "skewX", "skewY"):
            raise UnsupportedTransform(f"{name} transforms are not supported")
        else:
            raise UnsupportedTransform(f"cannot parse transform {s!r}")
        # compose current ∘ new
        a, d, e, f = a * ta, d * td, a * te + e, d * tf + f
    if s[pos:].strip(" ,\t\n"):
        raise UnsupportedTransform(f"cannot parse transform {s!r}")
    return a, d, e, f


def _num(s: Optional[str], default: float = 0.0) -> float:
    if s is None:
        return default
    s = s.strip()
    for unit in ("px", "pt"):
        if s.endswith(unit):
            s = s[: -len(unit)]
    try:
        return float(s)
    except ValueError:
        return default


def _local(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


_INHERITED = ("fill", "stroke", "stroke-width", "font-size", "text-anchor")


def _style_attrs(node) -> dict:
    attrs = {}
    style = node.get("style")
    if style:
        for decl in style.split(";"):
            if ":" in decl:
                k, v = decl.split(":", 1)
                attrs[k.strip()] = v.strip()
    for k in _INHERITED:
        if node.get(k) is not None:
            attrs.setdefault(k, node.get(k))
    return attrs


def _paint(s: Optional[str]) -> Optional[RGB]:
    if s is not None and s.strip().startswith("url("):
        return None  # gradients/patterns are outside the model
    return parse_color(s)


def _points(s: Optional[str]) -> list[Point]:
    vals = [float(v) for v in re.split(r"[\s,]+", (s or "").strip()) if v]
    return [(vals[i], vals[i + 1]) for i in range(0, len(vals) - 1, 2)]


def parse_svg(text: str) -> SvgDocument:
    """Parse SVG text into a flat list of drawable elements in document order."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from None
    if _local(root.tag) != "svg":
        raise MalformedXml(f"root element is {_local(root.tag)!r}, not svg")

    vb = root.get("viewBox")
    origin = (0.0, 0.0)
    if vb:
        parts = [float(v) for v in re.split(r"[\s,]+", vb.strip()) if v]
        if len(parts) != 4:
            raise MissingViewport(f"bad viewBox {vb!r}")
        origin = (parts[0], parts[1])
        width, height = parts[2], parts[3]
    elif root.get("width") is not None and root.get("height") is not None:
        width, height = _num(root.get("width")), _num(root.get("height"))
    else:
        raise MissingViewport("svg has neither viewBox nor width/height")
    if width <= 0 or height <= 0:
        raise MissingViewport("viewport must have positive size")

    spans = start_tag_spans(text)
    order = {id(node): i for i, node in enumerate(root.iter())}
    if len(spans) != len(order):
        raise MalformedXml("could not align start tags with parsed elements")

    elements: list[SvgElement] = []

    def visit(node, tf, inherited):
        name = _local(node.tag)
        if name in _NON_RENDERED:
            return
        local_tf = parse_transform(node.get("transform"))
        a = tf[0] * local_tf[0]
        d = tf[1] * local_tf[1]
        e = tf[0] * local_tf[2] + tf[2]
        f = tf[1] * local_tf[3] + tf[3]
        attrs = dict(inherited)
        attrs.update(_style_attrs(node))
        if name in ELEMENT_KINDS:
            el = _make_element(name, node, (a, d, e, f), attrs, len(elements),
                               spans[order[id(node)]])
            if el is not None:
                elements.append(el)
            if name == "text":
                return
        for child in node:
            visit(child, (a, d, e, f), attrs)

    visit(root, (1.0, 1.0, 0.0, 0.0), {})
    return SvgDocument(width, height, tuple(elements), text, origin)


def _make_element(name, node, tf, attrs, index, span) -> Optional[SvgElement]:
    a, d, e, f = tf

    def X(x):
        return a * x + e

    def Y(y):
        return d * y + f

    g = node.get
    if name == "path":
        geom = parse_path_data(g("d") or "").map_points(X, Y, a, d)
    elif name == "line":
        geom = ((X(_num(g("x1"))), Y(_num(g("y1")))), (X(_num(g("x2"))), Y(_num(g("y2")))))
    elif name in ("polyline", "polygon"):
        geom = tuple((X(x), Y(y)) for x, y in _points(g("points")))
    elif name == "rect":
        x0, y0 = X(_num(g("x"))), Y(_num(g("y")))
        x1 = X(_num(g("x")) + _num(g("width")))
        y1 = Y(_num(g("y")) + _num(g("height")))
        geom = Rect(min(x0, x1), min(y0, y1), abs(x1 - x0), abs(y1 - y0))
    elif name == "circle":
        r = _num(g("r"))
        geom = EllipseGeom(X(_num(g("cx"))), Y(_num(g("cy"))), abs(a) * r, abs(d) * r)
    elif name == "ellipse":
        geom = EllipseGeom(X(_num(g("cx"))), Y(_num(g("cy"))),
                           abs(a) * _num(g("rx")), abs(d) * _num(g("ry")))
    else:
        content = " ".join("".join(node.itertext()).split())
        fs = _num(attrs.get("font-size"), 16.0) * abs(d)
        geom = TextGeom(X(_num(g("x"))), Y(_num(g("y"))), content, fs,
                        attrs.get("text-anchor", "start"))

    fill = _paint(attrs.get("fill"))
    stroke = _paint(attrs.get("stroke"))
    sw_attr = attrs.get("stroke-width")
    if sw_attr is not None:
        sw = max(0.0, _num(sw_attr)) * math.sqrt(abs(a * d))
    else:
        sw = math.sqrt(abs(a * d)) if stroke is not None else 0.0
    return SvgElement(index, name, geom, fill, stroke, sw, g("id"), g("class"), span)
