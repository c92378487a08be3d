import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chartrevive.dataset import ChartSpec, generate_chart
from chartrevive.errors import (ColorSyntax, EmptyGeometry, MalformedXml, MissingViewport,
                                PathSyntax, UnsupportedTransform)
from chartrevive.svg import (ArcTo, ClosePath, CubicTo, LineTo, MoveTo, PathData, QuadTo, Rect,
                             element_bbox, flatten_path, parse_color, parse_path_data, parse_svg,
                             path_arc_length, segment_point, start_tag_spans)


# ---------------------------------------------------------------- parse_svg

def test_empty_document():
    doc = parse_svg('<svg width="10" height="10"/>')
    assert doc.elements == () and doc.width == 10 and doc.height == 10


def test_viewbox_document():
    doc = parse_svg('<svg viewBox="0 0 500 400"><path d="M0 0 L10 0"/></svg>')
    assert (doc.width, doc.height) == (500, 400)
    assert len(doc.elements) == 1 and doc.elements[0].kind == "path"


def test_generator_element_count_matches_manifest():
    svg, gt = generate_chart(ChartSpec.random("bar", 7))
    doc = parse_svg(svg)
    assert len(doc.elements) == gt.meta["element_count"] == len(gt.labels)


def test_errors():
    with pytest.raises(MalformedXml):
        parse_svg("<svg")
    with pytest.raises(MissingViewport):
        parse_svg("<svg><rect width='1' height='1'/></svg>")
    with pytest.raises(UnsupportedTransform):
        parse_svg('<svg width="9" height="9"><g transform="rotate(30)"><rect width="1" height="1"/></g></svg>')


def test_group_transform_applied():
    doc = parse_svg('<svg width="100" height="100"><g transform="translate(10,20) scale(2)">'
                    '<rect x="1" y="1" width="3" height="4"/></g></svg>')
    assert element_bbox(doc.elements[0]) == Rect(12, 22, 6, 8)


def test_non_rendered_content_is_skipped_but_kept_in_raw():
    text = ('<svg width="10" height="10"><defs><linearGradient id="g"/><rect width="1" height="1"/></defs>'
            '<rect width="2" height="2" fill="url(#g)"/></svg>')
    doc = parse_svg(text)
    assert len(doc.elements) == 1
    assert doc.elements[0].fill is None
    assert doc.raw == text


def test_inherited_and_style_paint():
    doc = parse_svg('<svg width="10" height="10"><g fill="#00ff00"><rect width="1" height="1" '
                    'style="stroke: #0000ff; stroke-width: 3"/></g></svg>')
    e = doc.elements[0]
    assert e.fill == (0.0, 1.0, 0.0)
    assert e.stroke == (0.0, 0.0, 1.0)
    assert e.stroke_width == 3


def test_tag_spans_point_at_elements():
    text = '<svg width="10" height="10"><!-- <rect/> --><rect width="1" height="1"/></svg>'
    doc = parse_svg(text)
    s, e = doc.elements[0].tag_span
    assert text[s:e] == '<rect width="1" height="1"/>'
    assert len(start_tag_spans(text)) == 2


# ---------------------------------------------------------------- path data

def test_path_literal():
    p = parse_path_data("M0 0 L10 0 Z")
    assert p.subpaths == ((MoveTo((0, 0)), LineTo((0, 0), (10, 0)), ClosePath((10, 0), (0, 0))),)


def test_path_relative():
    p = parse_path_data("m5 5 l5 0")
    assert p.subpaths == ((MoveTo((5, 5)), LineTo((5, 5), (10, 5))),)


def test_path_arc_literal():
    (sp,) = parse_path_data("M0 0 A50 50 0 0 1 100 0").subpaths
    arc = sp[1]
    assert isinstance(arc, ArcTo)
    assert (arc.rx, arc.ry, arc.end, arc.large_arc, arc.sweep) == (50, 50, (100, 0), False, True)


def test_path_implicit_repetition_and_shorthands():
    p = parse_path_data("M0 0 10 0 10 10 h-10 v-10")
    segs = list(p.segments)
    assert [type(s) for s in segs] == [MoveTo, LineTo, LineTo, LineTo, LineTo]
    assert segs[-1].end == (0, 0)
    p = parse_path_data("M0 0 C0 10 10 10 10 0 S20 -10 20 0")
    s = list(p.segments)[-1]
    assert isinstance(s, CubicTo) and s.c1 == (10, -10)
    p = parse_path_data("M0 0 Q5 10 10 0 T20 0")
    s = list(p.segments)[-1]
    assert isinstance(s, QuadTo) and s.c == (15, -10)


def test_path_new_subpath_after_close():
    p = parse_path_data("M0 0 L1 0 Z L2 2")
    assert len(p.subpaths) == 2
    assert p.subpaths[1][0] == MoveTo((0, 0))


@pytest.mark.parametrize("d,offset", [("M0 0 X1 1", 5), ("M0 0 L1", 7), ("10 10", 0)])
def test_path_syntax_errors(d, offset):
    with pytest.raises(PathSyntax) as exc:
        parse_path_data(d)
    assert exc.value.offset == offset


# ---------------------------------------------------------------- bbox / length

def _el(svg_body):
    return parse_svg(f'<svg width="500" height="500">{svg_body}</svg>').elements[0]


def test_bbox_rect_identity():
    assert element_bbox(_el('<rect x="1" y="2" width="3" height="4"/>')) == Rect(1, 2, 3, 4)


def test_bbox_polyline_path():
    assert element_bbox(_el('<path d="M0 0 L10 0 L10 5"/>')) == Rect(0, 0, 10, 5)


def test_bbox_cubic_against_dense_sampling():
    e = _el('<path d="M0 0 C0 10 10 10 10 0"/>')
    seg = list(e.geometry.segments)[1]
    pts = np.array([segment_point(seg, t) for t in np.linspace(0, 1, 10_000)])
    box = element_bbox(e)
    assert box.x == pytest.approx(pts[:, 0].min(), abs=0.1)
    assert box.y == pytest.approx(pts[:, 1].min(), abs=0.1)
    assert box.x2 == pytest.approx(pts[:, 0].max(), abs=0.1)
    assert box.y2 == pytest.approx(pts[:, 1].max(), abs=0.1)
    assert box.h == pytest.approx(7.5, abs=0.1)


def test_bbox_text_estimate():
    e = _el('<text x="100" y="50" font-size="10" text-anchor="middle">abcd</text>')
    assert element_bbox(e) == Rect(88, 40, 24, 12)


def test_bbox_empty_path():
    with pytest.raises(EmptyGeometry):
        element_bbox(_el('<path d=""/>'))


def test_arc_length_examples():
    assert path_arc_length(parse_path_data("M0 0 L10 0")) == 10.0
    assert path_arc_length(parse_path_data("M0 0 A50 50 0 0 1 100 0")) == pytest.approx(
        math.pi * 50, abs=0.01)
    assert path_arc_length(PathData()) == 0.0
    assert path_arc_length(parse_path_data("")) == 0.0


def test_arc_length_against_quadrature():
    # independent oracle: trapezoid rule over a fine parameter grid
    seg = list(parse_path_data("M0 0 C0 40 60 -20 50 30").segments)[1]
    ts = np.linspace(0, 1, 200_001)
    pts = np.array([segment_point(seg, t) for t in ts[::100]])
    approx = np.sum(np.hypot(*np.diff(pts, axis=0).T))
    assert path_arc_length(parse_path_data("M0 0 C0 40 60 -20 50 30")) == pytest.approx(approx, rel=1e-4)


# ---------------------------------------------------------------- colors

def test_colors():
    assert parse_color("#ff0000") == (1.0, 0.0, 0.0)
    assert parse_color("#f00") == (1.0, 0.0, 0.0)
    assert parse_color("none") is None
    assert parse_color(None) is None
    r, g, b = parse_color("rgb(0, 128, 255)")
    assert (r, round(g, 5), b) == (0.0, 0.50196, 1.0)
    assert parse_color("teal") == (0.0, 128 / 255, 128 / 255)
    for bad in ("#12", "hsl(0,0%,0%)", "rebeccapurple"):
        with pytest.raises(ColorSyntax):
            parse_color(bad)


# ---------------------------------------------------------------- properties

coord = st.floats(-200, 200, allow_nan=False, allow_infinity=False).map(lambda v: round(v, 2))


@st.composite
def path_strings(draw):
    parts = [f"M{draw(coord)} {draw(coord)}"]
    for _ in range(draw(st.integers(1, 6))):
        kind = draw(st.sampled_from("LCQA"))
        if kind == "L":
            parts.append(f"L{draw(coord)} {draw(coord)}")
        elif kind == "C":
            parts.append("C" + " ".join(str(draw(coord)) for _ in range(6)))
        elif kind == "Q":
            parts.append("Q" + " ".join(str(draw(coord)) for _ in range(4)))
        else:
            rx, ry = draw(st.floats(1, 100)), draw(st.floats(1, 100))
            parts.append(f"A{rx:.2f} {ry:.2f} {draw(st.integers(0, 90))} {draw(st.integers(0, 1))} "
                         f"{draw(st.integers(0, 1))} {draw(coord)} {draw(coord)}")
    if draw(st.booleans()):
        parts.append("Z")
    return " ".join(parts)


@settings(max_examples=60, deadline=None)
@given(path_strings())
def test_bbox_contains_flattened_points(d):
    e = _el(f'<path d="{d}"/>')
    box = element_bbox(e).inflate(1e-6)
    for p in flatten_path(e.geometry, 0.02):
        assert box.contains(p)


@settings(max_examples=40, deadline=None)
@given(path_strings(), coord, coord)
def test_arc_length_translation_invariant(d, dx, dy):
    p = parse_path_data(d)
    moved = p.map_points(lambda x: x + dx, lambda y: y + dy, 1.0, 1.0)
    assert path_arc_length(moved) == pytest.approx(path_arc_length(p), rel=1e-3, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(path_strings(), path_strings())
def test_arc_length_additive_over_subpaths(a, b):
    whole = parse_path_data(a + " " + b)
    assert path_arc_length(whole) == pytest.approx(
        path_arc_length(parse_path_data(a)) + path_arc_length(parse_path_data(b)), rel=1e-3, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["bar", "line", "pie"]), st.integers(0, 10_000))
def test_parse_total_on_generator_output(kind, seed):
    svg, gt = generate_chart(ChartSpec.random(kind, seed))
    doc = parse_svg(svg)
    assert doc.raw == svg
    assert len(doc.elements) == len(gt.labels)
    assert [e.index for e in doc.elements] == list(range(len(doc.elements)))


@pytest.mark.parametrize("d", ["M0 0 A50 50 0 0 1 100 0", "M10 10 A30 15 30 1 0 40 20",
                               "M0 1 C0 0 1 0 0 1", "M0 0 Q50 80 100 0"])
def test_bbox_is_tight_on_curves(d):
    e = _el(f'<path d="{d}"/>')
    seg = list(e.geometry.segments)[1]
    pts = np.array([segment_point(seg, t) for t in np.linspace(0, 1, 20_001)])
    box = element_bbox(e)
    got = (box.x, box.y, box.x2, box.y2)
    want = (pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max())
    assert got == pytest.approx(want, abs=1e-4)
