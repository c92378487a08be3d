import json
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chartrevive.dataset import ChartSpec, Style, generate_chart
from chartrevive.errors import IdCollision, InsufficientAxis, MalformedAcData, UnparsableLabel
from chartrevive.model import LabeledChart
from chartrevive.recovery import (chart_from_labeled_svg, element_rows, emit_labeled_svg,
                                  match_legend, pair_legend, parse_ac_data, parse_number,
                                  recover_data, strip_labels)
from chartrevive.svg import parse_svg
from helpers import oracle_chart, recovery_round_trip


def _chart(body, labels, w=400, h=400):
    return LabeledChart(parse_svg(f'<svg width="{w}" height="{h}">{body}</svg>'), labels)


def test_parse_number():
    assert parse_number("1,200") == 1200
    assert parse_number("35%") == 35
    assert parse_number("2.5k") == 2500
    assert parse_number("$1M") == 1e6
    assert parse_number("−4") == -4
    with pytest.raises(UnparsableLabel):
        parse_number("Jan")


def test_pair_legend_nearest_top_left():
    c = _chart('<rect x="10" y="10" width="8" height="8"/>'
               '<text x="30" y="20" font-size="10">A</text>'
               '<text x="10" y="90" font-size="10">B</text>',
               {0: "legend-symbol", 1: "legend-label", 2: "legend-label"})
    assert pair_legend(c) == {0: 1}


def test_match_legend_by_color_and_tie_break():
    body = ('<rect x="10" y="10" width="8" height="8" fill="#ff0000"/>'
            '<text x="30" y="20" font-size="10">Red</text>'
            '<rect x="10" y="40" width="8" height="8" fill="#00ff00"/>'
            '<text x="30" y="50" font-size="10">Green</text>'
            '<rect x="100" y="100" width="20" height="50" fill="#ff0000"/>')
    labels = {0: "legend-symbol", 1: "legend-label", 2: "legend-symbol", 3: "legend-label", 4: "bar"}
    assert match_legend(_chart(body, labels)) == {4: "Red"}
    same = body.replace("#00ff00", "#ff0000")
    assert match_legend(_chart(same, labels)) == {4: "Red"}  # smaller element index wins


def test_pie_semicircle_and_quarters():
    body = ('<path d="M100 100 L50 100 A50 50 0 0 1 150 100 Z"/>'
            '<path d="M100 100 L150 100 A50 50 0 0 1 100 150 Z"/>'
            '<path d="M100 100 L100 150 A50 50 0 0 1 50 100 Z"/>')
    t = recover_data(_chart(body, {0: "sector", 1: "sector", 2: "sector"}))
    assert [r.y for r in t.rows] == pytest.approx([50, 25, 25], abs=0.1)
    assert t.dims == 2 and t.field_names == ["None", "None"]


def test_axis_interpolation():
    # y-label centres sit 0.4 font-size above the baseline
    body = ('<text x="20" y="304" font-size="10">0</text>'
            '<text x="20" y="104" font-size="10">100</text>'
            '<rect x="40" y="200" width="20" height="100"/>'
            '<text x="50" y="330" font-size="10" text-anchor="middle">A</text>')
    t = recover_data(_chart(body, {0: "y-label", 1: "y-label", 2: "bar", 3: "x-label"}))
    assert [(r.x, r.y) for r in t.rows] == [("A", pytest.approx(50))]


def test_axis_errors():
    bar = '<rect x="40" y="200" width="20" height="100"/>'
    with pytest.raises(InsufficientAxis):
        recover_data(_chart(bar + '<text x="20" y="304" font-size="10">0</text>', {0: "bar", 1: "y-label"}))
    with pytest.raises(UnparsableLabel):
        recover_data(_chart(bar + '<text x="20" y="304" font-size="10">low</text>'
                                  '<text x="20" y="104" font-size="10">high</text>',
                            {0: "bar", 1: "y-label", 2: "y-label"}))


def test_generator_bar_values():
    spec = ChartSpec("bar", categories=["A", "B", "C"], series=["s"], values=[[10.0, 20.0, 40.0]])
    svg, gt = generate_chart(spec)
    t = recover_data(LabeledChart(parse_svg(svg), gt.labels))
    lo, hi = gt.meta["y_domain"]
    assert [r.x for r in t.rows] == ["A", "B", "C"]
    for r, want in zip(t.rows, (10, 20, 40)):
        assert abs(r.y - want) <= 0.02 * (hi - lo)


def test_line_marks_get_none_fields_and_ids():
    spec = ChartSpec("line", categories=list("ABCDE"), series=["s"], values=[[1.0, 3, 2, 5, 4]],
                     style=Style(axis_titles=False, title=False))
    svg, gt = generate_chart(spec)
    chart = LabeledChart(parse_svg(svg), gt.labels)
    labeled = emit_labeled_svg(chart, recover_data(chart))
    m = re.search(r'class="mark line-segment" id="([^"]+)" ac-data="([^"]+)"', labeled)
    assert m.group(1) == "line-segment-0"
    rec = json.loads(m.group(2).replace("&quot;", '"'))
    assert rec["fields"] == ["None", "None"]
    assert len(rec["values"]) == 5  # one row per vertex of the polyline
    assert strip_labels(labeled) == svg


def test_ac_data_round_trip_and_errors():
    svg, gt, chart = oracle_chart("bar", 5)
    table = recover_data(chart)
    labeled = emit_labeled_svg(chart, table)
    back = parse_ac_data(labeled)
    assert back == table
    with pytest.raises(MalformedAcData):
        parse_ac_data(svg)
    hand = ('<svg xmlns="http://www.w3.org/2000/svg" width="9" height="9">'
            '<rect width="1" height="1" id="bar-0" '
            'ac-data=\'{"fields": ["Month", "Sales", "Region"], "values": ["Jan", 4, "North"]}\'/></svg>')
    t = parse_ac_data(hand)
    assert t.dims == 3 and t.rows[0].x == "Jan" and t.rows[0].series == "North"
    assert element_rows(hand)["bar-0"][0].y == 4.0
    with pytest.raises(MalformedAcData):
        parse_ac_data(hand.replace('"Jan", 4, "North"', '"Jan", 4'))


def test_id_collision():
    svg, gt = generate_chart(ChartSpec.random("bar", 2))
    clash = svg.replace("<svg ", '<svg id="bar-0" ', 1)
    chart = LabeledChart(parse_svg(clash), gt.labels)
    with pytest.raises(IdCollision):
        emit_labeled_svg(chart, recover_data(chart))


def test_labeled_svg_reloads():
    svg, gt, chart = oracle_chart("pie", 9)
    labeled = emit_labeled_svg(chart, recover_data(chart))
    again = chart_from_labeled_svg(labeled)
    assert again.labels == gt.labels
    assert again.ids == chart.ids


def test_round_trip_sample():
    bar = recovery_round_trip("bar", range(20))
    line = recovery_round_trip("line", range(20))
    pie = recovery_round_trip("pie", range(20))
    for r in (bar, line, pie):
        assert not r.key_mismatch and not r.strip_failures and not r.ac_failures
    assert bar.cart_within / bar.cart_marks >= 0.95
    assert line.cart_within / line.cart_marks >= 0.95
    assert pie.pie_within == pie.pie_slices and pie.pie_sum_ok == pie.pie_charts


# ---------------------------------------------------------------- properties

@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["bar", "line", "pie"]), st.integers(0, 50_000))
def test_ids_unique_and_stable(kind, seed):
    _, _, chart = oracle_chart(kind, seed)
    ids = list(chart.ids.values())
    assert len(ids) == len(set(ids))
    for idx, i in chart.ids.items():
        assert re.fullmatch(re.escape(chart.labels[idx]) + r"-\d+", i)
    assert oracle_chart(kind, seed)[2].ids == chart.ids


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 50_000))
def test_pie_sums_to_100(seed):
    _, _, chart = oracle_chart("pie", seed)
    assert sum(r.y for r in recover_data(chart).rows) == pytest.approx(100, abs=0.1)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["bar", "line"]), st.integers(0, 50_000), st.integers(-40, 40))
def test_cartesian_invariant_under_vertical_shift(kind, seed, dy):
    svg, gt, chart = oracle_chart(kind, seed)
    body_start = svg.index(">", svg.index("<svg")) + 1
    end = svg.rindex("</svg>")
    shifted = svg[:body_start] + f'<g transform="translate(0,{dy})">' + svg[body_start:end] + "</g>" + svg[end:]
    moved = LabeledChart(parse_svg(shifted), gt.labels)
    a = {(r.x, r.series): r.y for r in recover_data(chart).rows}
    b = {(r.x, r.series): r.y for r in recover_data(moved).rows}
    assert a.keys() == b.keys()
    for k in a:
        assert b[k] == pytest.approx(a[k], rel=1e-6, abs=1e-3)
