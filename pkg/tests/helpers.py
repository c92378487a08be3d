"""Shared fixtures for the test modules."""

from __future__ import annotations

from dataclasses import dataclass, field

from chartrevive.dataset import ChartSpec, generate_chart
from chartrevive.model import LabeledChart
from chartrevive.recovery import emit_labeled_svg, parse_ac_data, recover_data, strip_labels
from chartrevive.svg import parse_svg


def oracle_chart(kind: str, seed: int):
    """(svg text, ground truth, LabeledChart with ground-truth labels)."""
    svg, gt = generate_chart(ChartSpec.random(kind, seed))
    return svg, gt, LabeledChart(parse_svg(svg), gt.labels)


@dataclass
class RoundTrip:
    cart_marks: int = 0
    cart_within: int = 0
    pie_slices: int = 0
    pie_within: int = 0
    pie_sum_ok: int = 0
    pie_charts: int = 0
    key_mismatch: list = field(default_factory=list)
    strip_failures: list = field(default_factory=list)
    ac_failures: list = field(default_factory=list)


def recovery_round_trip(kind: str, seeds, stats: RoundTrip | None = None) -> RoundTrip:
    st = stats or RoundTrip()
    for s in seeds:
        svg, gt, chart = oracle_chart(kind, s)
        table = recover_data(chart)
        truth = {(r.x, r.series): r.y for r in gt.table.rows}
        got = {(r.x, r.series): r.y for r in table.rows}
        if set(truth) != set(got):
            st.key_mismatch.append((kind, s))
            continue
        if kind == "pie":
            st.pie_charts += 1
            st.pie_sum_ok += abs(sum(got.values()) - 100) <= 0.1
            for k in truth:
                st.pie_slices += 1
                st.pie_within += abs(truth[k] - got[k]) <= 0.5
        else:
            lo, hi = gt.meta["y_domain"]
            for k in truth:
                st.cart_marks += 1
                st.cart_within += abs(truth[k] - got[k]) <= 0.02 * (hi - lo)
        labeled = emit_labeled_svg(chart, table)
        if strip_labels(labeled) != svg:
            st.strip_failures.append((kind, s))
        back = parse_ac_data(labeled)
        if ({(r.x, r.series): r.y for r in back.rows} != got
                or back.field_names != table.field_names):
            st.ac_failures.append((kind, s))
    return st


def live_inputs(spec: ChartSpec):
    """Ground-truth labeled svg, insight report, timed script and reloaded chart for one spec."""
    from chartrevive.insights import analyze
    from chartrevive.narration import narrate
    from chartrevive.recovery import chart_from_labeled_svg

    svg, gt = generate_chart(spec)
    chart = LabeledChart(parse_svg(svg), gt.labels)
    labeled = emit_labeled_svg(chart, recover_data(chart))
    chart = chart_from_labeled_svg(labeled)
    report = analyze(parse_ac_data(labeled), chart.chart_type)
    script = narrate(chart.meta(), chart.chart_type, report.distilled)
    return labeled, report, script, chart
