import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chartrevive.errors import MissingTimings, NonMonotoneTimings, WordCountMismatch
from chartrevive.insights import DataPoint, Insight, SubInsight, analyze
from chartrevive.model import DataTable, Row
from chartrevive.narration import (InsightSentence, NarrationScript, TimingModel, assemble,
                                   context_narration, export_vtt, fmt_value, ingest_timings,
                                   insight_narration, narrate, timings_json, vtt_timestamp)
from oracles import read_vtt


def _meta(**kw):
    base = {"title": "None", "x_title": "None", "y_title": "None", "legend_title": "None",
            "legend_entries": []}
    base.update(kw)
    return base


def test_bar_context():
    assert context_narration(_meta(title="T", x_title="Month", y_title="Sales"), "bar") == [
        "This bar chart is titled 'T'.", "The x-axis displays Month while the y-axis shows Sales."]


def test_legend_context():
    s = context_narration(_meta(title="T", x_title="Month", y_title="Sales", legend_title="Region",
                                legend_entries=["North", "South", "East"]), "line")
    assert s[1] == ("The x-axis displays Month while the y-axis shows Sales, and the legend shows "
                    "Region: North, South and East.")


def test_pie_context():
    s = context_narration(_meta(title="Mix", legend_title="Product", legend_entries=["A", "B"]), "pie")
    assert s == ["This pie chart is titled 'Mix'.",
                 "Each sector shows the share of one product, and the legend lists A and B."]
    assert "axis" not in s[1]


def test_unlabeled_context():
    s = context_narration(_meta(), "bar")
    assert s == ["This bar chart has an unlabeled title.",
                 "The x-axis displays unlabeled values while the y-axis shows unlabeled values."]
    assert "None" not in " ".join(context_narration(_meta(legend_entries=["a"]), "pie"))


def _extreme_max(x="Jul", v=40.0, series=None):
    return Insight("extreme", (SubInsight("maximum", (DataPoint(x, series, v),), v),), 0.5)


def test_extreme_sentence_and_phrase():
    (s,) = insight_narration([_extreme_max()])
    assert s.text == "The highest value is 40, reached at Jul."
    (p,) = s.phrases
    assert (p.text, p.sub_type) == ("highest value is 40", "maximum")
    assert s.text[p.chars[0]:p.chars[1]] == p.text
    assert s.text.split()[p.words[0]:p.words[1]] == ["highest", "value", "is", "40,"]


def test_trend_sentence():
    pts = tuple(DataPoint(str(i), None, float(i)) for i in range(5))
    ins = Insight("trend", (SubInsight("increase", pts, 1.0),), 1.0)
    (s,) = insight_narration([ins])
    assert s.text == "Overall, the values show a steady increase."
    assert [(p.text, p.sub_type) for p in s.phrases] == [("steady increase", "increase")]


def test_connector_on_second_sentence():
    a, b = insight_narration([_extreme_max(), _extreme_max("Aug", 7.5)])
    assert not a.text.startswith("Notably")
    assert b.text == "Notably, the highest value is 7.5, reached at Aug."
    assert b.text.split()[b.phrases[0].words[0]] == "highest"


def test_fmt_value():
    assert fmt_value(1234567.0) == "1,234,567"
    assert fmt_value(2.5) == "2.5"
    assert fmt_value(0.126) == "0.13"


def test_uniform_timing():
    script = assemble(["One two."], [InsightSentence(0, "Three four.")], TimingModel(250, 0, 0),
                      transition=None)
    assert script.timings == [(0, 250), (250, 500), (500, 750), (750, 1000)]


def test_word_duration_and_total():
    m = TimingModel()
    assert m.duration("Month") == 375
    script = assemble(["This is it."], [InsightSentence(0, "And more.")], m)
    durations = sum(m.duration(w.text) for w in script.words)
    assert script.duration_ms == durations + m.sentence_pause_ms * (len(script.sentences) - 1)


def test_transition_prefix_keeps_phrases_aligned():
    script = assemble(["Context here."], insight_narration([_extreme_max()]))
    assert script.insight_sentences[0].text == "Looking closer, the highest value is 40, reached at Jul."
    (_, phrase, (a, b)), = script.insight_phrases()
    assert [w.text for w in script.words[a:b]] == ["highest", "value", "is", "40,"]


def test_ingest_timings(tmp_path):
    script = assemble(["A b c."], [InsightSentence(0, "D e.")])
    path = tmp_path / "t.json"
    path.write_text(timings_json(script))
    assert ingest_timings(script, path) == script
    data = json.loads(timings_json(script))
    short = {"words": data["words"][:-1]}
    with pytest.raises(WordCountMismatch):
        ingest_timings(script, short)
    data["words"][2]["startMs"] = data["words"][1]["startMs"]
    with pytest.raises(NonMonotoneTimings):
        ingest_timings(script, data)


def test_vtt_examples():
    s = NarrationScript(["Hello world."], [], [(0, 700), (700, 1500)])
    assert export_vtt(s) == "WEBVTT\n\n00:00:00.000 --> 00:00:01.500\nHello world.\n"
    assert export_vtt(NarrationScript([], [], [])) == "WEBVTT\n"
    with pytest.raises(MissingTimings):
        export_vtt(NarrationScript(["x"], []))
    assert vtt_timestamp(3_723_004) == "01:02:03.004"


def test_script_json_round_trip():
    t = DataTable("X", "Y", None, [Row(f"m{i}", float(v)) for i, v in enumerate([3, 5, 4, 9, 12])])
    rep = analyze(t, "line")
    script = narrate(_meta(title="T"), "line", rep.distilled)
    back = NarrationScript.from_json(script.to_json())
    assert back == script and back.to_json() == script.to_json()


# ---------------------------------------------------------------- properties

word = st.text(alphabet="abcdefghijklmnopqrstuvwxyz,'", min_size=1, max_size=9)
sentence = st.lists(word, min_size=1, max_size=8).map(lambda ws: " ".join(ws) + ".")
timing = st.builds(TimingModel, st.integers(1, 400), st.integers(0, 60), st.integers(0, 900))


@settings(max_examples=80, deadline=None)
@given(st.lists(sentence, min_size=1, max_size=3), st.lists(sentence, min_size=1, max_size=3), timing)
def test_script_invariants(ctx, ins, model):
    sents = [InsightSentence(k, s) for k, s in enumerate(ins)]
    script = assemble(ctx, sents, model)
    for k, text in enumerate(script.sentences):
        assert " ".join(w.text for w in script.words if w.sentence == k) == text
    starts = [a for a, _ in script.timings]
    assert all(x < y for x, y in zip(starts, starts[1:]))
    first_insight = next(i for i, w in enumerate(script.words) if w.part == "insight")
    assert script.timings[0][0] < script.timings[first_insight][0]
    assert assemble(ctx, sents, model).to_json() == script.to_json()


@settings(max_examples=80, deadline=None)
@given(st.lists(sentence, min_size=1, max_size=3), st.lists(sentence, min_size=1, max_size=3), timing)
def test_vtt_round_trip(ctx, ins, model):
    script = assemble(ctx, [InsightSentence(k, s) for k, s in enumerate(ins)], model)
    cues = read_vtt(export_vtt(script))
    assert [c[2] for c in cues] == script.sentences
    for (a, b), (start, end, _) in zip(script.sentence_word_ranges(), cues):
        assert start == round(script.timings[a][0]) and end == round(script.timings[b - 1][1])
    assert all(c[0] <= c[1] for c in cues)
    assert all(x[1] <= y[0] for x, y in zip(cues, cues[1:]))
