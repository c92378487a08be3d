"""Two-part narration: contextual sentences, insight sentences with phrase spans, word timings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

from .errors import MissingTimings, NonMonotoneTimings, WordCountMismatch
from .insights import Insight
from .model import NONE_FIELD

TEMPLATE_VERSION = 1
UNLABELED = "unlabeled"
CONNECTOR = "Notably,"
TRANSITION = "Looking closer,"
CONTEXT, INSIGHT = "context", "insight"


@dataclass(frozen=True)
class TimingModel:
    base_ms_per_word: float = 250.0
    per_char_ms: float = 25.0
    sentence_pause_ms: float = 300.0

    def __post_init__(self):
        if min(self.base_ms_per_word, self.per_char_ms, self.sentence_pause_ms) < 0:
            raise ValueError("timing constants must be non-negative")

    def duration(self, word: str) -> float:
        return self.base_ms_per_word + self.per_char_ms * len(word)


class Phrase(NamedTuple):
    text: str
    sub_type: str
    chars: tuple[int, int]   # within the sentence
    words: tuple[int, int]   # within the sentence, end exclusive


@dataclass(frozen=True)
class InsightSentence:
    insight_index: int
    text: str
    phrases: tuple[Phrase, ...] = ()


class Word(NamedTuple):
    text: str
    sentence: int
    part: str


@dataclass
class NarrationScript:
    context_sentences: list[str]
    insight_sentences: list[InsightSentence]
    timings: Optional[list[tuple[float, float]]] = None
    words: list[Word] = field(init=False)

    def __post_init__(self):
        self.words = []
        for k, s in enumerate(self.sentences):
            part = CONTEXT if k < len(self.context_sentences) else INSIGHT
            self.words.extend(Word(w, k, part) for w in s.split())
        if self.timings is not None:
            check_timings(self.timings)
            if len(self.timings) != len(self.words):
                raise WordCountMismatch(f"{len(self.timings)} timings for {len(self.words)} words")

    @property
    def sentences(self) -> list[str]:
        return list(self.context_sentences) + [s.text for s in self.insight_sentences]

    def sentence_word_ranges(self) -> list[tuple[int, int]]:
        out, start = [], 0
        for s in self.sentences:
            n = len(s.split())
            out.append((start, start + n))
            start += n
        return out

    def insight_phrases(self) -> list[tuple[int, Phrase, tuple[int, int]]]:
        """(insight index, phrase, global word range) for every phrase."""
        ranges = self.sentence_word_ranges()
        out = []
        for k, s in enumerate(self.insight_sentences):
            offset = ranges[len(self.context_sentences) + k][0]
            for p in s.phrases:
                out.append((s.insight_index, p, (offset + p.words[0], offset + p.words[1])))
        return out

    @property
    def duration_ms(self) -> float:
        if not self.timings:
            return 0.0
        return self.timings[-1][1]

    def to_dict(self) -> dict:
        words = []
        for i, w in enumerate(self.words):
            d = {"text": w.text, "sentence": w.sentence, "part": w.part}
            if self.timings is not None:
                d["startMs"], d["endMs"] = self.timings[i]
            words.append(d)
        return {
            "templateVersion": TEMPLATE_VERSION,
            "contextSentences": list(self.context_sentences),
            "insightSentences": [
                {"insight": s.insight_index, "text": s.text,
                 "phrases": [{"text": p.text, "subType": p.sub_type, "chars": list(p.chars),
                              "words": list(p.words)} for p in s.phrases]}
                for s in self.insight_sentences],
            "words": words,
            "durationMs": self.duration_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "NarrationScript":
        sents = [InsightSentence(s["insight"], s["text"],
                                 tuple(Phrase(p["text"], p["subType"], tuple(p["chars"]),
                                              tuple(p["words"])) for p in s["phrases"]))
                 for s in d["insightSentences"]]
        timings = None
        if d["words"] and "startMs" in d["words"][0]:
            timings = [(w["startMs"], w["endMs"]) for w in d["words"]]
        return cls(list(d["contextSentences"]), sents, timings)

    @classmethod
    def from_json(cls, text: str) -> "NarrationScript":
        return cls.from_dict(json.loads(text))


# --------------------------------------------------------------------------
# contextual sentences

def _clean(s: Optional[str]) -> Optional[str]:
    if s is None:
        return None
    s = " ".join(str(s).split())
    return None if not s or s == NONE_FIELD else s


def _list_words(items: Sequence[str]) -> str:
    items = [i for i in (_clean(x) for x in items) if i]
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + " and " + items[-1]


def context_narration(meta: dict, chart_type: Optional[str]) -> list[str]:
    """Exactly two sentences: chart type and title, then axes or sectors plus legend."""
    kind = chart_type or "data"
    title = _clean(meta.get("title"))
    first = (f"This {kind} chart is titled '{title}'." if title
             else f"This {kind} chart has an {UNLABELED} title.")
    legend_title = _clean(meta.get("legend_title"))
    entries = _list_words(meta.get("legend_entries") or [])
    if chart_type == "pie":
        what = legend_title.lower() if legend_title else f"{UNLABELED} category"
        second = f"Each sector shows the share of one {what}"
        if entries:
            second += f", and the legend lists {entries}"
        return [first, second + "."]
    x = _clean(meta.get("x_title")) or f"{UNLABELED} values"
    y = _clean(meta.get("y_title")) or f"{UNLABELED} values"
    second = f"The x-axis displays {x} while the y-axis shows {y}"
    if entries:
        name = legend_title or f"{UNLABELED} groups"
        second += f", and the legend shows {name}: {entries}"
    return [first, second + "."]


# --------------------------------------------------------------------------
# insight sentences

def fmt_value(v: float) -> str:
    r = round(float(v), 2)
    if r == int(r):
        return f"{int(r):,}"
    return f"{r:,.2f}".rstrip("0").rstrip(".")


def _pct(share: float) -> str:
    return fmt_value(round(share * 100, 1)) + "%"


def _at(p) -> str:
    return f"{p.x} in {p.series}" if p.series else f"{p.x}"


_TREND_WORDS = {
    "increase": "a steady increase",
    "decrease": "a steady decrease",
    "fluctuate_increase": "a fluctuating increase",
    "fluctuate_decrease": "a fluctuating decrease",
    "fluctuate": "fluctuation without a clear direction",
}


def _pieces(ins: Insight) -> list[tuple[str, Optional[str]]]:
    """Sentence body as (text, sub_type) pieces; tagged pieces become phrases."""
    subs = {s.sub_type: s for s in ins.subs}
    t = ins.insight_type
    out: list[tuple[str, Optional[str]]] = []
    if t == "extreme":
        if "maximum" in subs:
            s = subs["maximum"]
            out += [("the ", None), (f"highest value is {fmt_value(s.value)}", "maximum"),
                    (f", reached at {_at(s.relevant_data[0])}", None)]
        if "minimum" in subs:
            s = subs["minimum"]
            out += [(", while the " if out else "the ", None),
                    (f"lowest value is {fmt_value(s.value)}", "minimum"),
                    (f", at {_at(s.relevant_data[0])}", None)]
    elif t == "trend":
        out.append(("overall, ", None))
        for k, s in enumerate(ins.subs):
            who = f"{s.relevant_data[0].series} shows " if s.relevant_data[0].series else "the values show "
            if k:
                out.append((" and " if k == len(ins.subs) - 1 else ", ", None))
            words = _TREND_WORDS[s.sub_type]
            lead, _, core = words.partition(" ") if words.startswith("a ") else ("", "", words)
            out += [(who + (lead + " " if lead else ""), None), (core, s.sub_type)]
    elif t == "proportion":
        if "majority" in subs:
            s = subs["majority"]
            out += [(f"{_at(s.relevant_data[0])} takes up ", None),
                    (f"the majority with {_pct(s.value)}", "majority"), (" of the total", None)]
        s = subs["minority"]
        out += [(", while " if out else "", None), (f"{_at(s.relevant_data[0])} holds ", None),
                (f"the smallest share at {_pct(s.value)}", "minority")]
    elif t == "difference":
        s = subs["range"]
        out += [("the ", None),
                (f"gap between the highest and lowest values is {fmt_value(s.value)}", "range")]
        s = subs["top_two"]
        a, b = s.relevant_data
        out += [(", and ", None), (f"{_at(a)} exceeds {_at(b)} by {fmt_value(s.value)}", "top_two")]
    elif t == "rank":
        s = subs["top"]
        n = {1: "one", 2: "two", 3: "three"}.get(len(s.relevant_data), str(len(s.relevant_data)))
        names = _list_words([_at(p) for p in s.relevant_data])
        out += [("the ", None), (f"top {n} are {names}", "top")]
    elif t == "aggregation":
        out += [("the values ", None)]
        first = True
        for name, tmpl in (("average", "average {}"), ("sum", "sum to {}"), ("count", "{} entries")):
            if name not in subs:
                continue
            if name == "count":
                out.append((" across " if not first else "span ", None))
                out.append((tmpl.format(int(subs[name].value)), name))
            else:
                if not first:
                    out.append((" and ", None))
                out.append((tmpl.format(fmt_value(subs[name].value)), name))
            first = False
    elif t == "value":
        out += [("the data ", None)]
        if "first" in subs:
            s = subs["first"]
            out += [(f"starts at {fmt_value(s.value)}", "first"), (f" for {_at(s.relevant_data[0])}", None)]
        if "last" in subs:
            s = subs["last"]
            out += [(" and " if "first" in subs else "", None),
                    (f"ends at {fmt_value(s.value)}", "last"), (f" for {_at(s.relevant_data[0])}", None)]
    elif t == "outlier":
        for k, s in enumerate(ins.subs):
            if k:
                out.append((" and " if k == len(ins.subs) - 1 else ", ", None))
            out.append((f"{_at(s.relevant_data[0])} stands out as an outlier at {fmt_value(s.value)}",
                        "outlier"))
    elif t == "distribution":
        phrase = {"uniform": ("the values are ", "spread fairly evenly"),
                  "normal": ("the values follow a ", "roughly normal distribution"),
                  "none": ("the values show ", "no clear distribution pattern")}[ins.sub_type]
        out += [(phrase[0], None), (phrase[1], ins.sub_type)]
    return out


def _sentence(pieces, connector: Optional[str]) -> tuple[str, tuple[Phrase, ...]]:
    pieces = [p for p in pieces if p[0]]
    body = "".join(p for p, _ in pieces)
    if connector:
        prefix = connector + " "
    else:
        prefix = ""
        if body:
            pieces = [(pieces[0][0][0].upper() + pieces[0][0][1:], pieces[0][1])] + list(pieces[1:])
    text, phrases = prefix, []
    for piece, sub in pieces:
        start = len(text)
        text += piece
        if sub is not None:
            phrases.append((piece, sub, start, len(text)))
    text += "."
    out = tuple(Phrase(p, sub, (a, b), (len(text[:a].split()), len(text[:b].split())))
                for p, sub, a, b in phrases)
    return text, out


def insight_narration(distilled: Sequence[Insight]) -> list[InsightSentence]:
    """One sentence per insight; the second and later ones open with a connector."""
    out = []
    for k, ins in enumerate(distilled):
        text, phrases = _sentence(_pieces(ins), CONNECTOR if k else None)
        out.append(InsightSentence(k, text, phrases))
    return out


# sentence openers that come from templates rather than from data values
_TEMPLATE_LEADS = ("The", "Overall,")


def _prefix(s: InsightSentence, word: str) -> InsightSentence:
    body = s.text
    first = body.split(" ", 1)[0]
    if first in _TEMPLATE_LEADS:
        body = body[0].lower() + body[1:]
    text = f"{word} {body}"
    shift_c, shift_w = len(word) + 1, len(word.split())
    phrases = tuple(Phrase(p.text, p.sub_type, (p.chars[0] + shift_c, p.chars[1] + shift_c),
                           (p.words[0] + shift_w, p.words[1] + shift_w)) for p in s.phrases)
    return InsightSentence(s.insight_index, text, phrases)


def synthetic_timings(sentences: Sequence[str], model: TimingModel) -> list[tuple[float, float]]:
    timings, t = [], 0.0
    for k, s in enumerate(sentences):
        if k:
            t += model.sentence_pause_ms
        for w in s.split():
            d = model.duration(w)
            timings.append((t, t + d))
            t += d
    return timings


def assemble(context: Sequence[str], insight: Sequence[InsightSentence],
             model: TimingModel = TimingModel(), transition: Optional[str] = TRANSITION) -> NarrationScript:
    """Join both parts, open the insight part with a transition, time every word."""
    if not context or not insight:
        raise ValueError("both narration parts must be nonempty")
    insight = list(insight)
    if transition:
        insight[0] = _prefix(insight[0], transition)
    sentences = list(context) + [s.text for s in insight]
    return NarrationScript(list(context), insight, synthetic_timings(sentences, model))


# --------------------------------------------------------------------------
# external timings and captions

def check_timings(timings: Sequence[tuple[float, float]]) -> None:
    prev_end = 0.0
    for k, (s, e) in enumerate(timings):
        if s < 0 or e < s or s < prev_end:
            raise NonMonotoneTimings(f"word {k}: [{s}, {e}] after previous end {prev_end}")
        prev_end = e


def ingest_timings(script: NarrationScript, source) -> NarrationScript:
    """Replace word timings with ``{words: [{text, startMs, endMs}]}`` from a file or dict."""
    if isinstance(source, dict):
        data = source
    else:
        data = json.loads(Path(source).read_text())
    words = data.get("words", [])
    if len(words) != len(script.words):
        raise WordCountMismatch(f"timing file has {len(words)} words, script has {len(script.words)}")
    timings = [(float(w["startMs"]), float(w["endMs"])) for w in words]
    check_timings(timings)
    return replace(script, timings=timings)


def timings_json(script: NarrationScript) -> str:
    if script.timings is None:
        raise MissingTimings("script has no timings")
    return json.dumps({"words": [{"text": w.text, "startMs": s, "endMs": e}
                                 for w, (s, e) in zip(script.words, script.timings)]}, indent=1)


def vtt_timestamp(ms: float) -> str:
    total = int(round(ms))
    h, rem = divmod(total, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, milli = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d}.{milli:03d}"


def export_vtt(script: NarrationScript) -> str:
    """WebVTT text with one cue per sentence."""
    if script.timings is None:
        raise MissingTimings("script has no timings")
    lines = ["WEBVTT", ""]
    for text, (a, b) in zip(script.sentences, script.sentence_word_ranges()):
        if a == b:
            continue
        lines += [f"{vtt_timestamp(script.timings[a][0])} --> {vtt_timestamp(script.timings[b - 1][1])}",
                  text, ""]
    return "\n".join(lines)


def narrate(meta: dict, chart_type: Optional[str], distilled: Sequence[Insight],
            model: TimingModel = TimingModel()) -> NarrationScript:
    return assemble(context_narration(meta, chart_type), insight_narration(distilled), model)
