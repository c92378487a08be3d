"""Stage composition: dataset loading, classification, evaluation and the revive bundle."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .animation import plan_animations, render_animated_svg, resolve_intervals, validate_plan
from .dataset import GroundTruth, load_manifest
from .errors import ChartReviveError, StageError, UnsupportedChart
from .graph import ChartGraph, build_graph
from .insights import DEFAULT_CONFIG, InsightConfig, InsightReport, analyze
from .metrics import Detection, GroundTruthBox, eval_report
from .model import DEFAULT_TAXONOMY, MARK_SUBS, LabeledChart, Taxonomy
from .narration import NarrationScript, TimingModel, export_vtt, narrate
from .neural import ModelWeights, graph_ops, load_weights, predict
from .recovery import chart_from_labeled_svg, emit_labeled_svg, parse_ac_data, recover_data
from .svg import SvgDocument, parse_svg, visual_bbox

log = logging.getLogger(__name__)

DEFAULT_WEIGHTS = Path(__file__).parent / "data" / "default.weights"
BUNDLE_FILES = ("labeled.svg", "insights.json", "narration.json", "narration.vtt", "plan.json",
                "live.svg", "report.json")


@dataclass
class Sample:
    name: str
    chart_type: str
    doc: SvgDocument
    graph: ChartGraph
    truth: GroundTruth


def load_samples(dataset_dir, split: Optional[str] = None, chart_types=None) -> list[Sample]:
    """Charts of a generated dataset, optionally restricted to one split."""
    root = Path(dataset_dir)
    out = []
    for c in load_manifest(root)["charts"]:
        if split is not None and c["split"] != split:
            continue
        if chart_types is not None and c["type"] not in chart_types:
            continue
        doc = parse_svg((root / c["path"]).read_text())
        truth = GroundTruth.from_json((root / c["path"].replace(".svg", ".json")).read_text())
        out.append(Sample(c["path"], c["type"], doc, build_graph(doc), truth))
    return out


def training_pairs(samples: Sequence[Sample], taxonomy: Taxonomy = DEFAULT_TAXONOMY):
    return [(s.graph, {i: taxonomy.index(sub) for i, sub in s.truth.labels.items()})
            for s in samples]


def classify_document(doc: SvgDocument, weights: ModelWeights, graph: Optional[ChartGraph] = None):
    """Element index -> (sub-category, confidence)."""
    g = graph or build_graph(doc)
    if g.num_nodes == 0:
        return {}
    elements, probs = predict(g, weights, graph_ops(g))
    best = probs.argmax(axis=1)
    return {e: (weights.taxonomy[int(k)], float(probs[r, k]))
            for r, (e, k) in enumerate(zip(elements, best))}


def detections(samples: Sequence[Sample], weights: ModelWeights,
               taxonomy: Taxonomy = DEFAULT_TAXONOMY):
    """Classifier detections and ground-truth boxes, both on element visual boxes."""
    dets, gts = [], []
    for s in samples:
        by_index = {e.index: e for e in s.doc.elements}
        for idx, sub in s.truth.labels.items():
            gts.append(GroundTruthBox(s.name, visual_bbox(by_index[idx]), taxonomy.index(sub)))
        for idx, (sub, conf) in classify_document(s.doc, weights, s.graph).items():
            dets.append(Detection(s.name, visual_bbox(by_index[idx]), taxonomy.index(sub),
                                  min(1.0, max(0.0, conf))))
    return dets, gts


def oracle_detections(samples: Sequence[Sample], taxonomy: Taxonomy = DEFAULT_TAXONOMY):
    gts, dets = [], []
    for s in samples:
        by_index = {e.index: e for e in s.doc.elements}
        for idx, sub in s.truth.labels.items():
            box = visual_bbox(by_index[idx])
            gts.append(GroundTruthBox(s.name, box, taxonomy.index(sub)))
            dets.append(Detection(s.name, box, taxonomy.index(sub), 1.0))
    return dets, gts


def evaluate(samples: Sequence[Sample], weights: ModelWeights,
             taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> dict:
    dets, gts = detections(samples, weights, taxonomy)
    return eval_report(dets, gts, taxonomy.names)


# --------------------------------------------------------------------------
# revive

@dataclass
class PipelineConfig:
    weights_path: Optional[str] = None
    taxonomy_path: Optional[str] = None
    timing: TimingModel = field(default_factory=TimingModel)
    insights: InsightConfig = DEFAULT_CONFIG
    max_distilled: int = 2
    out: Optional[str] = None
    seed: int = 0
    profile: bool = False

    def taxonomy(self) -> Taxonomy:
        return Taxonomy.load(self.taxonomy_path) if self.taxonomy_path else DEFAULT_TAXONOMY

    def weights(self) -> ModelWeights:
        return load_weights(self.weights_path or DEFAULT_WEIGHTS)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        cfg = cls()
        for k in ("weights_path", "taxonomy_path", "max_distilled", "out", "seed", "profile"):
            if k in d:
                setattr(cfg, k, d[k])
        try:
            if "timing" in d:
                cfg.timing = TimingModel(**d["timing"])
            if "insights" in d:
                cfg.insights = InsightConfig(**d["insights"])
        except TypeError as exc:
            raise ValueError(f"bad config: {exc}") from None
        return cfg


class _Stages:
    """Runs named stages, tagging failures with the stage name."""

    def __init__(self, profile: bool):
        self.profile = profile
        self.completed: list[str] = []
        self.timings: dict[str, float] = {}

    def run(self, name: str, fn: Callable, *args):
        import time
        t0 = time.perf_counter()
        try:
            result = fn(*args)
        except StageError:
            raise
        except (ChartReviveError, ValueError, KeyError) as exc:
            raise StageError(name, exc) from exc
        if self.profile:
            self.timings[name] = round((time.perf_counter() - t0) * 1000, 3)
        self.completed.append(name)
        return result


def deconstruct(svg_text: str, weights: ModelWeights, taxonomy: Taxonomy = DEFAULT_TAXONOMY,
                stages: Optional[_Stages] = None):
    """parse -> graph -> classify -> recover; returns (labeled chart, table, labeled svg)."""
    st = stages or _Stages(False)
    doc = st.run("parse", parse_svg, svg_text)
    graph = st.run("graph", build_graph, doc)
    predicted = st.run("classify", classify_document, doc, weights, graph)
    labels = {i: sub for i, (sub, _) in predicted.items()}
    chart = LabeledChart(doc, labels, taxonomy)
    if not chart.elements_of(*MARK_SUBS):
        raise StageError("classify", UnsupportedChart("no mark elements found"))
    table = st.run("recover", recover_data, chart)
    labeled = st.run("emit", emit_labeled_svg, chart, table)
    return chart, table, labeled


def insight_stage(labeled_svg: str, cfg: PipelineConfig, taxonomy: Taxonomy = DEFAULT_TAXONOMY,
                  stages: Optional[_Stages] = None) -> InsightReport:
    st = stages or _Stages(False)
    chart = st.run("reload", chart_from_labeled_svg, labeled_svg, taxonomy)
    table = st.run("ac-data", parse_ac_data, labeled_svg)
    ins_cfg = InsightConfig(**{**cfg.insights.__dict__, "max_distilled": cfg.max_distilled})
    return st.run("insights", analyze, table, chart.chart_type, ins_cfg)


def narrate_stage(labeled_svg: str, report: InsightReport, cfg: PipelineConfig,
                  taxonomy: Taxonomy = DEFAULT_TAXONOMY, stages: Optional[_Stages] = None):
    st = stages or _Stages(False)
    chart = st.run("reload", chart_from_labeled_svg, labeled_svg, taxonomy)
    return st.run("narration", narrate, chart.meta(), chart.chart_type, report.distilled, cfg.timing)


def animate_stage(labeled_svg: str, report: InsightReport, script: NarrationScript,
                  taxonomy: Taxonomy = DEFAULT_TAXONOMY, stages: Optional[_Stages] = None):
    st = stages or _Stages(False)
    chart = st.run("reload", chart_from_labeled_svg, labeled_svg, taxonomy)
    plan = st.run("plan", plan_animations, script, chart, labeled_svg, report.distilled)
    plan = st.run("resolve", resolve_intervals, plan, script)
    st.run("validate", validate_plan, plan, labeled_svg, script)
    live = st.run("render", render_animated_svg, labeled_svg, plan)
    return plan, live


def revive(svg_text: str, cfg: PipelineConfig, weights: Optional[ModelWeights] = None) -> dict[str, str]:
    """Full pipeline; returns bundle file name -> content.

    On failure a :class:`StageError` is raised whose ``report`` attribute holds
    the report.json text naming the failing stage.
    """
    taxonomy = cfg.taxonomy()
    st = _Stages(cfg.profile)
    warnings: list[str] = []

    class _Capture(logging.Handler):
        def emit(self, record):
            if record.levelno >= logging.WARNING:
                warnings.append(record.getMessage())

    handler = _Capture()
    root = logging.getLogger("chartrevive")
    root.addHandler(handler)
    try:
        w = weights if weights is not None else st.run("weights", cfg.weights)
        _, _, labeled = deconstruct(svg_text, w, taxonomy, st)
        report = insight_stage(labeled, cfg, taxonomy, st)
        script = narrate_stage(labeled, report, cfg, taxonomy, st)
        vtt = st.run("captions", export_vtt, script)
        plan, live = animate_stage(labeled, report, script, taxonomy, st)
    except StageError as exc:
        exc.report = _report(st, warnings, cfg, failed=exc.stage, error=str(exc.cause))
        raise
    finally:
        root.removeHandler(handler)
    return {
        "labeled.svg": labeled,
        "insights.json": report.to_json(),
        "narration.json": script.to_json(),
        "narration.vtt": vtt,
        "plan.json": plan.to_json(),
        "live.svg": live,
        "report.json": _report(st, warnings + plan.notes, cfg),
    }


def _report(st: _Stages, warnings: list[str], cfg: PipelineConfig, failed: Optional[str] = None,
            error: Optional[str] = None) -> str:
    d = {"version": __version__, "seed": cfg.seed, "stages": st.completed,
         "warnings": warnings, "ok": failed is None}
    if failed is not None:
        d["failed_stage"] = failed
        d["error"] = error
    if cfg.profile:
        d["timings_ms"] = st.timings
    return json.dumps(d, indent=2)


def write_bundle(bundle: dict[str, str], out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in bundle.items():
        (out / name).write_text(text)


def confusion(samples: Sequence[Sample], weights: ModelWeights, taxonomy: Taxonomy = DEFAULT_TAXONOMY):
    """Row = truth, column = prediction counts over all elements."""
    C = len(taxonomy.names)
    m = np.zeros((C, C), dtype=np.int64)
    for s in samples:
        pred = classify_document(s.doc, weights, s.graph)
        for idx, sub in s.truth.labels.items():
            m[taxonomy.index(sub), taxonomy.index(pred[idx][0])] += 1
    return m
