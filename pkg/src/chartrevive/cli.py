"""Command-line entry point: ``chartrevive <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import BadFlag, ChartReviveError, StageError

log = logging.getLogger("chartrevive")

ENCODERS = {"stroke": ("stroke",), "element": ("element",), "both": ("stroke", "element")}
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}
EXIT_OK, EXIT_ERROR = 0, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise BadFlag(message)


_GLOBALS = ("config", "seed", "jobs", "out", "encoder", "weights", "taxonomy")


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the command from being reset by the subparser
    S = argparse.SUPPRESS
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=S, help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--jobs", type=int, default=S)
    p.add_argument("--out", default=S, help="output directory or file")
    p.add_argument("--encoder", choices=sorted(ENCODERS), default=S)
    p.add_argument("--weights", default=S, help="model weights file")
    p.add_argument("--taxonomy", default=S, help="taxonomy JSON file")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="chartrevive", description="Revive static SVG charts into live charts.",
                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("revive", parents=[common], help="full pipeline into a bundle directory")
    p.add_argument("input")
    p.add_argument("--profile", action="store_true", help="record stage timings in report.json")

    p = sub.add_parser("deconstruct", parents=[common], help="classify elements and recover data")
    p.add_argument("input")

    p = sub.add_parser("insight", parents=[common], help="insights from a labeled SVG")
    p.add_argument("labeled")
    p.add_argument("--max-distilled", type=int, default=None)

    p = sub.add_parser("narrate", parents=[common], help="narration script and captions")
    p.add_argument("labeled")
    p.add_argument("--insights", required=True)
    p.add_argument("--timings", help="external word timings {words: [{text, startMs, endMs}]}")

    p = sub.add_parser("animate", parents=[common], help="animation plan and live SVG")
    p.add_argument("labeled")
    p.add_argument("--insights", required=True)
    p.add_argument("--narration", required=True)

    p = sub.add_parser("gen-dataset", parents=[common], help="synthetic charts with ground truth")
    p.add_argument("--count", type=int, default=300, help="charts per chart type")

    p = sub.add_parser("train", parents=[common], help="train the element classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--limit", type=int, default=None, help="use only the first N training charts")

    p = sub.add_parser("eval", parents=[common], help="AP50 / AP75 / mAP on a dataset split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--models", nargs="*", default=[], help="extra weights files to tabulate")
    p.add_argument("--oracle", action="store_true", help="score ground truth against itself")
    return parser


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("CHARTREVIVE_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(level)


def _config(args):
    from .pipeline import PipelineConfig
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    cfg = PipelineConfig.from_dict(data)
    if args.weights:
        cfg.weights_path = args.weights
    if args.taxonomy:
        cfg.taxonomy_path = args.taxonomy
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out = args.out
    if getattr(args, "max_distilled", None) is not None:
        cfg.max_distilled = args.max_distilled
    if getattr(args, "profile", False):
        cfg.profile = True
    return cfg, data


def _out_dir(cfg, default: str) -> Path:
    out = Path(cfg.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_revive(args) -> int:
    from .pipeline import revive, write_bundle
    cfg, _ = _config(args)
    out = _out_dir(cfg, "bundle")
    try:
        bundle = revive(Path(args.input).read_text(), cfg)
    except StageError as exc:
        (out / "report.json").write_text(getattr(exc, "report", "{}"))
        raise
    write_bundle(bundle, out)
    print(f"wrote {len(bundle)} files to {out}")
    return EXIT_OK


def cmd_deconstruct(args) -> int:
    from .pipeline import deconstruct
    cfg, _ = _config(args)
    out = _out_dir(cfg, "deconstructed")
    _, table, labeled = deconstruct(Path(args.input).read_text(), cfg.weights(), cfg.taxonomy())
    (out / "labeled.svg").write_text(labeled)
    (out / "data.json").write_text(json.dumps(table.to_dict(), indent=2))
    print(f"wrote labeled.svg and data.json to {out}")
    return EXIT_OK


def cmd_insight(args) -> int:
    from .pipeline import insight_stage
    cfg, _ = _config(args)
    out = _out_dir(cfg, ".")
    report = insight_stage(Path(args.labeled).read_text(), cfg, cfg.taxonomy())
    (out / "insights.json").write_text(report.to_json())
    print(f"wrote insights.json to {out}")
    return EXIT_OK


def cmd_narrate(args) -> int:
    from .insights import InsightReport
    from .narration import export_vtt, ingest_timings
    from .pipeline import narrate_stage
    cfg, _ = _config(args)
    out = _out_dir(cfg, ".")
    report = InsightReport.from_json(Path(args.insights).read_text())
    script = narrate_stage(Path(args.labeled).read_text(), report, cfg, cfg.taxonomy())
    if args.timings:
        script = ingest_timings(script, args.timings)
    (out / "narration.json").write_text(script.to_json())
    (out / "narration.vtt").write_text(export_vtt(script))
    print(f"wrote narration.json and narration.vtt to {out}")
    return EXIT_OK


def cmd_animate(args) -> int:
    from .insights import InsightReport
    from .narration import NarrationScript
    from .pipeline import animate_stage
    cfg, _ = _config(args)
    out = _out_dir(cfg, ".")
    labeled = Path(args.labeled).read_text()
    report = InsightReport.from_json(Path(args.insights).read_text())
    script = NarrationScript.from_json(Path(args.narration).read_text())
    plan, live = animate_stage(labeled, report, script, cfg.taxonomy())
    (out / "plan.json").write_text(plan.to_json())
    (out / "live.svg").write_text(live)
    print(f"wrote plan.json and live.svg to {out}")
    return EXIT_OK


def cmd_gen_dataset(args) -> int:
    from .dataset import generate_dataset
    cfg, _ = _config(args)
    out = cfg.out or "dataset"
    manifest = generate_dataset(args.count, cfg.seed, out, jobs=args.jobs or 1)
    print(f"wrote {len(manifest['charts'])} charts to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    from .neural import TrainConfig, save_weights, train
    from .pipeline import load_samples, training_pairs
    cfg, data = _config(args)
    taxonomy = cfg.taxonomy()
    tc = dict(data.get("train", {}))
    for key, val in (("epochs", args.epochs), ("batch_charts", args.batch),
                     ("learning_rate", args.lr)):
        if val is not None:
            tc[key] = val
    tc["seed"] = cfg.seed
    tc["streams"] = ENCODERS[args.encoder or data.get("encoder", "both")]
    samples = load_samples(args.dataset, "train")
    if args.limit is not None:
        samples = samples[:args.limit]
    result = train(training_pairs(samples, taxonomy), TrainConfig(**tc), taxonomy.names,
                   progress=lambda e, l: log.info("epoch %d loss %.5f", e, l))
    out = Path(cfg.out or "model.weights")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_weights(result.weights, out)
    out.with_suffix(".loss.json").write_text(json.dumps(result.loss_log))
    print(f"wrote {out} ({len(result.loss_log)} epochs, final loss {result.loss_log[-1]:.5f})")
    return EXIT_OK


def _encoder_name(weights) -> str:
    streams = weights.encoder.streams
    return "both" if len(streams) == 2 else streams[0]


def cmd_eval(args) -> int:
    from .metrics import eval_report, format_table, report_json
    from .neural import load_weights
    from .pipeline import evaluate, load_samples, oracle_detections
    cfg, _ = _config(args)
    taxonomy = cfg.taxonomy()
    samples = load_samples(args.dataset, args.split)
    reports = {}
    if args.oracle:
        dets, gts = oracle_detections(samples, taxonomy)
        reports["oracle"] = eval_report(dets, gts, taxonomy.names)
    else:
        paths = ([cfg.weights_path] if cfg.weights_path else []) + list(args.models)
        if not paths:
            from .pipeline import DEFAULT_WEIGHTS
            paths = [str(DEFAULT_WEIGHTS)]
        for p in paths:
            w = load_weights(p)
            name = _encoder_name(w)
            if name in reports:
                name = f"{name}:{Path(p).stem}"
            reports[name] = evaluate(samples, w, taxonomy)
    print(report_json(reports if len(reports) > 1 else next(iter(reports.values()))))
    print(format_table({k: r["overall"] for k, r in reports.items()}))
    if cfg.out:
        Path(cfg.out).write_text(report_json(reports))
    return EXIT_OK


COMMANDS = {
    "revive": cmd_revive, "deconstruct": cmd_deconstruct, "insight": cmd_insight,
    "narrate": cmd_narrate, "animate": cmd_animate, "gen-dataset": cmd_gen_dataset,
    "train": cmd_train, "eval": cmd_eval,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for name in _GLOBALS:
            if not hasattr(args, name):
                setattr(args, name, None)
        return COMMANDS[args.command](args)
    except BadFlag as exc:
        print(f"chartrevive: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    except (ChartReviveError, OSError, ValueError) as exc:
        print(f"chartrevive: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
