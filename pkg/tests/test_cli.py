import json
import xml.etree.ElementTree as ET

import pytest

from chartrevive.cli import main
from chartrevive.dataset import ChartSpec, generate_chart
from chartrevive.insights import InsightReport
from chartrevive.pipeline import BUNDLE_FILES


@pytest.fixture(scope="module")
def bar_svg(tmp_path_factory):
    path = tmp_path_factory.mktemp("in") / "bar.svg"
    path.write_text(generate_chart(ChartSpec.random("bar", 7))[0])
    return path


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds")
    assert main(["gen-dataset", "--count", "10", "--seed", "3", "--out", str(out)]) == 0
    return out


def test_revive_bundle(bar_svg, tmp_path, capsys):
    assert main(["revive", str(bar_svg), "--out", str(tmp_path / "a"), "--profile"]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(BUNDLE_FILES)
    live = (tmp_path / "a" / "live.svg").read_text()
    ET.fromstring(live[live.index("<svg"):])
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report["ok"] and "timings_ms" in report
    assert "wrote 7 files" in capsys.readouterr().out


def test_revive_is_deterministic(bar_svg, tmp_path):
    for d in ("a", "b"):
        assert main(["revive", str(bar_svg), "--seed", "4", "--out", str(tmp_path / d)]) == 0
    for name in BUNDLE_FILES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_blank_svg_fails_with_report(tmp_path, capsys):
    blank = tmp_path / "blank.svg"
    blank.write_text('<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"/>')
    assert main(["revive", str(blank), "--out", str(tmp_path / "out")]) == 2
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert not report["ok"] and report["failed_stage"] == "classify"
    assert "no mark elements" in capsys.readouterr().err


def test_bad_flag_exit_code(capsys):
    assert main(["revive"]) == 2
    assert main(["eval", "--dataset", "x", "--encoder", "neither"]) == 2


def test_stagewise_commands_match_revive(bar_svg, tmp_path):
    d = tmp_path / "stages"
    assert main(["deconstruct", str(bar_svg), "--out", str(d)]) == 0
    labeled = d / "labeled.svg"
    assert main(["insight", str(labeled), "--out", str(d)]) == 0
    assert main(["narrate", str(labeled), "--insights", str(d / "insights.json"), "--out", str(d)]) == 0
    assert main(["animate", str(labeled), "--insights", str(d / "insights.json"),
                 "--narration", str(d / "narration.json"), "--out", str(d)]) == 0
    assert main(["revive", str(bar_svg), "--out", str(tmp_path / "full")]) == 0
    for name in ("labeled.svg", "insights.json", "narration.json", "narration.vtt", "plan.json", "live.svg"):
        assert (d / name).read_text() == (tmp_path / "full" / name).read_text(), name
    InsightReport.from_json((d / "insights.json").read_text())


def test_narrate_with_external_timings(bar_svg, tmp_path):
    d = tmp_path / "n"
    assert main(["deconstruct", str(bar_svg), "--out", str(d)]) == 0
    assert main(["insight", str(d / "labeled.svg"), "--out", str(d)]) == 0
    assert main(["narrate", str(d / "labeled.svg"), "--insights", str(d / "insights.json"),
                 "--out", str(d)]) == 0
    script = json.loads((d / "narration.json").read_text())
    words = [{"text": w["text"], "startMs": 1000 * k, "endMs": 1000 * k + 900}
             for k, w in enumerate(script["words"])]
    (d / "t.json").write_text(json.dumps({"words": words}))
    assert main(["narrate", str(d / "labeled.svg"), "--insights", str(d / "insights.json"),
                 "--timings", str(d / "t.json"), "--out", str(d / "ext")]) == 0
    vtt = (d / "ext" / "narration.vtt").read_text()
    assert vtt.split("\n")[2].startswith("00:00:00.000 --> ")
    (d / "t.json").write_text(json.dumps({"words": words[:-1]}))
    assert main(["narrate", str(d / "labeled.svg"), "--insights", str(d / "insights.json"),
                 "--timings", str(d / "t.json"), "--out", str(d / "bad")]) == 2


def test_eval_oracle_is_perfect(dataset, capsys):
    assert main(["eval", "--dataset", str(dataset), "--oracle"]) == 0
    out = capsys.readouterr().out
    assert "100.0" in out
    overall = json.loads(out[:out.rindex("}") + 1])["overall"]
    assert overall == {"ap50": 1.0, "ap75": 1.0, "map": 1.0}


def test_train_then_eval(dataset, tmp_path, capsys):
    w = tmp_path / "m.weights"
    assert main(["train", "--dataset", str(dataset), "--epochs", "1", "--limit", "10",
                 "--encoder", "element", "--out", str(w)]) == 0
    assert w.exists() and len(json.loads(w.with_suffix(".loss.json").read_text())) == 1
    capsys.readouterr()
    assert main(["eval", "--dataset", str(dataset), "--weights", str(w)]) == 0
    assert "element" in capsys.readouterr().out


def test_config_file_and_flag_precedence(bar_svg, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_distilled": 1, "timing": {"base_ms_per_word": 100, "per_char_ms": 0,
                                                                "sentence_pause_ms": 0}}))
    assert main(["--config", str(cfg), "revive", str(bar_svg), "--out", str(tmp_path / "c")]) == 0
    script = json.loads((tmp_path / "c" / "narration.json").read_text())
    assert [w["endMs"] - w["startMs"] for w in script["words"]] == [100] * len(script["words"])
    ins = json.loads((tmp_path / "c" / "insights.json").read_text())
    assert len(ins["distilled"]) == 1
    cfg.write_text(json.dumps({"timing": {"base_ms": 100}}))
    assert main(["--config", str(cfg), "revive", str(bar_svg), "--out", str(tmp_path / "d")]) == 2
