import json
from pathlib import Path

import pytest

from gazeadapt.cli import main
from gazeadapt.replay import loads_report
from gazeadapt.session import Session, SessionConfig, dumps_log
from gazeadapt import protocol
from gazeadapt.replay import ReaderProfile, synthesize_trace

CORPUS_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "corpus"
DOC = CORPUS_DIR / "msnv-13.json"


def test_bad_trace_reports_line_number(tmp_path, capsys):
    bad = tmp_path / "bad.gaze"
    bad.write_text("gaze/1\n0,640\n")
    assert main(["replay", "--doc", str(DOC), "--trace", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_make_corpus_round_trips(tmp_path):
    out = tmp_path / "corpus"
    assert main(["make-corpus", "--out", str(out)]) == 0
    files = sorted(out.glob("*.json"))
    assert len(files) == 14
    assert [f.read_text() for f in files] == [
        f.read_text() for f in sorted(CORPUS_DIR.glob("*.json"))
    ]


def test_synth_replay_screen_cohort(tmp_path, capsys):
    trace = tmp_path / "t.gaze"
    assert main(["synth", "--doc", str(DOC), "--speed", "1.0",
                 "--seed", "3", "--out", str(trace)]) == 0
    report = tmp_path / "r.json"
    assert main(["replay", "--doc", str(DOC), "--trace", str(trace),
                 "--heatmap", "--out", str(report)]) == 0
    captured = capsys.readouterr().out
    assert "triggered 2/2" in captured
    parsed = loads_report(report.read_text())
    assert parsed.trigger_percentage == 1.0

    reports_dir = tmp_path / "reports"
    reports_dir.mkdir()
    (reports_dir / "a.json").write_text(report.read_text())
    (reports_dir / "b.json").write_text(report.read_text())
    summary = tmp_path / "cohort.json"
    assert main(["cohort", "--reports", str(reports_dir),
                 "--out", str(summary)]) == 0
    assert json.loads(summary.read_text())["n"] == 2

    assert main(["screen", "--report", str(report),
                 "--heatmap-dir", str(tmp_path)]) == 0
    assert "keep" in capsys.readouterr().out


def test_screen_flags_slow_reader_and_exports_heatmap(tmp_path, capsys):
    trace = tmp_path / "t.gaze"
    main(["synth", "--doc", str(DOC), "--speed", "0.2", "--seed", "3",
          "--out", str(trace)])
    report = tmp_path / "r.json"
    main(["replay", "--doc", str(DOC), "--trace", str(trace), "--heatmap",
          "--out", str(report)])
    assert main(["screen", "--report", str(report),
                 "--heatmap-dir", str(tmp_path / "maps")]) == 0
    out = capsys.readouterr().out
    assert "flag_low_trigger" in out
    exports = list((tmp_path / "maps").glob("*.json"))
    assert len(exports) == 1
    grids = json.loads(exports[0].read_text())
    assert grids["format"] == "heatmap/1"


def make_log(tmp_path, registry, pid):
    import itertools
    counter = itertools.count(start=0, step=250)
    config = SessionConfig(doc_ids=("msnv-13",), seed=1)
    session = Session(registry, config, clock=lambda: float(next(counter)))
    session.handle_message(protocol.Hello(participantId=pid))
    doc = registry[session.order[0]]
    for s in synthesize_trace(doc, ReaderProfile(), seed=5):
        session.handle_message(protocol.Gaze(
            t_ms=s.timestamp_ms, x=s.x, y=s.y, lv=1, rv=1))
    session.handle_message(protocol.Next(docId=doc.id))
    session.handle_message(protocol.Answers(docId=doc.id, choices=[4, 3, 0, 0, 0]))
    session.handle_message(protocol.Ratings(items=[5, 6, 2, 4, 3, 6, 7, 5, 4, 3]))
    (tmp_path / f"{pid}.json").write_text(dumps_log(session.export_log()))


def test_analyze(tmp_path, capsys):
    from gazeadapt.service import load_registry

    registry = load_registry(CORPUS_DIR)
    logs = tmp_path / "logs"
    logs.mkdir()
    for pid in ("p1", "p2"):
        make_log(logs, registry, pid)
    groups = tmp_path / "groups.csv"
    groups.write_text("participant,group\np1,adaptive\np2,control\n")
    table = tmp_path / "measures.csv"
    report = tmp_path / "analysis.json"
    assert main(["analyze", "--logs", str(logs), "--groups", str(groups),
                 "--table", str(table), "--report", str(report)]) == 0
    raw = json.loads(report.read_text())
    assert raw["format"] == "analysis/1"
    assert {tuple(g["key"]) for g in raw["groups"]} == {("adaptive",), ("control",)}
    assert "item1" in raw["perception"]
    header = table.read_text().splitlines()[0]
    assert header == "participant,group,doc,accuracy,time_on_task_ms,interest,ease"
