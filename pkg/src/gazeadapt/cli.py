"""Command-line front end: trace synthesis, replay, screening, cohort and
log analysis, fixture-corpus generation, and the study service."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import MeasureRow, analysis_report, rows_to_csv
from .engine import EngineConfig, Strategy
from .fixtures import build_corpus
from .gaze import GazeParams
from .msnv import parse_document, serialize_document, validate_corpus
from .replay import (
    ReaderProfile,
    cohort_report,
    dumps_report,
    loads_report,
    replay,
    screen_participant,
    synthesize_trace,
)
from .session import compute_measures, loads_log
from .traceio import read_trace, write_trace


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fraction", type=float, default=0.40,
                   help="trigger threshold as a fraction of mean fixations")
    p.add_argument("--strategy", default=Strategy.DESATURATE_PREVIOUS.value,
                   choices=[s.value for s in Strategy],
                   help="removal strategy for earlier highlights")


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    return EngineConfig(fraction=args.fraction, strategy=Strategy(args.strategy))


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        args.docs,
        seed=args.seed,
        fraction=args.fraction,
        strategy=Strategy(args.strategy),
        log_dir=args.log_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    doc = parse_document(Path(args.doc).read_text(encoding="utf-8"))
    profile = ReaderProfile(
        reading_speed_factor=args.speed,
        skip_probability=args.skip,
        noise_px=args.noise,
        offset_px=(args.offset_x, args.offset_y),
        revisit_probability=args.revisit,
    )
    samples = synthesize_trace(doc, profile, args.seed)
    write_trace(args.out, samples)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    doc = parse_document(Path(args.doc).read_text(encoding="utf-8"))
    samples = read_trace(args.trace)
    report = replay(samples, doc, _engine_config(args), GazeParams(),
                    with_heatmap=args.heatmap)
    text = dumps_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    rec = report.documents[0]
    print(f"document {rec.doc_id}: triggered {report.triggered_count}/"
          f"{report.available_count} "
          f"({100 * report.trigger_percentage:.1f}%), "
          f"{rec.fixation_count} fixations, "
          f"invalid ratio {report.invalid_sample_ratio:.3f}")
    for t in rec.triggers:
        print(f"  {t.reference_id}: fired at fixation #{t.ordinal} (t={t.t_ms:.0f}ms)")
    return 0


def cmd_cohort(args: argparse.Namespace) -> int:
    paths = sorted(Path(args.reports).glob("*.json"))
    if not paths:
        print(f"no report files in {args.reports}", file=sys.stderr)
        return 1
    reports = [loads_report(p.read_text(encoding="utf-8")) for p in paths]
    summary = cohort_report(reports)
    if args.out:
        Path(args.out).write_text(summary.to_json(), encoding="utf-8")
    print(f"cohort of {summary.n}: mean trigger "
          f"{100 * summary.mean_trigger_percentage:.1f}% "
          f"(sd {100 * summary.sd_trigger_percentage:.1f}%)")
    print(f"above 75%: {summary.above_75} "
          f"({100 * summary.above_75_fraction:.1f}%)   "
          f"at or below: {summary.below_or_at_75}")
    print("histogram (0-100% in 10% bins):", " ".join(map(str, summary.histogram)))
    return 0


def cmd_screen(args: argparse.Namespace) -> int:
    report = loads_report(Path(args.report).read_text(encoding="utf-8"))
    result = screen_participant(report, invalid_threshold=args.invalid_threshold)
    print(f"decision: {result.decision}")
    if result.heatmap_export:
        grids = {
            d.doc_id: [list(row) for row in d.heatmap]
            for d in report.documents if d.heatmap is not None
        }
        out = Path(args.heatmap_dir or ".") / result.heatmap_export
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps({"format": "heatmap/1", "grids": grids}, indent=2),
                       encoding="utf-8")
        print(f"inspect heat maps: {out}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    groups: dict[str, str] = {}
    if args.groups:
        for line in Path(args.groups).read_text(encoding="utf-8").splitlines()[1:]:
            if line.strip():
                pid, group = line.split(",", 1)
                groups[pid.strip()] = group.strip()
    rows: list[MeasureRow] = []
    perception: dict[str, list[int]] = {}
    for path in sorted(Path(args.logs).glob("*.json")):
        log = loads_log(path.read_text(encoding="utf-8"))
        for task in log.tasks:
            try:
                m = compute_measures(task)
            except ValueError:
                continue  # incomplete task in a partial log
            rows.append(MeasureRow(
                participant_id=log.participant_id,
                group=groups.get(log.participant_id, "all"),
                doc_id=task.doc_id,
                accuracy=m["accuracy"],
                time_on_task_ms=m["time_on_task_ms"],
                interest=m["interest"],
                ease=m["ease"],
            ))
        if log.perception_ratings:
            for i, v in enumerate(log.perception_ratings):
                perception.setdefault(f"item{i + 1}", []).append(v)
    if not rows:
        print(f"no complete tasks found in {args.logs}", file=sys.stderr)
        return 1
    if args.table:
        Path(args.table).write_text(rows_to_csv(rows), encoding="utf-8")
        print(f"wrote measure table: {args.table}")
    report = analysis_report(rows, by=("group",),
                             perception=perception or None)
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8")
        print(f"wrote analysis report: {args.report}")
    else:
        print(report, end="")
    return 0


def cmd_make_corpus(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    docs = build_corpus()
    for doc in docs:
        (out / f"{doc.id}.json").write_text(serialize_document(doc), encoding="utf-8")
    _, warnings = validate_corpus(docs)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {len(docs)} documents to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazeadapt")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the study service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--docs", required=True, help="directory of msnv/1 documents")
    p.add_argument("--seed", type=int, default=0)
    _add_engine_flags(p)
    p.add_argument("--log-dir", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", help="synthesize a reader gaze trace")
    p.add_argument("--doc", required=True)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--skip", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--offset-x", type=float, default=0.0)
    p.add_argument("--offset-y", type=float, default=0.0)
    p.add_argument("--revisit", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("replay", help="replay a trace through the pipeline")
    p.add_argument("--doc", required=True)
    p.add_argument("--trace", required=True)
    _add_engine_flags(p)
    p.add_argument("--heatmap", action="store_true")
    p.add_argument("--out", default=None, help="write a report/1 file")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("cohort", help="summarize a directory of reports")
    p.add_argument("--reports", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cohort)

    p = sub.add_parser("screen", help="apply the participant screening policy")
    p.add_argument("--report", required=True)
    p.add_argument("--invalid-threshold", type=float, default=0.25)
    p.add_argument("--heatmap-dir", default=None)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("analyze", help="tables and summaries from session logs")
    p.add_argument("--logs", required=True, help="directory of msnvlog/1 files")
    p.add_argument("--groups", default=None,
                   help="CSV mapping participant,group (header row skipped)")
    p.add_argument("--table", default=None, help="write the tidy measure CSV here")
    p.add_argument("--report", default=None, help="write the analysis/1 JSON here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("make-corpus", help="write the bundled fixture corpus")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_corpus)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
