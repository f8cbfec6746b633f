"""Trace synthesis and deterministic pipeline replay.

The synthesizer emits a 120 Hz gaze stream that walks a document's sentences
in order, placing fixations left-to-right on the layout's slot grid. Replay
pushes any trace (synthetic or recorded) through gap filling, streaming
fixation detection, and the intervention engine, then reports triggering
outcomes, screening decisions, and cohort summaries.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .engine import EngineConfig, InterventionEngine, TriggerEvent
from .fixtures import line_slots
from .gaze import (
    DEFAULT_DISPLAY,
    FixationStream,
    GazeParams,
    GazeSample,
    Rect,
    SAMPLE_PERIOD_MS,
    heatmap,
    interpolate_gaps,
    validate_sample,
)
from .msnv import MSNVDocument

REPORT_FORMAT_TAG = "report/1"

HEATMAP_CELL_PX = 32.0


@dataclass(frozen=True)
class ReaderProfile:
    """How the synthetic reader behaves.

    ``reading_speed_factor`` scales every sentence's fixation budget: each
    reference receives floor(speed x mean_fixations) fixations, so a factor
    below the trigger fraction is guaranteed to fire nothing. ``offset_px``
    shifts every emitted sample, mimicking a miscalibrated tracker.
    """

    reading_speed_factor: float = 1.0
    skip_probability: float = 0.0
    fixation_median_ms: float = 180.0
    fixation_sigma: float = 0.35
    fixation_clip_ms: tuple[float, float] = (100.0, 600.0)
    revisit_probability: float = 0.0
    noise_px: float = 0.0
    offset_px: tuple[float, float] = (0.0, 0.0)
    filler_fixations_per_word: float = 0.8

    def __post_init__(self) -> None:
        if self.reading_speed_factor <= 0:
            raise ValueError("reading_speed_factor must be positive")
        for name in ("skip_probability", "revisit_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be within [0, 1]")


def _count_for(speed: float, base: float) -> int:
    # floor with a hair of slack so exact products do not lose a fixation
    return max(0, math.floor(speed * base + 1e-9))


def synthesize_trace(
    doc: MSNVDocument, profile: ReaderProfile, seed: int
) -> list[GazeSample]:
    """Simulate one reading of ``doc`` as a 120 Hz sample stream."""
    rng = random.Random(seed)

    # fixation budget per sentence
    budgets = {idx: 0 for idx in range(len(doc.sentences))}
    ref_sentences = set()
    for ref in doc.references:
        ref_sentences.update(ref.sentence_indices)
        total = _count_for(profile.reading_speed_factor, ref.mean_fixations)
        caps = [
            max(1, sum(len(line_slots(b)) for b in doc.layout.sentences.get(s, ())))
            for s in ref.sentence_indices
        ]
        cap_sum = sum(caps)
        allocated = 0
        for k, s in enumerate(ref.sentence_indices):
            if k == len(ref.sentence_indices) - 1:
                budgets[s] += total - allocated
            else:
                share = round(total * caps[k] / cap_sum)
                budgets[s] += share
                allocated += share
    for idx, text in enumerate(doc.sentences):
        if idx not in ref_sentences:
            budgets[idx] = _count_for(
                profile.reading_speed_factor,
                len(text.split()) * profile.filler_fixations_per_word,
            )

    skipped = {
        idx for idx in range(len(doc.sentences))
        if rng.random() < profile.skip_probability
    }

    samples: list[GazeSample] = []

    def emit_fixation(x: float, y: float) -> None:
        duration = profile.fixation_median_ms * math.exp(
            profile.fixation_sigma * rng.gauss(0.0, 1.0)
        )
        lo, hi = profile.fixation_clip_ms
        duration = min(hi, max(lo, duration))
        # 13 intervals (~108ms) keeps every synthesized fixation safely above
        # the detector's 100ms minimum despite timestamp rounding
        intervals = max(13, round(duration / SAMPLE_PERIOD_MS))
        jx = rng.uniform(-profile.noise_px, profile.noise_px) if profile.noise_px else 0.0
        jy = rng.uniform(-profile.noise_px, profile.noise_px) if profile.noise_px else 0.0
        px = x + profile.offset_px[0] + jx
        py = y + profile.offset_px[1] + jy
        for _ in range(intervals + 1):
            # timestamps derive from the sample index, not accumulation
            samples.append(GazeSample(
                timestamp_ms=len(samples) * SAMPLE_PERIOD_MS, x=px, y=py,
            ))

    def read_sentence(idx: int, count: int) -> None:
        slots: list[tuple[float, float]] = []
        for box in doc.layout.sentences.get(idx, ()):
            slots.extend(line_slots(box))
        if not slots or count <= 0:
            return
        for k in range(count):
            x, y = slots[k % len(slots)]
            emit_fixation(x, y)

    order = [i for i in range(len(doc.sentences)) if i not in skipped]
    for pos, idx in enumerate(order):
        read_sentence(idx, budgets[idx])
        if pos > 0 and rng.random() < profile.revisit_probability:
            back = order[rng.randrange(pos)]
            read_sentence(back, max(1, math.ceil(budgets[back] * 0.3)))
    return samples


@dataclass(frozen=True)
class DocumentReplay:
    """Replay outcome of one document viewing."""

    doc_id: str
    available: int
    triggers: tuple[TriggerEvent, ...]
    sample_count: int
    invalid_count: int
    fixation_count: int
    heatmap: Optional[tuple[tuple[float, ...], ...]] = None


@dataclass(frozen=True)
class ReplayReport:
    documents: tuple[DocumentReplay, ...]
    participant_id: str = ""

    @property
    def triggered_count(self) -> int:
        return sum(len(d.triggers) for d in self.documents)

    @property
    def available_count(self) -> int:
        return sum(d.available for d in self.documents)

    @property
    def trigger_percentage(self) -> float:
        avail = self.available_count
        return self.triggered_count / avail if avail else 0.0

    @property
    def invalid_sample_ratio(self) -> float:
        total = sum(d.sample_count for d in self.documents)
        bad = sum(d.invalid_count for d in self.documents)
        return bad / total if total else 0.0


def replay(
    samples: Sequence[GazeSample],
    doc: MSNVDocument,
    config: EngineConfig = EngineConfig(),
    params: GazeParams = GazeParams(),
    bounds: Rect = DEFAULT_DISPLAY,
    with_heatmap: bool = False,
) -> ReplayReport:
    """Run one trace through gap filling, streaming fixation detection, and
    the intervention engine. Deterministic in its inputs."""
    invalid = sum(1 for s in samples if not validate_sample(s, bounds))
    filled = interpolate_gaps(samples, params.max_gap_ms, bounds)
    stream = FixationStream(params, bounds)
    engine = InterventionEngine(doc, config)
    fixations = []
    for s in filled:
        for fx in stream.ingest(s):
            fixations.append(fx)
            engine.on_fixation(fx)
    for fx in stream.finish():
        fixations.append(fx)
        engine.on_fixation(fx)
    grid = None
    if with_heatmap:
        grid = tuple(tuple(row) for row in heatmap(fixations, HEATMAP_CELL_PX, bounds))
    record = DocumentReplay(
        doc_id=doc.id,
        available=len(doc.references),
        triggers=tuple(engine.trigger_log),
        sample_count=len(samples),
        invalid_count=invalid,
        fixation_count=len(fixations),
        heatmap=grid,
    )
    return ReplayReport(documents=(record,))


def merge_reports(reports: Sequence[ReplayReport], participant_id: str = "") -> ReplayReport:
    """Combine per-document replays into one participant-level report."""
    docs: list[DocumentReplay] = []
    for r in reports:
        docs.extend(r.documents)
    return ReplayReport(documents=tuple(docs), participant_id=participant_id)


def dumps_report(report: ReplayReport) -> str:
    raw = {
        "format": REPORT_FORMAT_TAG,
        "participantId": report.participant_id,
        "documents": [
            {
                "docId": d.doc_id,
                "available": d.available,
                "sampleCount": d.sample_count,
                "invalidCount": d.invalid_count,
                "fixationCount": d.fixation_count,
                "triggers": [
                    {"refId": t.reference_id, "ordinal": t.ordinal, "tMs": t.t_ms}
                    for t in d.triggers
                ],
                "heatmap": (
                    None if d.heatmap is None
                    else {"cellPx": HEATMAP_CELL_PX, "cells": [list(r) for r in d.heatmap]}
                ),
            }
            for d in report.documents
        ],
        "triggeredCount": report.triggered_count,
        "availableCount": report.available_count,
        "triggerPercentage": report.trigger_percentage,
        "invalidSampleRatio": report.invalid_sample_ratio,
    }
    return json.dumps(raw, indent=2) + "\n"


def loads_report(text: str) -> ReplayReport:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"malformed report: {e}") from None
    if not isinstance(raw, dict) or raw.get("format") != REPORT_FORMAT_TAG:
        raise ValueError(f"report must carry format {REPORT_FORMAT_TAG!r}")
    docs = []
    for d in raw.get("documents") or []:
        hm = d.get("heatmap")
        docs.append(DocumentReplay(
            doc_id=str(d["docId"]),
            available=int(d["available"]),
            triggers=tuple(
                TriggerEvent(reference_id=str(t["refId"]), ordinal=int(t["ordinal"]),
                             t_ms=float(t["tMs"]))
                for t in d.get("triggers") or []
            ),
            sample_count=int(d.get("sampleCount", 0)),
            invalid_count=int(d.get("invalidCount", 0)),
            fixation_count=int(d.get("fixationCount", 0)),
            heatmap=(
                None if hm is None
                else tuple(tuple(float(v) for v in row) for row in hm["cells"])
            ),
        ))
    return ReplayReport(documents=tuple(docs),
                        participant_id=str(raw.get("participantId", "")))


KEEP = "keep"
DISCARD_INVALID_GAZE = "discard_invalid_gaze"
FLAG_LOW_TRIGGER = "flag_low_trigger"


@dataclass(frozen=True)
class ScreeningResult:
    decision: str
    heatmap_export: Optional[str] = None


def screen_participant(
    report: ReplayReport,
    invalid_threshold: float = 0.25,
    low_trigger_threshold: float = 0.75,
) -> ScreeningResult:
    """Screening policy: discard on excessive invalid samples, flag low
    triggerers for heat-map inspection, keep the rest. Inspection itself
    stays a human decision; flagged results name a heat-map export target."""
    if report.invalid_sample_ratio > invalid_threshold:
        return ScreeningResult(decision=DISCARD_INVALID_GAZE)
    if report.trigger_percentage < low_trigger_threshold:
        name = report.participant_id or "participant"
        return ScreeningResult(
            decision=FLAG_LOW_TRIGGER,
            heatmap_export=f"{name}-heatmap.json",
        )
    return ScreeningResult(decision=KEEP)


@dataclass(frozen=True)
class CohortSummary:
    n: int
    mean_trigger_percentage: float
    sd_trigger_percentage: float
    above_75: int
    below_or_at_75: int
    histogram: tuple[int, ...]  # ten 10%-wide bins

    @property
    def above_75_fraction(self) -> float:
        return self.above_75 / self.n if self.n else 0.0

    def to_json(self) -> str:
        return json.dumps({
            "format": "cohort/1",
            "n": self.n,
            "meanTriggerPercentage": self.mean_trigger_percentage,
            "sdTriggerPercentage": self.sd_trigger_percentage,
            "above75": self.above_75,
            "above75Fraction": self.above_75_fraction,
            "belowOrAt75": self.below_or_at_75,
            "histogram": list(self.histogram),
        }, indent=2) + "\n"


def cohort_report(reports: Sequence[ReplayReport]) -> CohortSummary:
    """Trigger-percentage summary over a cohort of participant reports."""
    if not reports:
        raise ValueError("cohort_report needs at least one report")
    pcts = [r.trigger_percentage for r in reports]
    n = len(pcts)
    mean = sum(pcts) / n
    sd = math.sqrt(sum((p - mean) ** 2 for p in pcts) / (n - 1)) if n > 1 else 0.0
    bins = [0] * 10
    for p in pcts:
        bins[min(9, int(p * 10))] += 1
    above = sum(1 for p in pcts if p > 0.75)
    return CohortSummary(
        n=n,
        mean_trigger_percentage=mean,
        sd_trigger_percentage=sd,
        above_75=above,
        below_or_at_75=n - above,
        histogram=tuple(bins),
    )
