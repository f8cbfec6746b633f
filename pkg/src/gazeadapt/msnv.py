"""Document model for narrative text with an embedded bar chart (`msnv/1`).

A document carries its sentences, the references linking sentence spans to
chart bars, the chart itself, and a layout block with the screen geometry of
every sentence line, reference AOI, and bar. Documents are parsed and
validated as a whole: a parse either returns a fully resolved document or
fails with every violation listed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from .color import RGB, BLACK, contrast_ratio, lighten_to_contrast, parse_hex, to_hex
from .gaze import AOI, DEFAULT_DISPLAY, Rect

FORMAT_TAG = "msnv/1"

CHART_KINDS = ("simple", "stacked", "grouped")

# Observed corpus ranges used by validate_corpus for out-of-range warnings.
CORPUS_RANGES = {
    "words": (43, 228),
    "sentences": (2, 14),
    "references": (1, 7),
    "data_points": (4, 63),
    "referenced_data_points": (2, 24),
}


class DocumentError(ValueError):
    """Invalid document; ``violations`` lists every individual problem."""

    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class Reference:
    id: str
    sentence_indices: tuple[int, ...]
    data_point_ids: tuple[str, ...]
    mean_fixations: float


@dataclass(frozen=True)
class Bar:
    id: str
    label: str
    value: float
    color: RGB
    series: Optional[str] = None


@dataclass(frozen=True)
class BarChart:
    kind: str
    bars: tuple[Bar, ...]
    x_axis: str = ""
    y_axis: str = ""


@dataclass(frozen=True)
class Layout:
    """Screen geometry: AOI rects per reference, line boxes per sentence,
    bounding rect per bar."""

    aois: dict[str, tuple[Rect, ...]]
    bars: dict[str, Rect]
    sentences: dict[int, tuple[Rect, ...]]


@dataclass(frozen=True)
class QuestionItem:
    """Post-reading item: a 1..scale rating or a multiple-choice question."""

    kind: str  # "rating" | "choice"
    prompt: str
    scale: int = 5
    options: tuple[str, ...] = ()
    answer: Optional[int] = None


@dataclass(frozen=True)
class MSNVDocument:
    id: str
    title: str
    sentences: tuple[str, ...]
    references: tuple[Reference, ...]
    chart: BarChart
    layout: Layout
    source: str = ""
    items: tuple[QuestionItem, ...] = ()


@dataclass(frozen=True)
class CorpusProfile:
    doc_id: str
    words: int
    sentences: int
    references: int
    data_points: int
    referenced_data_points: int


def _rect_from_json(obj, where: str, errs: list[str]) -> Rect:
    try:
        return Rect(float(obj["x"]), float(obj["y"]), float(obj["w"]), float(obj["h"]))
    except (KeyError, TypeError, ValueError):
        errs.append(f"{where}: expected rect object with x, y, w, h")
        return Rect(0, 0, 0, 0)


def _rect_to_json(r: Rect) -> dict:
    return {"x": r.x, "y": r.y, "w": r.w, "h": r.h}


def parse_document(
    data: Union[bytes, str], bounds: Rect = DEFAULT_DISPLAY
) -> MSNVDocument:
    """Parse and fully validate one `msnv/1` document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as e:
        raise DocumentError([f"malformed JSON: {e}"]) from None
    if not isinstance(raw, dict):
        raise DocumentError(["document root must be an object"])

    errs: list[str] = []
    if raw.get("format") != FORMAT_TAG:
        errs.append(f"format key must be {FORMAT_TAG!r}, got {raw.get('format')!r}")

    doc_id = str(raw.get("id", ""))
    if not doc_id:
        errs.append("missing document id")
    title = str(raw.get("title", ""))
    source = str(raw.get("source", ""))

    sentences = raw.get("sentences")
    if not isinstance(sentences, list) or not sentences:
        errs.append("document must carry at least one sentence")
        sentences = []
    sentences = tuple(str(s) for s in sentences)

    chart, bar_ids = _parse_chart(raw.get("chart"), errs)
    references = _parse_references(raw.get("references"), len(sentences), bar_ids, errs)
    layout = _parse_layout(raw.get("layout"), references, bar_ids, len(sentences), bounds, errs)
    items = _parse_items(raw.get("items", []), errs)

    _check_aoi_disjoint(layout, errs)

    if errs:
        raise DocumentError(errs)
    return MSNVDocument(
        id=doc_id, title=title, sentences=sentences, references=references,
        chart=chart, layout=layout, source=source, items=items,
    )


def _parse_chart(raw, errs: list[str]) -> tuple[BarChart, list[str]]:
    if not isinstance(raw, dict):
        errs.append("missing chart block")
        return BarChart(kind="simple", bars=()), []
    kind = raw.get("kind")
    if kind not in CHART_KINDS:
        errs.append(f"chart kind must be one of {CHART_KINDS}, got {kind!r}")
        kind = "simple"
    bars: list[Bar] = []
    seen: set[str] = set()
    for i, b in enumerate(raw.get("bars") or []):
        if not isinstance(b, dict):
            errs.append(f"chart bar #{i} must be an object")
            continue
        bid = str(b.get("id", ""))
        if not bid:
            errs.append(f"chart bar #{i} is missing an id")
        if bid in seen:
            errs.append(f"duplicate bar id {bid!r}")
        seen.add(bid)
        try:
            value = float(b["value"])
            if not math.isfinite(value):
                errs.append(f"bar {bid!r} value is not finite")
        except (KeyError, TypeError, ValueError):
            errs.append(f"bar {bid!r} is missing a numeric value")
            value = 0.0
        try:
            color = parse_hex(str(b.get("color", "")))
        except ValueError:
            errs.append(f"bar {bid!r} color must be #RRGGBB, got {b.get('color')!r}")
            color = (0, 0, 0)
        series = b.get("series")
        if kind in ("stacked", "grouped") and series is None:
            errs.append(f"bar {bid!r}: {kind} charts require a series label")
        bars.append(Bar(id=bid, label=str(b.get("label", "")), value=value,
                        color=color, series=None if series is None else str(series)))
    axes = raw.get("axes") or {}
    chart = BarChart(kind=kind, bars=tuple(bars),
                     x_axis=str(axes.get("x", "")), y_axis=str(axes.get("y", "")))
    return chart, [b.id for b in bars]


def _parse_references(
    raw, n_sentences: int, bar_ids: list[str], errs: list[str]
) -> tuple[Reference, ...]:
    if not isinstance(raw, list) or not raw:
        errs.append("document must carry at least one reference")
        return ()
    known = set(bar_ids)
    refs: list[Reference] = []
    seen: set[str] = set()
    for i, r in enumerate(raw):
        if not isinstance(r, dict):
            errs.append(f"reference #{i} must be an object")
            continue
        rid = str(r.get("id", ""))
        if not rid:
            errs.append(f"reference #{i} is missing an id")
        if rid in seen:
            errs.append(f"duplicate reference id {rid!r}")
        seen.add(rid)
        sent = r.get("sentences")
        if not isinstance(sent, list) or not sent:
            errs.append(f"reference {rid!r} must list at least one sentence index")
            sent = []
        for s in sent:
            if not isinstance(s, int) or not 0 <= s < n_sentences:
                errs.append(f"reference {rid!r} cites unknown sentence index {s!r}")
        points = r.get("dataPoints")
        if not isinstance(points, list) or not points:
            errs.append(f"reference {rid!r} must list at least one data point")
            points = []
        for p in points:
            if p not in known:
                errs.append(f"reference {rid!r} cites unknown bar id {p!r}")
        try:
            mean_fix = float(r["meanFixations"])
        except (KeyError, TypeError, ValueError):
            errs.append(f"reference {rid!r} is missing meanFixations")
            mean_fix = 1.0
        if mean_fix <= 0:
            errs.append(f"reference {rid!r} meanFixations must be positive")
        refs.append(Reference(
            id=rid,
            sentence_indices=tuple(s for s in sent if isinstance(s, int)),
            data_point_ids=tuple(str(p) for p in points),
            mean_fixations=mean_fix,
        ))
    return tuple(refs)


def _parse_layout(
    raw, references: tuple[Reference, ...], bar_ids: list[str],
    n_sentences: int, bounds: Rect, errs: list[str],
) -> Layout:
    if not isinstance(raw, dict):
        errs.append("missing layout block")
        return Layout(aois={}, bars={}, sentences={})
    aois: dict[str, tuple[Rect, ...]] = {}
    for rid, rects in (raw.get("aois") or {}).items():
        if not isinstance(rects, list):
            errs.append(f"layout.aois[{rid!r}] must be a list of rects")
            continue
        parsed = tuple(_rect_from_json(r, f"layout.aois[{rid!r}]", errs) for r in rects)
        aois[str(rid)] = parsed
        for r in parsed:
            if not _rect_within(r, bounds):
                errs.append(f"layout.aois[{rid!r}] rect leaves the display bounds")
    for ref in references:
        if ref.id not in aois or not aois[ref.id]:
            errs.append(f"layout has no AOI rects for reference {ref.id!r}")
    bars: dict[str, Rect] = {}
    for bid, rect in (raw.get("bars") or {}).items():
        bars[str(bid)] = _rect_from_json(rect, f"layout.bars[{bid!r}]", errs)
    for bid in bar_ids:
        if bid not in bars:
            errs.append(f"layout has no rect for bar {bid!r}")
    sentences: dict[int, tuple[Rect, ...]] = {}
    for key, rects in (raw.get("sentences") or {}).items():
        try:
            idx = int(key)
        except (TypeError, ValueError):
            errs.append(f"layout.sentences key {key!r} is not a sentence index")
            continue
        if not 0 <= idx < n_sentences:
            errs.append(f"layout.sentences cites unknown sentence index {idx}")
        if not isinstance(rects, list):
            errs.append(f"layout.sentences[{key}] must be a list of rects")
            continue
        sentences[idx] = tuple(
            _rect_from_json(r, f"layout.sentences[{key}]", errs) for r in rects
        )
    return Layout(aois=aois, bars=bars, sentences=sentences)


def _parse_items(raw, errs: list[str]) -> tuple[QuestionItem, ...]:
    if not isinstance(raw, list):
        errs.append("items must be a list")
        return ()
    items: list[QuestionItem] = []
    for i, it in enumerate(raw):
        if not isinstance(it, dict):
            errs.append(f"item #{i} must be an object")
            continue
        kind = it.get("kind")
        prompt = str(it.get("prompt", ""))
        if kind == "rating":
            scale = it.get("scale", 5)
            if not isinstance(scale, int) or scale < 2:
                errs.append(f"item #{i}: rating scale must be an integer >= 2")
                scale = 5
            items.append(QuestionItem(kind="rating", prompt=prompt, scale=scale))
        elif kind == "choice":
            options = tuple(str(o) for o in it.get("options") or ())
            answer = it.get("answer")
            if len(options) < 2:
                errs.append(f"item #{i}: choice item needs at least two options")
            if not isinstance(answer, int) or not 0 <= answer < max(len(options), 1):
                errs.append(f"item #{i}: answer must index into options")
                answer = 0
            items.append(QuestionItem(kind="choice", prompt=prompt,
                                      options=options, answer=answer))
        else:
            errs.append(f"item #{i}: kind must be 'rating' or 'choice', got {kind!r}")
    return tuple(items)


def _rect_within(r: Rect, bounds: Rect) -> bool:
    return (
        r.x >= bounds.x and r.y >= bounds.y
        and r.x + r.w <= bounds.x + bounds.w
        and r.y + r.h <= bounds.y + bounds.h
    )


def _check_aoi_disjoint(layout: Layout, errs: list[str]) -> None:
    ids = sorted(layout.aois)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if any(ra.intersects(rb) for ra in layout.aois[a] for rb in layout.aois[b]):
                errs.append(f"references {a!r} and {b!r} have overlapping AOIs")


def serialize_document(doc: MSNVDocument) -> str:
    """Inverse of parse_document: parse(serialize(doc)) == doc."""
    raw = {
        "format": FORMAT_TAG,
        "id": doc.id,
        "title": doc.title,
        "sentences": list(doc.sentences),
        "references": [
            {
                "id": r.id,
                "sentences": list(r.sentence_indices),
                "dataPoints": list(r.data_point_ids),
                "meanFixations": r.mean_fixations,
            }
            for r in doc.references
        ],
        "chart": {
            "kind": doc.chart.kind,
            "bars": [
                {
                    "id": b.id,
                    "label": b.label,
                    **({"series": b.series} if b.series is not None else {}),
                    "value": b.value,
                    "color": to_hex(b.color),
                }
                for b in doc.chart.bars
            ],
            "axes": {"x": doc.chart.x_axis, "y": doc.chart.y_axis},
        },
        "layout": {
            "aois": {rid: [_rect_to_json(r) for r in rects]
                     for rid, rects in doc.layout.aois.items()},
            "bars": {bid: _rect_to_json(r) for bid, r in doc.layout.bars.items()},
            "sentences": {str(idx): [_rect_to_json(r) for r in rects]
                          for idx, rects in doc.layout.sentences.items()},
        },
        "source": doc.source,
        "items": [
            (
                {"kind": "rating", "prompt": it.prompt, "scale": it.scale}
                if it.kind == "rating"
                else {"kind": "choice", "prompt": it.prompt,
                      "options": list(it.options), "answer": it.answer}
            )
            for it in doc.items
        ],
    }
    return json.dumps(raw, indent=2) + "\n"


def document_profile(doc: MSNVDocument) -> CorpusProfile:
    referenced = {p for r in doc.references for p in r.data_point_ids}
    return CorpusProfile(
        doc_id=doc.id,
        words=sum(len(s.split()) for s in doc.sentences),
        sentences=len(doc.sentences),
        references=len(doc.references),
        data_points=len(doc.chart.bars),
        referenced_data_points=len(referenced),
    )


def validate_corpus(
    docs: Sequence[MSNVDocument],
) -> tuple[list[CorpusProfile], list[str]]:
    """Profile each document and warn when it falls outside the observed
    corpus ranges. Warnings are advisory, never errors."""
    profiles = [document_profile(d) for d in docs]
    warnings: list[str] = []
    for p in profiles:
        for name, (lo, hi) in CORPUS_RANGES.items():
            v = getattr(p, name)
            if not lo <= v <= hi:
                warnings.append(
                    f"document {p.doc_id!r}: {name}={v} outside observed range [{lo}, {hi}]"
                )
    return profiles, warnings


def adjust_bar_colors(doc: MSNVDocument, min_contrast: float = 4.5) -> MSNVDocument:
    """Normalize bar colors so each keeps ``min_contrast`` against the black
    highlight outline. Compliant bars are untouched; others are lightened with
    their hue preserved. Idempotent."""
    new_bars = tuple(
        replace(b, color=lighten_to_contrast(b.color, min_contrast, BLACK))
        for b in doc.chart.bars
    )
    if all(nb.color == b.color for nb, b in zip(new_bars, doc.chart.bars)):
        return doc
    return replace(doc, chart=replace(doc.chart, bars=new_bars))


def reference_aois(doc: MSNVDocument) -> list[AOI]:
    """One AOI per reference from the layout's per-reference line boxes."""
    errs: list[str] = []
    for ref in doc.references:
        if not doc.layout.aois.get(ref.id):
            errs.append(f"layout has no AOI rects for reference {ref.id!r}")
    _check_aoi_disjoint(doc.layout, errs)
    if errs:
        raise DocumentError(errs)
    return [
        AOI(id=ref.id, owner=ref.id, rects=doc.layout.aois[ref.id])
        for ref in doc.references
    ]
