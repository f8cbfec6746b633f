"""Deterministic builder for the bundled 14-document fixture corpus.

The corpus is sized like the study material this package is tooled for:
35 references across 14 documents, per-reference mean fixation counts from
8 to 45 averaging exactly 24, per-document word/sentence/bar counts inside
the observed ranges, and a line-box layout wide enough for the trace
synthesizer to place every fixation at a distinct slot.
"""
from __future__ import annotations

import random

from .color import lighten_to_contrast, to_hex
from .gaze import Rect
from .msnv import (
    Bar,
    BarChart,
    Layout,
    MSNVDocument,
    QuestionItem,
    Reference,
)

# text column geometry (display 1280x1024)
TEXT_X = 40.0
TEXT_W = 1140.0
TEXT_TOP = 60.0
LINE_H = 28.0
LINE_PITCH = 44.0
# chart band below the text column
CHART_TOP = 700.0
CHART_BASE = 990.0
CHART_X = 60.0
CHART_W = 1160.0

# fixation slot grid used by the synthesizer: one slot every SLOT_STEP px,
# kept SLOT_MARGIN inside the line box; the step exceeds the detector's
# dispersion threshold so neighbouring slots never merge into one fixation
SLOT_STEP = 40.0
SLOT_MARGIN = 20.0
SLOTS_PER_LINE = int((TEXT_W - 2 * SLOT_MARGIN) // SLOT_STEP) + 1

# per-document reference mean-fixation counts: 35 references, sum 840
# (mean 24.0), extremes 8 and 45
DOC_MEAN_FIXATIONS: tuple[tuple[int, ...], ...] = (
    (8, 45, 19),
    (9, 44, 20),
    (11, 43, 22),
    (13, 36, 24),
    (16, 34, 25),
    (21, 32, 19),
    (23, 31, 20),
    (33, 30),
    (45, 12),
    (29, 15),
    (27, 17),
    (26, 22),
    (25, 15),
    (12, 17),
)

_TOPICS = (
    "regional transit ridership", "household energy use", "library lending",
    "urban tree cover", "grain exports", "museum attendance",
    "broadband uptake", "recycling rates", "harbor traffic",
    "apprenticeship placements", "vaccination coverage", "rainfall totals",
    "bicycle commuting", "night-shift staffing",
)

_WORDS = (
    "survey", "figures", "quarter", "region", "growth", "decline", "steady",
    "report", "contrast", "overall", "records", "period", "totals", "share",
    "annual", "levels", "change", "district", "category", "margin", "trend",
    "value", "summer", "winter", "index", "output", "sector", "program",
)

_PALETTE = (
    (204, 102, 102), (102, 153, 204), (119, 178, 119), (211, 160, 86),
    (153, 119, 187), (94, 178, 178), (196, 124, 160), (148, 148, 90),
)

_KINDS = ("simple", "stacked", "grouped")


def _sentence(rng: random.Random, words: int) -> str:
    picked = [rng.choice(_WORDS) for _ in range(words)]
    picked[0] = picked[0].capitalize()
    return " ".join(picked) + "."


def line_slots(box: Rect) -> list[tuple[float, float]]:
    """Fixation slot centers of one line box, left to right."""
    xs = []
    x = box.x + SLOT_MARGIN
    while x <= box.x + box.w - SLOT_MARGIN:
        xs.append((x, box.y + box.h / 2.0))
        x += SLOT_STEP
    return xs


def build_document(index: int) -> MSNVDocument:
    means = DOC_MEAN_FIXATIONS[index]
    rng = random.Random(7000 + index)
    kind = _KINDS[index % 3]
    doc_id = f"msnv-{index:02d}"

    # sentence plan: filler, then one sentence per reference (the last
    # document spreads its final reference over two sentences), then filler
    ref_line_counts = [max(1, -(-m // SLOTS_PER_LINE)) for m in means]
    two_sentence_ref = index == len(DOC_MEAN_FIXATIONS) - 1

    sentences: list[str] = []
    sentence_lines: list[int] = []
    ref_sentence_indices: list[tuple[int, ...]] = []

    def add_sentence(lines: int, words_per_line: int) -> int:
        sentences.append(_sentence(rng, words_per_line * lines))
        sentence_lines.append(lines)
        return len(sentences) - 1

    add_sentence(1, 10)  # leading filler
    for j, m in enumerate(means):
        if two_sentence_ref and j == len(means) - 1:
            a = add_sentence(1, 13)
            b = add_sentence(1, 13)
            ref_sentence_indices.append((a, b))
        else:
            ref_sentence_indices.append((add_sentence(ref_line_counts[j], 13),))
    add_sentence(1, 10)  # trailing filler

    # line-box layout, one pitch per line, boxes disjoint across sentences
    sentence_boxes: dict[int, tuple[Rect, ...]] = {}
    y = TEXT_TOP
    for idx, lines in enumerate(sentence_lines):
        boxes = []
        for _ in range(lines):
            boxes.append(Rect(TEXT_X, y, TEXT_W, LINE_H))
            y += LINE_PITCH
        sentence_boxes[idx] = tuple(boxes)

    n_bars = 6 + (index % 9)
    labels = [f"{_TOPICS[index].split()[0].capitalize()} {chr(65 + i)}" for i in range(n_bars)]
    bars = []
    bar_w = (CHART_W / n_bars) * 0.7
    gap = (CHART_W / n_bars) * 0.3
    bar_rects: dict[str, Rect] = {}
    for i in range(n_bars):
        value = float(rng.randint(12, 95))
        color = lighten_to_contrast(_PALETTE[i % len(_PALETTE)], 4.5)
        bid = f"b{i}"
        bars.append(Bar(
            id=bid, label=labels[i], value=value, color=color,
            series=(f"series {1 + i % 2}" if kind != "simple" else None),
        ))
        h = 40.0 + (value / 95.0) * (CHART_BASE - CHART_TOP - 50.0)
        x = CHART_X + i * (bar_w + gap) + gap / 2.0
        bar_rects[bid] = Rect(round(x, 1), round(CHART_BASE - h, 1), round(bar_w, 1), round(h, 1))

    references = []
    aois: dict[str, tuple[Rect, ...]] = {}
    for j, m in enumerate(means):
        rid = f"r{j}"
        cited = (f"b{(2 * j) % n_bars}", f"b{(2 * j + 1) % n_bars}")
        references.append(Reference(
            id=rid,
            sentence_indices=ref_sentence_indices[j],
            data_point_ids=cited,
            mean_fixations=float(m),
        ))
        rects: list[Rect] = []
        for s in ref_sentence_indices[j]:
            rects.extend(sentence_boxes[s])
        aois[rid] = tuple(rects)

    items = (
        QuestionItem(kind="rating", prompt="This document was easy to understand.", scale=5),
        QuestionItem(kind="rating", prompt="I would want to read more about this topic.", scale=5),
        QuestionItem(
            kind="choice",
            prompt="Which category appears in the chart?",
            options=(labels[0], f"{_TOPICS[(index + 5) % len(_TOPICS)].split()[0].capitalize()} Z"),
            answer=0,
        ),
        QuestionItem(
            kind="choice",
            prompt="How many categories does the chart compare?",
            options=(str(n_bars), str(n_bars + 3)),
            answer=0,
        ),
        QuestionItem(
            kind="choice",
            prompt="Pick the better alternative title.",
            options=(
                f"Tracking {_TOPICS[index]}",
                f"A history of {_TOPICS[(index + 3) % len(_TOPICS)]}",
            ),
            answer=0,
        ),
    )

    return MSNVDocument(
        id=doc_id,
        title=f"Notes on {_TOPICS[index]}",
        sentences=tuple(sentences),
        references=tuple(references),
        chart=BarChart(kind=kind, bars=tuple(bars), x_axis="category", y_axis="value"),
        layout=Layout(aois=aois, bars=bar_rects, sentences=sentence_boxes),
        source="gazeadapt synthetic fixture corpus",
        items=items,
    )


def build_corpus() -> list[MSNVDocument]:
    """The bundled 14-document corpus; deterministic, profile-range clean."""
    return [build_document(i) for i in range(len(DOC_MEAN_FIXATIONS))]
