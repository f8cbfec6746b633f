"""Descriptive statistics and multiple-comparison adjustment for logged runs.

Model fitting stays out: this module produces tidy per-task tables, group
summaries, tertile/median splits, Benjamini-Hochberg adjusted p-values, and
perception-questionnaire summaries, all consumable by any statistics
environment.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

ANALYSIS_FORMAT_TAG = "analysis/1"

MEASURES = ("accuracy", "time_on_task_ms", "interest", "ease")


@dataclass(frozen=True)
class MeasureRow:
    """One task outcome: what one participant did with one document."""

    participant_id: str
    group: str
    doc_id: str
    accuracy: float
    time_on_task_ms: float
    interest: float
    ease: float
    scores: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be within [0, 1], got {self.accuracy}")


@dataclass(frozen=True)
class GroupStats:
    n: int
    mean: float
    sd: Optional[float]  # absent (None) for singleton groups


@dataclass(frozen=True)
class AdjustedPValues:
    raw: tuple[float, ...]
    adjusted: tuple[float, ...]


def _mean_sd(values: Sequence[float]) -> GroupStats:
    n = len(values)
    # fsum is exactly rounded, making the stats independent of row order
    mean = math.fsum(values) / n
    if n < 2:
        return GroupStats(n=n, mean=mean, sd=None)
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return GroupStats(n=n, mean=mean, sd=math.sqrt(var))


def summarize(
    rows: Sequence[MeasureRow], by: Sequence[str] = ("group",)
) -> dict[tuple[str, ...], dict[str, GroupStats]]:
    """Per-group sample mean and sample SD (n-1) of every measure."""
    if not rows:
        raise ValueError("summarize needs at least one row")
    for key in by:
        if key not in ("group", "participant_id", "doc_id"):
            raise ValueError(f"unknown grouping key {key!r}")
    groups: dict[tuple[str, ...], list[MeasureRow]] = {}
    for row in rows:
        k = tuple(getattr(row, key) for key in by)
        groups.setdefault(k, []).append(row)
    return {
        k: {m: _mean_sd([getattr(r, m) for r in members]) for m in MEASURES}
        for k, members in groups.items()
    }


def tertile_split(scores: Sequence[float]) -> list[str]:
    """Three-way split at the 1/3 and 2/3 empirical quantiles.

    Values tied with a boundary go to the lower bin, so an all-equal input is
    all Low."""
    n = len(scores)
    if n < 3:
        raise ValueError("tertile_split needs at least 3 values")
    ordered = sorted(scores)
    q1 = ordered[math.ceil(n / 3) - 1]
    q2 = ordered[math.ceil(2 * n / 3) - 1]
    out = []
    for v in scores:
        if v <= q1:
            out.append("Low")
        elif v <= q2:
            out.append("Medium")
        else:
            out.append("High")
    return out


def median_split(values: Sequence[float]) -> list[str]:
    """Two-way split at the median; values equal to the median go Low."""
    n = len(values)
    if n < 2:
        raise ValueError("median_split needs at least 2 values")
    ordered = sorted(values)
    mid = n // 2
    median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0
    return ["Low" if v <= median else "High" for v in values]


def bh_adjust(p_values: Sequence[float]) -> AdjustedPValues:
    """Benjamini-Hochberg step-up adjustment, reported in input order.

    For sorted p(1) <= ... <= p(m): adjusted(i) = min over j >= i of
    min(1, m * p(j) / j)."""
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-values must be within [0, 1], got {p}")
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        p = p_values[idx]
        # m/rank >= 1, so the scaled value can never fall below p; guard the
        # one-ulp rounding loss of m*p/rank
        scaled = max(p, min(1.0, m * p / rank))
        running = min(running, scaled)
        adjusted[idx] = max(p, running)
    return AdjustedPValues(raw=tuple(p_values), adjusted=tuple(adjusted))


@dataclass(frozen=True)
class ItemSummary:
    mean: float
    mode: Union[int, float, tuple[int, ...]]
    sd: Optional[float]
    min: int
    max: int


def perception_summary(
    ratings: Mapping[str, Sequence[int]], scale: int = 7
) -> dict[str, ItemSummary]:
    """Per-item mean/mode/SD/min/max for 1..scale ratings.

    When exactly two adjacent values tie for the mode, the midpoint is
    reported (a seven-point item can legitimately have a mode of 2.5); wider
    ties report the full tied set."""
    out: dict[str, ItemSummary] = {}
    for item, values in ratings.items():
        if not values:
            raise ValueError(f"item {item!r} has no ratings")
        for v in values:
            if not isinstance(v, int) or not 1 <= v <= scale:
                raise ValueError(f"item {item!r}: rating {v!r} outside 1..{scale}")
        counts = Counter(values)
        top = max(counts.values())
        modal = sorted(v for v, c in counts.items() if c == top)
        mode: Union[int, float, tuple[int, ...]]
        if len(modal) == 1:
            mode = modal[0]
        elif len(modal) == 2 and modal[1] - modal[0] == 1:
            mode = (modal[0] + modal[1]) / 2.0
        else:
            mode = tuple(modal)
        stats = _mean_sd(list(map(float, values)))
        out[item] = ItemSummary(
            mean=stats.mean, mode=mode, sd=stats.sd, min=min(values), max=max(values)
        )
    return out


# --- tables and reports -----------------------------------------------------

_CSV_COLUMNS = ("participant", "group", "doc", "accuracy", "time_on_task_ms",
                "interest", "ease")


def rows_to_csv(rows: Sequence[MeasureRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(_CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.participant_id, r.group, r.doc_id, r.accuracy,
                         r.time_on_task_ms, r.interest, r.ease])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[MeasureRow]:
    """Flat delimited table with a declared header row."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty table") from None
    missing = [c for c in _CSV_COLUMNS if c not in header]
    if missing:
        raise ValueError(f"table header is missing columns: {missing}")
    idx = {c: header.index(c) for c in _CSV_COLUMNS}
    rows = []
    for rec in reader:
        if not rec:
            continue
        rows.append(MeasureRow(
            participant_id=rec[idx["participant"]],
            group=rec[idx["group"]],
            doc_id=rec[idx["doc"]],
            accuracy=float(rec[idx["accuracy"]]),
            time_on_task_ms=float(rec[idx["time_on_task_ms"]]),
            interest=float(rec[idx["interest"]]),
            ease=float(rec[idx["ease"]]),
        ))
    return rows


def analysis_report(
    rows: Sequence[MeasureRow],
    by: Sequence[str] = ("group",),
    perception: Optional[Mapping[str, Sequence[int]]] = None,
) -> str:
    """Bundle group summaries (and optionally perception stats) as an
    `analysis/1` JSON report."""
    summaries = summarize(rows, by=by)
    raw: dict = {
        "format": ANALYSIS_FORMAT_TAG,
        "groupedBy": list(by),
        "groups": [
            {
                "key": list(key),
                "measures": {
                    m: {"n": st.n, "mean": st.mean, "sd": st.sd}
                    for m, st in stats.items()
                },
            }
            for key, stats in sorted(summaries.items())
        ],
    }
    if perception is not None:
        psum = perception_summary(perception)
        raw["perception"] = {
            item: {
                "mean": s.mean,
                "mode": list(s.mode) if isinstance(s.mode, tuple) else s.mode,
                "sd": s.sd,
                "min": s.min,
                "max": s.max,
            }
            for item, s in psum.items()
        }
    return json.dumps(raw, indent=2) + "\n"
