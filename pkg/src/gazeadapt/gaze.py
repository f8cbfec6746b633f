"""Raw gaze stream processing: sample validation, gap filling, fixation
detection (dispersion threshold), saccades, AOI attention features, heat maps.

Everything exists in two forms where it matters: pure batch functions over
complete traces, and an incremental stream state whose output is exactly the
batch output for the same samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

SAMPLE_RATE_HZ = 120.0
SAMPLE_PERIOD_MS = 1000.0 / SAMPLE_RATE_HZ


class StreamOrderError(ValueError):
    """Raised when a sample arrives with a timestamp older than the last one."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle; membership is min-inclusive, max-exclusive."""

    x: float
    y: float
    w: float
    h: float

    def contains(self, px: float, py: float) -> bool:
        return self.x <= px < self.x + self.w and self.y <= py < self.y + self.h

    def intersects(self, other: "Rect") -> bool:
        return (
            self.x < other.x + other.w
            and other.x < self.x + self.w
            and self.y < other.y + other.h
            and other.y < self.y + self.h
        )


# 1280x1024 remote-tracker display, sampled at 120 Hz.
DEFAULT_DISPLAY = Rect(0.0, 0.0, 1280.0, 1024.0)


@dataclass(frozen=True)
class GazeSample:
    """One tracker sample. Timestamps are milliseconds from session start."""

    timestamp_ms: float
    x: float
    y: float
    left_valid: bool = True
    right_valid: bool = True
    left_pupil_mm: Optional[float] = None
    right_pupil_mm: Optional[float] = None
    eye_distance_mm: Optional[float] = None


@dataclass(frozen=True)
class Fixation:
    """A maximal run of usable samples within the dispersion threshold."""

    start_ms: float
    end_ms: float
    centroid_x: float
    centroid_y: float
    sample_count: int

    @property
    def duration_ms(self) -> float:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class Saccade:
    """Movement between two consecutive fixations."""

    from_fixation_index: int
    to_fixation_index: int
    amplitude_px: float
    duration_ms: float


@dataclass(frozen=True)
class AOI:
    """A screen region owned by a reference or chart region: a union of rects."""

    id: str
    owner: str
    rects: tuple[Rect, ...]

    def contains(self, px: float, py: float) -> bool:
        return any(r.contains(px, py) for r in self.rects)


@dataclass(frozen=True)
class AOIFeatures:
    fixation_count: int
    total_duration_ms: float
    longest_fixation_ms: float
    fixation_rate_hz: float
    proportion_of_fixations: float


@dataclass(frozen=True)
class GazeParams:
    """Fixation-detection and gap-filling parameters."""

    min_fixation_ms: float = 100.0
    dispersion_px: float = 35.0
    max_gap_ms: float = 75.0


def combine_eye_points(
    left: Optional[tuple[float, float]],
    right: Optional[tuple[float, float]],
) -> Optional[tuple[float, float]]:
    """Merge per-eye gaze points: average when both present, else the valid one."""
    if left is not None and right is not None:
        return ((left[0] + right[0]) / 2.0, (left[1] + right[1]) / 2.0)
    return left if left is not None else right


def validate_sample(sample: GazeSample, bounds: Rect = DEFAULT_DISPLAY) -> bool:
    """A sample is usable iff at least one eye is valid and it lies in bounds."""
    if not (sample.left_valid or sample.right_valid):
        return False
    return bounds.contains(sample.x, sample.y)


def interpolate_gaps(
    samples: Sequence[GazeSample],
    max_gap_ms: float = 75.0,
    bounds: Rect = DEFAULT_DISPLAY,
) -> list[GazeSample]:
    """Replace short unusable runs by linear interpolation between the flanking
    usable samples.

    A run is filled only when the flanking usable samples are at most
    ``max_gap_ms`` apart; longer gaps (and runs at either end of the trace)
    are left as they are. Output length always equals input length.
    """
    out = list(samples)
    n = len(out)
    usable = [validate_sample(s, bounds) for s in out]
    i = 0
    while i < n:
        if usable[i]:
            i += 1
            continue
        j = i
        while j < n and not usable[j]:
            j += 1
        # unusable run spans [i, j); flanks are i-1 and j
        if i > 0 and j < n:
            prev, nxt = out[i - 1], out[j]
            if nxt.timestamp_ms - prev.timestamp_ms <= max_gap_ms:
                span = nxt.timestamp_ms - prev.timestamp_ms
                for k in range(i, j):
                    t = out[k].timestamp_ms
                    f = (t - prev.timestamp_ms) / span if span > 0 else 0.5
                    out[k] = GazeSample(
                        timestamp_ms=t,
                        x=prev.x + f * (nxt.x - prev.x),
                        y=prev.y + f * (nxt.y - prev.y),
                        left_valid=True,
                        right_valid=True,
                    )
        i = j
    return out


def _dispersion(min_x: float, max_x: float, min_y: float, max_y: float) -> float:
    return (max_x - min_x) + (max_y - min_y)


def detect_fixations(
    samples: Sequence[GazeSample],
    params: GazeParams = GazeParams(),
    bounds: Rect = DEFAULT_DISPLAY,
) -> list[Fixation]:
    """Dispersion-threshold identification over a complete trace.

    A fixation is a maximal window of consecutive usable samples whose
    dispersion (max x - min x) + (max y - min y) stays within
    ``params.dispersion_px`` and whose duration (last - first timestamp)
    reaches ``params.min_fixation_ms``. Windows never overlap and are
    emitted in time order.
    """
    return [fx for fx, _ in detect_fixation_spans(samples, params, bounds)]


def detect_fixation_spans(
    samples: Sequence[GazeSample],
    params: GazeParams = GazeParams(),
    bounds: Rect = DEFAULT_DISPLAY,
) -> list[tuple[Fixation, tuple[int, int]]]:
    """detect_fixations plus the inclusive sample-index span of each window."""
    n = len(samples)
    usable = [validate_sample(s, bounds) for s in samples]
    out: list[tuple[Fixation, tuple[int, int]]] = []
    i = 0
    while i < n:
        if not usable[i]:
            i += 1
            continue
        s0 = samples[i]
        min_x = max_x = s0.x
        min_y = max_y = s0.y
        j = i
        while j + 1 < n and usable[j + 1]:
            s = samples[j + 1]
            nmin_x, nmax_x = min(min_x, s.x), max(max_x, s.x)
            nmin_y, nmax_y = min(min_y, s.y), max(max_y, s.y)
            if _dispersion(nmin_x, nmax_x, nmin_y, nmax_y) > params.dispersion_px:
                break
            min_x, max_x, min_y, max_y = nmin_x, nmax_x, nmin_y, nmax_y
            j += 1
        if samples[j].timestamp_ms - s0.timestamp_ms >= params.min_fixation_ms:
            out.append((_window_fixation(samples, i, j), (i, j)))
            i = j + 1
        else:
            i += 1
    return out


def _window_fixation(samples: Sequence[GazeSample], i: int, j: int) -> Fixation:
    count = j - i + 1
    cx = sum(samples[k].x for k in range(i, j + 1)) / count
    cy = sum(samples[k].y for k in range(i, j + 1)) / count
    return Fixation(
        start_ms=samples[i].timestamp_ms,
        end_ms=samples[j].timestamp_ms,
        centroid_x=cx,
        centroid_y=cy,
        sample_count=count,
    )


class FixationStream:
    """Incremental fixation detector.

    Feeding a complete trace sample-by-sample (then calling :meth:`finish`)
    yields exactly the fixations :func:`detect_fixations` produces for it.
    Per-sample cost is bounded: the only non-O(1) step shrinks a window that
    is shorter than the minimum fixation duration.
    """

    def __init__(self, params: GazeParams = GazeParams(), bounds: Rect = DEFAULT_DISPLAY):
        self.params = params
        self.bounds = bounds
        self._last_ts: Optional[float] = None
        # current candidate window: usable samples with dispersion in bounds,
        # plus running extremes/sums so the common extend path is O(1)
        self._win_t: list[float] = []
        self._win_x: list[float] = []
        self._win_y: list[float] = []
        self._min_x = self._max_x = self._min_y = self._max_y = 0.0
        self._sum_x = self._sum_y = 0.0

    @property
    def last_timestamp_ms(self) -> Optional[float]:
        return self._last_ts

    def ingest(self, sample: GazeSample) -> list[Fixation]:
        """Feed one sample; returns the fixations completed by it (0 or 1)."""
        if self._last_ts is not None and sample.timestamp_ms < self._last_ts:
            raise StreamOrderError(
                f"sample at {sample.timestamp_ms}ms is older than the last "
                f"ingested sample at {self._last_ts}ms"
            )
        self._last_ts = sample.timestamp_ms

        if not validate_sample(sample, self.bounds):
            return self._close_window()

        events: list[Fixation] = []
        if self._win_t and not self._fits(sample.x, sample.y):
            if self._win_t[-1] - self._win_t[0] >= self.params.min_fixation_ms:
                events = self._emit()
            else:
                # Too short to emit: the window start slides forward until the
                # new sample fits. The dropped prefix can never seed a
                # fixation of its own (dropping samples only shortens it), and
                # the loop is bounded by the minimum-duration sample count.
                while self._win_t:
                    self._win_t.pop(0)
                    self._win_x.pop(0)
                    self._win_y.pop(0)
                    self._recompute_aggregates()
                    if self._fits(sample.x, sample.y):
                        break
        self._append(sample)
        return events

    def finish(self) -> list[Fixation]:
        """Close the trailing window at end of stream."""
        return self._close_window()

    def _append(self, sample: GazeSample) -> None:
        if not self._win_t:
            self._min_x = self._max_x = sample.x
            self._min_y = self._max_y = sample.y
            self._sum_x = self._sum_y = 0.0
        else:
            self._min_x = min(self._min_x, sample.x)
            self._max_x = max(self._max_x, sample.x)
            self._min_y = min(self._min_y, sample.y)
            self._max_y = max(self._max_y, sample.y)
        self._win_t.append(sample.timestamp_ms)
        self._win_x.append(sample.x)
        self._win_y.append(sample.y)
        self._sum_x += sample.x
        self._sum_y += sample.y

    def _recompute_aggregates(self) -> None:
        if not self._win_t:
            return
        self._min_x, self._max_x = min(self._win_x), max(self._win_x)
        self._min_y, self._max_y = min(self._win_y), max(self._win_y)
        self._sum_x, self._sum_y = sum(self._win_x), sum(self._win_y)

    def _fits(self, x: float, y: float) -> bool:
        if not self._win_t:
            return True
        return _dispersion(
            min(self._min_x, x), max(self._max_x, x),
            min(self._min_y, y), max(self._max_y, y),
        ) <= self.params.dispersion_px

    def _close_window(self) -> list[Fixation]:
        if self._win_t and self._win_t[-1] - self._win_t[0] >= self.params.min_fixation_ms:
            return self._emit()
        self._clear()
        return []

    def _emit(self) -> list[Fixation]:
        count = len(self._win_t)
        fx = Fixation(
            start_ms=self._win_t[0],
            end_ms=self._win_t[-1],
            centroid_x=self._sum_x / count,
            centroid_y=self._sum_y / count,
            sample_count=count,
        )
        self._clear()
        return [fx]

    def _clear(self) -> None:
        self._win_t.clear()
        self._win_x.clear()
        self._win_y.clear()


def derive_saccades(fixations: Sequence[Fixation]) -> list[Saccade]:
    """One saccade per consecutive fixation pair; empty for fewer than two."""
    out = []
    for i in range(len(fixations) - 1):
        a, b = fixations[i], fixations[i + 1]
        out.append(
            Saccade(
                from_fixation_index=i,
                to_fixation_index=i + 1,
                amplitude_px=math.hypot(b.centroid_x - a.centroid_x, b.centroid_y - a.centroid_y),
                duration_ms=b.start_ms - a.end_ms,
            )
        )
    return out


def aoi_hit(fixation: Fixation, aoi: AOI) -> bool:
    """True iff the fixation centroid lies in any of the AOI's rects."""
    return aoi.contains(fixation.centroid_x, fixation.centroid_y)


def aoi_features(
    fixations: Sequence[Fixation], aoi: AOI, elapsed_ms: float
) -> AOIFeatures:
    """Attention features of one AOI over a fixation list."""
    if elapsed_ms <= 0:
        raise ValueError("elapsed_ms must be positive")
    hits = [f for f in fixations if aoi_hit(f, aoi)]
    count = len(hits)
    total = sum(f.duration_ms for f in hits)
    longest = max((f.duration_ms for f in hits), default=0.0)
    return AOIFeatures(
        fixation_count=count,
        total_duration_ms=total,
        longest_fixation_ms=longest,
        fixation_rate_hz=count / (elapsed_ms / 1000.0),
        proportion_of_fixations=(count / len(fixations)) if fixations else 0.0,
    )


def heatmap(
    fixations: Iterable[Fixation],
    cell_px: float,
    bounds: Rect = DEFAULT_DISPLAY,
) -> list[list[float]]:
    """Fixation-duration density grid over ``bounds``.

    Each cell accumulates the total duration of the fixations whose centroid
    falls inside it; out-of-bounds fixations are ignored, so the grid total
    equals the total duration of in-bounds fixations.
    """
    if cell_px <= 0:
        raise ValueError("cell_px must be positive")
    cols = max(1, math.ceil(bounds.w / cell_px))
    rows = max(1, math.ceil(bounds.h / cell_px))
    grid = [[0.0] * cols for _ in range(rows)]
    for f in fixations:
        if not bounds.contains(f.centroid_x, f.centroid_y):
            continue
        col = min(cols - 1, int((f.centroid_x - bounds.x) // cell_px))
        row = min(rows - 1, int((f.centroid_y - bounds.y) // cell_px))
        grid[row][col] += f.duration_ms
    return grid


class GapFiller:
    """Streaming counterpart of :func:`interpolate_gaps`.

    Unusable samples are buffered until either a usable sample arrives within
    the gap bound (the buffer is emitted interpolated) or the bound is
    exceeded (the buffer is emitted as-is). Emission preserves sample order.
    """

    def __init__(self, max_gap_ms: float = 75.0, bounds: Rect = DEFAULT_DISPLAY):
        self.max_gap_ms = max_gap_ms
        self.bounds = bounds
        self._last_usable: Optional[GazeSample] = None
        self._pending: list[GazeSample] = []

    def ingest(self, sample: GazeSample) -> list[GazeSample]:
        if validate_sample(sample, self.bounds):
            out = self._flush_against(sample)
            self._last_usable = sample
            out.append(sample)
            return out
        if self._last_usable is None:
            # no left flank: nothing to interpolate from
            return [sample]
        self._pending.append(sample)
        if sample.timestamp_ms - self._last_usable.timestamp_ms > self.max_gap_ms:
            out = self._pending
            self._pending = []
            self._last_usable = None
            return out
        return []

    def finish(self) -> list[GazeSample]:
        out = self._pending
        self._pending = []
        return out

    def _flush_against(self, nxt: GazeSample) -> list[GazeSample]:
        if not self._pending:
            return []
        prev = self._last_usable
        assert prev is not None
        span = nxt.timestamp_ms - prev.timestamp_ms
        if span > self.max_gap_ms:
            out = self._pending
            self._pending = []
            return out
        out = []
        for s in self._pending:
            f = (s.timestamp_ms - prev.timestamp_ms) / span if span > 0 else 0.5
            out.append(
                GazeSample(
                    timestamp_ms=s.timestamp_ms,
                    x=prev.x + f * (nxt.x - prev.x),
                    y=prev.y + f * (nxt.y - prev.y),
                    left_valid=True,
                    right_valid=True,
                )
            )
        self._pending = []
        return out
