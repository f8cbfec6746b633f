"""Reading and writing gaze traces in the `gaze/1` line format.

Line 1 is the literal format tag ``gaze/1``; every following line is one
sample as ``t_ms,x,y,lv,rv,lp_mm,rp_mm,dist_mm`` with empty fields for
missing optionals. Serialization round-trips exactly.
"""
from __future__ import annotations

from typing import Optional, Sequence

from .gaze import GazeSample

FORMAT_TAG = "gaze/1"
_FIELDS = ("t_ms", "x", "y", "lv", "rv", "lp_mm", "rp_mm", "dist_mm")


class TraceFormatError(ValueError):
    """Trace file violates the gaze/1 format; message carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _fmt(v: float) -> str:
    # shortest exact form: integers lose the trailing .0
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _fmt_opt(v: Optional[float]) -> str:
    return "" if v is None else _fmt(v)


def dumps_trace(samples: Sequence[GazeSample]) -> str:
    lines = [FORMAT_TAG]
    for s in samples:
        lines.append(
            ",".join(
                (
                    _fmt(s.timestamp_ms),
                    _fmt(s.x),
                    _fmt(s.y),
                    "1" if s.left_valid else "0",
                    "1" if s.right_valid else "0",
                    _fmt_opt(s.left_pupil_mm),
                    _fmt_opt(s.right_pupil_mm),
                    _fmt_opt(s.eye_distance_mm),
                )
            )
        )
    return "\n".join(lines) + "\n"


def loads_trace(text: str) -> list[GazeSample]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_TAG:
        raise TraceFormatError(1, f"expected format tag {FORMAT_TAG!r}")
    samples: list[GazeSample] = []
    last_t: Optional[float] = None
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(_FIELDS):
            raise TraceFormatError(
                idx, f"expected {len(_FIELDS)} fields {_FIELDS}, got {len(parts)}"
            )
        try:
            t = float(parts[0])
            x = float(parts[1])
            y = float(parts[2])
            lv = _parse_flag(parts[3])
            rv = _parse_flag(parts[4])
            lp = float(parts[5]) if parts[5] != "" else None
            rp = float(parts[6]) if parts[6] != "" else None
            dist = float(parts[7]) if parts[7] != "" else None
        except ValueError as e:
            raise TraceFormatError(idx, str(e)) from None
        if last_t is not None and t < last_t:
            raise TraceFormatError(idx, f"timestamp {t} decreases (previous {last_t})")
        last_t = t
        samples.append(
            GazeSample(
                timestamp_ms=t, x=x, y=y, left_valid=lv, right_valid=rv,
                left_pupil_mm=lp, right_pupil_mm=rp, eye_distance_mm=dist,
            )
        )
    return samples


def _parse_flag(s: str) -> bool:
    if s == "1":
        return True
    if s == "0":
        return False
    raise ValueError(f"validity flag must be 0 or 1, got {s!r}")


def write_trace(path, samples: Sequence[GazeSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_trace(samples))


def read_trace(path) -> list[GazeSample]:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_trace(fh.read())
