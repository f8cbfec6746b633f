"""Study session driver: serves documents in seeded random order, feeds gaze
into the detection/intervention pipeline, forwards commands, and records
everything the analysis needs.

The phase machine is HELLO -> (reading -> questions) per document ->
perception ratings -> ended, and never regresses. Out-of-phase or malformed
messages get an ERROR reply and leave the session intact; naming a document
the session does not know is fatal.
"""
from __future__ import annotations

import json
import random
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

from . import protocol
from .engine import (
    DESATURATE,
    EngineConfig,
    HIGHLIGHT,
    InterventionCommand,
    InterventionEngine,
    Strategy,
    TriggerEvent,
)
from .gaze import (
    DEFAULT_DISPLAY,
    FixationStream,
    GapFiller,
    GazeParams,
    GazeSample,
    Rect,
    StreamOrderError,
    validate_sample,
)
from .msnv import MSNVDocument, serialize_document

LOG_FORMAT_TAG = "msnvlog/1"


class SessionError(RuntimeError):
    """Fatal: the session cannot continue (e.g. an unknown document)."""


@dataclass(frozen=True)
class SessionConfig:
    doc_ids: tuple[str, ...]
    seed: int = 0
    engine: EngineConfig = EngineConfig()
    gaze: GazeParams = GazeParams()
    bounds: Rect = DEFAULT_DISPLAY
    capture_traces: bool = False  # keep raw per-document gaze for the log


def randomize_tasks(doc_ids: Sequence[str], seed: int) -> list[str]:
    """Seeded Fisher-Yates permutation (Mersenne Twister source)."""
    if not doc_ids:
        raise ValueError("randomize_tasks needs at least one document id")
    order = list(doc_ids)
    rng = random.Random(seed)
    for i in range(len(order) - 1, 0, -1):
        j = rng.randrange(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


@dataclass
class AnswerRecord:
    item_index: int
    choice: int
    correct: Optional[bool]  # None for rating items


@dataclass
class TaskRecord:
    doc_id: str
    shown_at_ms: float
    next_pressed_at_ms: Optional[float] = None
    answers: list[AnswerRecord] = field(default_factory=list)
    ease: Optional[int] = None
    interest: Optional[int] = None
    triggers: list[TriggerEvent] = field(default_factory=list)
    sample_count: int = 0
    invalid_count: int = 0
    fixation_count: int = 0

    @property
    def time_on_task_ms(self) -> Optional[float]:
        if self.next_pressed_at_ms is None:
            return None
        return self.next_pressed_at_ms - self.shown_at_ms


def compute_measures(record: TaskRecord) -> dict[str, float]:
    """Performance and experience measures of one completed task."""
    if record.next_pressed_at_ms is None:
        raise ValueError("task is incomplete: 'next' was never pressed")
    graded = [a for a in record.answers if a.correct is not None]
    if not graded or record.ease is None or record.interest is None:
        raise ValueError("task is incomplete: answers or ratings missing")
    tot = record.time_on_task_ms
    assert tot is not None
    if tot <= 0:
        raise ValueError("time on task must be positive")
    return {
        "time_on_task_ms": tot,
        "accuracy": sum(1 for a in graded if a.correct) / len(graded),
        "ease": float(record.ease),
        "interest": float(record.interest),
    }


@dataclass
class SessionLog:
    participant_id: str
    config: SessionConfig
    order: list[str]
    tasks: list[TaskRecord]
    perception_ratings: Optional[list[int]]
    partial: bool
    trace_ref: str = ""  # where the full gaze traces were written, if anywhere


PERCEPTION_ITEM_COUNT = 10
PERCEPTION_SCALE = 7


class Session:
    """One participant's run. Messages are handled strictly in arrival order;
    distinct sessions are fully independent."""

    def __init__(
        self,
        registry: Mapping[str, MSNVDocument],
        config: SessionConfig,
        clock: Optional[Callable[[], float]] = None,
    ):
        missing = [d for d in config.doc_ids if d not in registry]
        if missing:
            raise SessionError(f"unknown documents in session config: {missing}")
        for doc_id in config.doc_ids:
            doc = registry[doc_id]
            ratings = [it for it in doc.items if it.kind == "rating"]
            choices = [it for it in doc.items if it.kind == "choice"]
            if len(ratings) != 2 or len(choices) != 3:
                raise SessionError(
                    f"document {doc_id!r} needs 2 rating and 3 choice items to be served"
                )
        self.registry = registry
        self.config = config
        if clock is None:
            epoch = time.monotonic()
            clock = lambda: (time.monotonic() - epoch) * 1000.0
        self.clock = clock
        self.participant_id = ""
        self.order: list[str] = []
        self.phase = "hello"
        self.tasks: list[TaskRecord] = []
        self.perception_ratings: Optional[list[int]] = None
        self._doc_index = -1
        self._engine: Optional[InterventionEngine] = None
        self._filler: Optional[GapFiller] = None
        self._stream: Optional[FixationStream] = None
        self._last_gaze_ms: Optional[float] = None
        self.trace_ref = ""
        self.traces: dict[str, list[GazeSample]] = {}

    # -- public surface ------------------------------------------------------

    def handle_line(self, line: str) -> list[protocol.Message]:
        try:
            msg = protocol.decode(line)
        except protocol.ProtocolError as e:
            return [protocol.Error(code="bad_message", message=str(e))]
        return self.handle_message(msg)

    def handle_message(self, message: protocol.Message) -> list[protocol.Message]:
        handler = {
            "HELLO": self._on_hello,
            "GAZE": self._on_gaze,
            "DOC_READY": self._on_doc_ready,
            "NEXT": self._on_next,
            "ANSWERS": self._on_answers,
            "RATINGS": self._on_ratings,
        }.get(message.type)
        if handler is None:
            return [protocol.Error(code="bad_message",
                                   message=f"{message.type} is not a client message")]
        return handler(message)

    @property
    def ended(self) -> bool:
        return self.phase == "ended"

    def abort(self) -> None:
        if self.phase != "ended":
            self.phase = "aborted"

    def export_log(self) -> SessionLog:
        return SessionLog(
            participant_id=self.participant_id,
            config=self.config,
            order=list(self.order),
            tasks=list(self.tasks),
            perception_ratings=(
                list(self.perception_ratings) if self.perception_ratings else None
            ),
            partial=self.phase != "ended",
            trace_ref=self.trace_ref,
        )

    # -- handlers --------------------------------------------------------

    def _out_of_phase(self, msg_type: str) -> list[protocol.Message]:
        return [protocol.Error(
            code="out_of_phase",
            message=f"{msg_type} is not legal in phase {self.phase!r}",
        )]

    def _on_hello(self, msg: protocol.Hello) -> list[protocol.Message]:
        if self.phase != "hello":
            return self._out_of_phase("HELLO")
        self.participant_id = msg.participantId
        # reproducible per participant: same base seed + same id = same order
        order_seed = self.config.seed ^ zlib.crc32(msg.participantId.encode("utf-8"))
        self.order = randomize_tasks(self.config.doc_ids, order_seed)
        return self._show_next_doc()

    def _show_next_doc(self) -> list[protocol.Message]:
        self._doc_index += 1
        doc = self.registry[self.order[self._doc_index]]
        self._engine = InterventionEngine(doc, self.config.engine)
        self._filler = GapFiller(self.config.gaze.max_gap_ms, self.config.bounds)
        self._stream = FixationStream(self.config.gaze, self.config.bounds)
        self._last_gaze_ms = None
        self.tasks.append(TaskRecord(doc_id=doc.id, shown_at_ms=self.clock()))
        self.phase = "reading"
        return [protocol.ShowDoc(doc=json.loads(serialize_document(doc)))]

    def _current_doc(self) -> MSNVDocument:
        return self.registry[self.order[self._doc_index]]

    def _check_doc_id(self, doc_id: str) -> Optional[list[protocol.Message]]:
        if doc_id not in self.registry:
            raise SessionError(f"unknown document {doc_id!r}")
        if doc_id != self._current_doc().id:
            return [protocol.Error(
                code="wrong_document",
                message=f"expected {self._current_doc().id!r}, got {doc_id!r}",
            )]
        return None

    def _on_gaze(self, msg: protocol.Gaze) -> list[protocol.Message]:
        if self.phase != "reading":
            return self._out_of_phase("GAZE")
        assert self._filler and self._stream and self._engine
        if self._last_gaze_ms is not None and msg.t_ms < self._last_gaze_ms:
            return [protocol.Error(
                code="stream_order",
                message=f"gaze sample at {msg.t_ms}ms is older than {self._last_gaze_ms}ms",
            )]
        self._last_gaze_ms = msg.t_ms
        sample = GazeSample(
            timestamp_ms=msg.t_ms, x=msg.x, y=msg.y,
            left_valid=bool(msg.lv), right_valid=bool(msg.rv),
        )
        record = self.tasks[-1]
        record.sample_count += 1
        if not validate_sample(sample, self.config.bounds):
            record.invalid_count += 1
        if self.config.capture_traces:
            self.traces.setdefault(record.doc_id, []).append(sample)
        out: list[protocol.Message] = []
        for ready in self._filler.ingest(sample):
            for fx in self._stream.ingest(ready):
                record.fixation_count += 1
                out.extend(self._emit(self._engine.on_fixation(fx)))
        return out

    def _on_doc_ready(self, msg: protocol.DocReady) -> list[protocol.Message]:
        if self.phase != "reading":
            return self._out_of_phase("DOC_READY")
        err = self._check_doc_id(msg.docId)
        if err:
            return err
        # rendering finished: the task clock starts here
        self.tasks[-1].shown_at_ms = self.clock()
        return []

    def _on_next(self, msg: protocol.Next) -> list[protocol.Message]:
        if self.phase != "reading":
            return self._out_of_phase("NEXT")
        err = self._check_doc_id(msg.docId)
        if err:
            return err
        assert self._filler and self._stream and self._engine
        record = self.tasks[-1]
        out: list[protocol.Message] = []
        for ready in self._filler.finish():
            for fx in self._stream.ingest(ready):
                record.fixation_count += 1
                out.extend(self._emit(self._engine.on_fixation(fx)))
        for fx in self._stream.finish():
            record.fixation_count += 1
            out.extend(self._emit(self._engine.on_fixation(fx)))
        record.triggers = list(self._engine.trigger_log)
        record.next_pressed_at_ms = self.clock()
        self.phase = "questions"
        doc = self._current_doc()
        items = []
        for it in doc.items:
            if it.kind == "rating":
                items.append({"kind": "rating", "prompt": it.prompt, "scale": it.scale})
            else:
                items.append({"kind": "choice", "prompt": it.prompt,
                              "options": list(it.options)})
        out.append(protocol.Questions(docId=doc.id, items=items))
        return out

    def _on_answers(self, msg: protocol.Answers) -> list[protocol.Message]:
        if self.phase != "questions":
            return self._out_of_phase("ANSWERS")
        err = self._check_doc_id(msg.docId)
        if err:
            return err
        doc = self._current_doc()
        if len(msg.choices) != len(doc.items):
            return [protocol.Error(
                code="bad_answers",
                message=f"expected {len(doc.items)} choices, got {len(msg.choices)}",
            )]
        record = self.tasks[-1]
        answers: list[AnswerRecord] = []
        ratings: list[int] = []
        for i, (item, choice) in enumerate(zip(doc.items, msg.choices)):
            if item.kind == "rating":
                if not 1 <= choice <= item.scale:
                    return [protocol.Error(
                        code="bad_answers",
                        message=f"item {i}: rating {choice} outside 1..{item.scale}",
                    )]
                ratings.append(choice)
                answers.append(AnswerRecord(item_index=i, choice=choice, correct=None))
            else:
                if not 0 <= choice < len(item.options):
                    return [protocol.Error(
                        code="bad_answers",
                        message=f"item {i}: choice {choice} out of range",
                    )]
                answers.append(AnswerRecord(
                    item_index=i, choice=choice, correct=(choice == item.answer)
                ))
        record.answers = answers
        record.ease, record.interest = ratings[0], ratings[1]
        if self._doc_index + 1 < len(self.order):
            return self._show_next_doc()
        self.phase = "ratings"
        return [protocol.End()]

    def _on_ratings(self, msg: protocol.Ratings) -> list[protocol.Message]:
        if self.phase != "ratings":
            return self._out_of_phase("RATINGS")
        if len(msg.items) != PERCEPTION_ITEM_COUNT or any(
            not 1 <= v <= PERCEPTION_SCALE for v in msg.items
        ):
            return [protocol.Error(
                code="bad_ratings",
                message=f"expected {PERCEPTION_ITEM_COUNT} integers in "
                        f"1..{PERCEPTION_SCALE}",
            )]
        self.perception_ratings = list(msg.items)
        self.phase = "ended"
        return []

    def _emit(self, commands: Sequence[InterventionCommand]) -> list[protocol.Message]:
        out: list[protocol.Message] = []
        for c in commands:
            if c.kind == HIGHLIGHT:
                out.append(protocol.Highlight(
                    refId=c.reference_id, barIds=list(c.bar_ids),
                    outline=c.outline or "#000000", width=c.width_px or 3,
                ))
            elif c.kind == DESATURATE:
                out.append(protocol.Desaturate(
                    refId=c.reference_id, outline=c.outline or "#808080",
                ))
            else:
                out.append(protocol.Remove(refId=c.reference_id))
        return out


# --- log serialization ------------------------------------------------------

def dumps_log(log: SessionLog) -> str:
    raw = {
        "format": LOG_FORMAT_TAG,
        "participantId": log.participant_id,
        "config": {
            "docIds": list(log.config.doc_ids),
            "seed": log.config.seed,
            "fraction": log.config.engine.fraction,
            "strategy": log.config.engine.strategy.value,
            "outlineWidthPx": log.config.engine.outline_width_px,
            "minFixationMs": log.config.gaze.min_fixation_ms,
            "dispersionPx": log.config.gaze.dispersion_px,
            "maxGapMs": log.config.gaze.max_gap_ms,
            "captureTraces": log.config.capture_traces,
            "display": {"x": log.config.bounds.x, "y": log.config.bounds.y,
                        "w": log.config.bounds.w, "h": log.config.bounds.h},
        },
        "order": list(log.order),
        "tasks": [
            {
                "docId": t.doc_id,
                "shownAtMs": t.shown_at_ms,
                "nextPressedAtMs": t.next_pressed_at_ms,
                "timeOnTaskMs": t.time_on_task_ms,
                "answers": [
                    {"item": a.item_index, "choice": a.choice, "correct": a.correct}
                    for a in t.answers
                ],
                "ratings": {"ease": t.ease, "interest": t.interest},
                "triggers": [
                    {"refId": tr.reference_id, "ordinal": tr.ordinal, "tMs": tr.t_ms}
                    for tr in t.triggers
                ],
                "gazeStats": {
                    "sampleCount": t.sample_count,
                    "invalidCount": t.invalid_count,
                    "fixationCount": t.fixation_count,
                },
            }
            for t in log.tasks
        ],
        "perceptionRatings": log.perception_ratings,
        "partial": log.partial,
        "traceRef": log.trace_ref,
    }
    return json.dumps(raw, indent=2) + "\n"


def loads_log(text: str) -> SessionLog:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"malformed log: {e}") from None
    if not isinstance(raw, dict) or raw.get("format") != LOG_FORMAT_TAG:
        raise ValueError(f"log must carry format {LOG_FORMAT_TAG!r}")
    cfg = raw.get("config") or {}
    display = cfg.get("display") or {}
    config = SessionConfig(
        doc_ids=tuple(cfg.get("docIds") or ()),
        seed=int(cfg.get("seed", 0)),
        engine=EngineConfig(
            fraction=float(cfg.get("fraction", 0.40)),
            strategy=Strategy(cfg.get("strategy", "desaturate")),
            outline_width_px=int(cfg.get("outlineWidthPx", 3)),
        ),
        gaze=GazeParams(
            min_fixation_ms=float(cfg.get("minFixationMs", 100.0)),
            dispersion_px=float(cfg.get("dispersionPx", 35.0)),
            max_gap_ms=float(cfg.get("maxGapMs", 75.0)),
        ),
        bounds=Rect(
            float(display.get("x", 0.0)), float(display.get("y", 0.0)),
            float(display.get("w", 1280.0)), float(display.get("h", 1024.0)),
        ),
        capture_traces=bool(cfg.get("captureTraces", False)),
    )
    tasks = []
    for t in raw.get("tasks") or []:
        stats = t.get("gazeStats") or {}
        ratings = t.get("ratings") or {}
        tasks.append(TaskRecord(
            doc_id=str(t["docId"]),
            shown_at_ms=float(t["shownAtMs"]),
            next_pressed_at_ms=(
                None if t.get("nextPressedAtMs") is None else float(t["nextPressedAtMs"])
            ),
            answers=[
                AnswerRecord(item_index=int(a["item"]), choice=int(a["choice"]),
                             correct=a["correct"])
                for a in t.get("answers") or []
            ],
            ease=ratings.get("ease"),
            interest=ratings.get("interest"),
            triggers=[
                TriggerEvent(reference_id=str(tr["refId"]), ordinal=int(tr["ordinal"]),
                             t_ms=float(tr["tMs"]))
                for tr in t.get("triggers") or []
            ],
            sample_count=int(stats.get("sampleCount", 0)),
            invalid_count=int(stats.get("invalidCount", 0)),
            fixation_count=int(stats.get("fixationCount", 0)),
        ))
    return SessionLog(
        participant_id=str(raw.get("participantId", "")),
        config=config,
        order=list(raw.get("order") or []),
        tasks=tasks,
        perception_ratings=raw.get("perceptionRatings"),
        partial=bool(raw.get("partial", False)),
        trace_ref=str(raw.get("traceRef", "")),
    )
