"""HTTP/WebSocket service around the core package.

REST endpoints expose documents, trace synthesis, replay, screening, cohort
summaries, and p-value adjustment; live sessions speak the wire protocol over
a WebSocket (one text frame per message) or over a raw TCP socket (one line
per message).
"""
from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from . import protocol
from .analysis import bh_adjust
from .engine import EngineConfig, Strategy
from .gaze import DEFAULT_DISPLAY, GazeParams
from .msnv import DocumentError, MSNVDocument, parse_document, serialize_document
from .replay import (
    ReaderProfile,
    ReplayReport,
    cohort_report,
    dumps_report,
    loads_report,
    replay,
    screen_participant,
    synthesize_trace,
)
from .session import Session, SessionConfig, dumps_log
from .traceio import TraceFormatError, dumps_trace, loads_trace, write_trace


def load_registry(docs_dir) -> dict[str, MSNVDocument]:
    registry: dict[str, MSNVDocument] = {}
    for path in sorted(Path(docs_dir).glob("*.json")):
        doc = parse_document(path.read_text(encoding="utf-8"))
        if doc.id in registry:
            raise DocumentError([f"duplicate document id {doc.id!r} in {path}"])
        registry[doc.id] = doc
    if not registry:
        raise DocumentError([f"no documents found in {docs_dir}"])
    return registry


class HealthResponse(BaseModel):
    status: str = "ok"
    documents: int


class DocumentSummary(BaseModel):
    id: str
    title: str
    references: int
    bars: int


class SynthesizeRequest(BaseModel):
    docId: str
    seed: int = 0
    speed: float = 1.0
    skip: float = 0.0
    noisePx: float = 0.0
    offsetX: float = 0.0
    offsetY: float = 0.0
    revisit: float = 0.0


class SynthesizeResponse(BaseModel):
    trace: str


class ReplayRequest(BaseModel):
    docId: str
    trace: str
    fraction: float = 0.40
    strategy: str = Strategy.DESATURATE_PREVIOUS.value
    heatmap: bool = False


class ScreenRequest(BaseModel):
    report: dict
    invalidThreshold: float = Field(default=0.25, ge=0.0, le=1.0)


class ScreenResponse(BaseModel):
    decision: str
    heatmapExport: Optional[str] = None


class CohortRequest(BaseModel):
    reports: list[dict]


class BHRequest(BaseModel):
    pValues: list[float]


class BHResponse(BaseModel):
    raw: list[float]
    adjusted: list[float]


def _strategy(name: str) -> Strategy:
    try:
        return Strategy(name)
    except ValueError:
        raise HTTPException(422, f"unknown strategy {name!r}; "
                                 f"use one of {[s.value for s in Strategy]}")


def create_app(
    docs_dir=None,
    *,
    registry: Optional[dict[str, MSNVDocument]] = None,
    seed: int = 0,
    fraction: float = 0.40,
    strategy: Strategy = Strategy.DESATURATE_PREVIOUS,
    gaze: GazeParams = GazeParams(),
    log_dir=None,
) -> FastAPI:
    if registry is None:
        if docs_dir is None:
            raise ValueError("create_app needs docs_dir or registry")
        registry = load_registry(docs_dir)
    docs = registry

    app = FastAPI(title="gazeadapt", version="0.1.0")
    app.state.registry = docs
    app.state.session_defaults = SessionConfig(
        doc_ids=tuple(docs),
        seed=seed,
        engine=EngineConfig(fraction=fraction, strategy=strategy),
        gaze=gaze,
        capture_traces=log_dir is not None,
    )
    app.state.log_dir = Path(log_dir) if log_dir else None
    app.state.session_counter = 0

    def _doc(doc_id: str) -> MSNVDocument:
        doc = docs.get(doc_id)
        if doc is None:
            raise HTTPException(404, f"unknown document {doc_id!r}")
        return doc

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(documents=len(docs))

    @app.get("/documents", response_model=list[DocumentSummary])
    def list_documents() -> list[DocumentSummary]:
        return [
            DocumentSummary(id=d.id, title=d.title,
                            references=len(d.references), bars=len(d.chart.bars))
            for d in docs.values()
        ]

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str) -> dict:
        return json.loads(serialize_document(_doc(doc_id)))

    @app.post("/synthesize", response_model=SynthesizeResponse)
    def synthesize(req: SynthesizeRequest) -> SynthesizeResponse:
        profile = ReaderProfile(
            reading_speed_factor=req.speed,
            skip_probability=req.skip,
            noise_px=req.noisePx,
            offset_px=(req.offsetX, req.offsetY),
            revisit_probability=req.revisit,
        )
        samples = synthesize_trace(_doc(req.docId), profile, req.seed)
        return SynthesizeResponse(trace=dumps_trace(samples))

    @app.post("/replay")
    def run_replay(req: ReplayRequest) -> dict:
        try:
            samples = loads_trace(req.trace)
        except TraceFormatError as e:
            raise HTTPException(422, str(e))
        config = EngineConfig(fraction=req.fraction, strategy=_strategy(req.strategy))
        report = replay(samples, _doc(req.docId), config, gaze,
                        with_heatmap=req.heatmap)
        return json.loads(dumps_report(report))

    @app.post("/screen", response_model=ScreenResponse)
    def screen(req: ScreenRequest) -> ScreenResponse:
        try:
            report = loads_report(json.dumps(req.report))
        except ValueError as e:
            raise HTTPException(422, str(e))
        result = screen_participant(report, invalid_threshold=req.invalidThreshold)
        return ScreenResponse(decision=result.decision,
                              heatmapExport=result.heatmap_export)

    @app.post("/cohort")
    def cohort(req: CohortRequest) -> dict:
        try:
            reports = [loads_report(json.dumps(r)) for r in req.reports]
            summary = cohort_report(reports)
        except ValueError as e:
            raise HTTPException(422, str(e))
        return json.loads(summary.to_json())

    @app.post("/analysis/bh", response_model=BHResponse)
    def adjust(req: BHRequest) -> BHResponse:
        try:
            result = bh_adjust(req.pValues)
        except ValueError as e:
            raise HTTPException(422, str(e))
        return BHResponse(raw=list(result.raw), adjusted=list(result.adjusted))

    @app.websocket("/session")
    async def session_ws(ws: WebSocket) -> None:
        await ws.accept()
        session = _new_session(app)
        try:
            while not session.ended:
                line = await ws.receive_text()
                for msg in session.handle_line(line):
                    await ws.send_text(protocol.encode(msg))
        except WebSocketDisconnect:
            session.abort()
        finally:
            _write_log(app, session)

    return app


def _new_session(app: FastAPI) -> Session:
    defaults: SessionConfig = app.state.session_defaults
    return Session(app.state.registry, defaults, clock=None)


def _write_log(app: FastAPI, session: Session) -> None:
    log_dir: Optional[Path] = app.state.log_dir
    if log_dir is None or not session.tasks and not session.participant_id:
        return
    app.state.session_counter += 1
    name = session.participant_id or "anonymous"
    write_session_artifacts(log_dir, f"{name}-{app.state.session_counter:04d}", session)


def write_session_artifacts(log_dir: Path, stem: str, session: Session) -> Path:
    """Persist the session log plus its raw gaze traces; the log's traceRef
    names the trace directory."""
    log_dir.mkdir(parents=True, exist_ok=True)
    if session.traces:
        trace_dir = log_dir / f"{stem}-traces"
        trace_dir.mkdir(parents=True, exist_ok=True)
        for doc_id, samples in session.traces.items():
            write_trace(trace_dir / f"{doc_id}.gaze", samples)
        session.trace_ref = trace_dir.name
    path = log_dir / f"{stem}.json"
    path.write_text(dumps_log(session.export_log()), encoding="utf-8")
    return path


async def serve_tcp(
    host: str,
    port: int,
    registry: dict[str, MSNVDocument],
    config: SessionConfig,
    log_dir=None,
) -> asyncio.AbstractServer:
    """Raw-socket transport: newline-delimited protocol messages."""
    log_path = Path(log_dir) if log_dir else None
    counter = [0]

    async def handle(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        session = Session(registry, config)
        try:
            while not session.ended:
                line = await reader.readline()
                if not line:
                    session.abort()
                    break
                for msg in session.handle_line(line.decode("utf-8").rstrip("\n")):
                    writer.write((protocol.encode(msg) + "\n").encode("utf-8"))
                await writer.drain()
        finally:
            if log_path and (session.tasks or session.participant_id):
                counter[0] += 1
                name = session.participant_id or "anonymous"
                write_session_artifacts(log_path, f"{name}-{counter[0]:04d}", session)
            writer.close()

    return await asyncio.start_server(handle, host, port)
