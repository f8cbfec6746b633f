import asyncio
import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from gazeadapt import protocol
from gazeadapt.engine import EngineConfig
from gazeadapt.replay import ReaderProfile, replay, synthesize_trace
from gazeadapt.service import create_app, load_registry, serve_tcp
from gazeadapt.session import SessionConfig, loads_log
from gazeadapt.traceio import dumps_trace, loads_trace

CORPUS_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "corpus"


@pytest.fixture(scope="module")
def registry():
    return load_registry(CORPUS_DIR)


@pytest.fixture()
def client(registry, tmp_path):
    app = create_app(registry=registry, seed=5, log_dir=tmp_path / "logs")
    with TestClient(app) as c:
        c.log_dir = tmp_path / "logs"
        yield c


def test_health(client, registry):
    body = client.get("/health").json()
    assert body == {"status": "ok", "documents": len(registry)}


def test_list_documents(client, registry):
    body = client.get("/documents").json()
    assert {d["id"] for d in body} == set(registry)
    assert all(d["references"] >= 1 for d in body)


def test_get_document_matches_file(client):
    want = json.loads((CORPUS_DIR / "msnv-03.json").read_text())
    assert client.get("/documents/msnv-03").json() == want
    assert client.get("/documents/ghost").status_code == 404


def test_synthesize_deterministic_and_parseable(client, registry):
    req = {"docId": "msnv-00", "seed": 3, "speed": 1.0}
    a = client.post("/synthesize", json=req).json()["trace"]
    b = client.post("/synthesize", json=req).json()["trace"]
    assert a == b
    doc = registry["msnv-00"]
    assert a == dumps_trace(synthesize_trace(doc, ReaderProfile(), 3))


def test_replay_endpoint_equals_library(client, registry):
    doc = registry["msnv-01"]
    trace = dumps_trace(synthesize_trace(doc, ReaderProfile(), 4))
    body = client.post("/replay", json={"docId": doc.id, "trace": trace}).json()
    report = replay(loads_trace(trace), doc, EngineConfig())
    assert body["triggeredCount"] == report.triggered_count
    assert body["availableCount"] == len(doc.references)
    assert body["format"] == "report/1"


def test_replay_rejects_bad_trace(client):
    out = client.post("/replay", json={"docId": "msnv-00", "trace": "bogus"})
    assert out.status_code == 422


def test_screen_and_cohort_endpoints(client, registry):
    doc = registry["msnv-00"]
    trace = dumps_trace(synthesize_trace(doc, ReaderProfile(), 4))
    report = client.post("/replay", json={"docId": doc.id, "trace": trace}).json()
    decision = client.post("/screen", json={"report": report}).json()
    assert decision["decision"] == "keep"
    summary = client.post("/cohort", json={"reports": [report, report]}).json()
    assert summary["n"] == 2
    assert summary["sdTriggerPercentage"] == 0.0


def test_bh_endpoint(client):
    body = client.post("/analysis/bh",
                       json={"pValues": [0.01, 0.02, 0.03, 0.04]}).json()
    assert body["adjusted"] == pytest.approx([0.04] * 4)
    assert client.post("/analysis/bh", json={"pValues": [2.0]}).status_code == 422


def drive_session(send, recv, registry):
    """Run a complete session over any (send_line, recv_line) pair."""
    send(protocol.encode(protocol.Hello(participantId="ws-p1")))
    highlights = 0
    while True:
        msg = protocol.decode(recv())
        if msg.type == "SHOW_DOC":
            doc = registry[msg.doc["id"]]
            trace = synthesize_trace(doc, ReaderProfile(), seed=2)
            for s in trace:
                send(protocol.encode(protocol.Gaze(
                    t_ms=s.timestamp_ms, x=s.x, y=s.y, lv=1, rv=1)))
            send(protocol.encode(protocol.Next(docId=doc.id)))
            while True:
                reply = protocol.decode(recv())
                if reply.type == "HIGHLIGHT":
                    highlights += 1
                elif reply.type == "QUESTIONS":
                    break
                else:
                    assert reply.type in ("DESATURATE", "REMOVE")
            send(protocol.encode(protocol.Answers(
                docId=doc.id, choices=[4, 3, 0, 0, 0])))
        elif msg.type == "END":
            send(protocol.encode(protocol.Ratings(items=[5] * 10)))
            return highlights
        else:
            assert msg.type in ("HIGHLIGHT", "DESATURATE", "REMOVE"), msg.type


def test_websocket_session(registry, tmp_path):
    # the two documents with the smallest fixation budgets keep this quick
    small = {k: registry[k] for k in ("msnv-12", "msnv-13")}
    app = create_app(registry=small, seed=1, log_dir=tmp_path)
    total_refs = sum(len(d.references) for d in small.values())
    with TestClient(app) as client:
        with client.websocket_connect("/session") as ws:
            highlights = drive_session(ws.send_text, ws.receive_text, registry)
    assert highlights == total_refs
    logs = list(tmp_path.glob("*.json"))
    assert len(logs) == 1
    log = loads_log(logs[0].read_text())
    assert log.participant_id == "ws-p1"
    assert not log.partial
    assert len(log.tasks) == 2
    # raw traces were written alongside, referenced from the log
    trace_dir = tmp_path / log.trace_ref
    assert trace_dir.is_dir()
    for task in log.tasks:
        samples = loads_trace((trace_dir / f"{task.doc_id}.gaze").read_text())
        assert len(samples) == task.sample_count


def test_websocket_disconnect_writes_partial_log(registry, tmp_path):
    app = create_app(registry=registry, seed=1, log_dir=tmp_path)
    with TestClient(app) as client:
        with client.websocket_connect("/session") as ws:
            ws.send_text(protocol.encode(protocol.Hello(participantId="quitter")))
            ws.receive_text()
    logs = list(tmp_path.glob("*.json"))
    assert len(logs) == 1
    assert loads_log(logs[0].read_text()).partial


def test_tcp_session(registry):
    docs = {"msnv-13": registry["msnv-13"]}
    config = SessionConfig(doc_ids=tuple(docs), seed=2)

    async def run():
        server = await serve_tcp("127.0.0.1", 0, docs, config)
        port = server.sockets[0].getsockname()[1]
        reader, writer = await asyncio.open_connection("127.0.0.1", port)

        def send(line):
            writer.write((line + "\n").encode())

        async def recv_line():
            return (await reader.readline()).decode().rstrip("\n")

        send(protocol.encode(protocol.Hello(participantId="tcp-p")))
        await writer.drain()
        highlights = 0
        done = False
        while not done:
            msg = protocol.decode(await recv_line())
            if msg.type == "SHOW_DOC":
                doc = registry[msg.doc["id"]]
                for s in synthesize_trace(doc, ReaderProfile(), seed=2):
                    send(protocol.encode(protocol.Gaze(
                        t_ms=s.timestamp_ms, x=s.x, y=s.y, lv=1, rv=1)))
                send(protocol.encode(protocol.Next(docId=doc.id)))
                await writer.drain()
                while True:
                    reply = protocol.decode(await recv_line())
                    if reply.type == "HIGHLIGHT":
                        highlights += 1
                    elif reply.type == "QUESTIONS":
                        break
                send(protocol.encode(protocol.Answers(
                    docId=doc.id, choices=[4, 3, 0, 0, 0])))
                await writer.drain()
            elif msg.type == "END":
                send(protocol.encode(protocol.Ratings(items=[5] * 10)))
                await writer.drain()
                done = True
        writer.close()
        await writer.wait_closed()
        server.close()
        await server.wait_closed()
        return highlights

    highlights = asyncio.run(run())
    assert highlights == len(list(docs.values())[0].references)
