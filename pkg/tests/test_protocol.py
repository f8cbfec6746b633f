import json

import pytest

from gazeadapt import protocol
from gazeadapt.protocol import ProtocolError, decode, encode

EXAMPLES = [
    (protocol.Hello(participantId="p01"), {"type", "participantId"}),
    (protocol.Gaze(t_ms=8.25, x=640.5, y=512.0, lv=1, rv=0),
     {"type", "t_ms", "x", "y", "lv", "rv"}),
    (protocol.DocReady(docId="msnv-00"), {"type", "docId"}),
    (protocol.Next(docId="msnv-00"), {"type", "docId"}),
    (protocol.Answers(docId="msnv-00", choices=[4, 3, 0, 1, 0]),
     {"type", "docId", "choices"}),
    (protocol.Ratings(items=[5, 6, 2, 4, 3, 6, 7, 5, 4, 3]), {"type", "items"}),
    (protocol.ShowDoc(doc={"format": "msnv/1", "id": "d"}), {"type", "doc"}),
    (protocol.Highlight(refId="r0", barIds=["b0", "b1"], outline="#000000", width=3),
     {"type", "refId", "barIds", "outline", "width"}),
    (protocol.Desaturate(refId="r0", outline="#808080"),
     {"type", "refId", "outline"}),
    (protocol.Remove(refId="r0"), {"type", "refId"}),
    (protocol.Questions(docId="msnv-00", items=[{"kind": "rating", "prompt": "?",
                                                 "scale": 5}]),
     {"type", "docId", "items"}),
    (protocol.End(), {"type"}),
    (protocol.Error(code="out_of_phase", message="nope"),
     {"type", "code", "message"}),
]


@pytest.mark.parametrize("msg,fields", EXAMPLES, ids=lambda e: getattr(e, "type", ""))
def test_round_trip_and_exact_field_names(msg, fields):
    line = encode(msg)
    assert "\n" not in line
    raw = json.loads(line)
    assert set(raw.keys()) == fields
    assert decode(line) == msg


def test_unknown_type_rejected():
    with pytest.raises(ProtocolError):
        decode('{"type": "NOPE"}')


def test_malformed_json_rejected():
    with pytest.raises(ProtocolError):
        decode("{oops")


def test_missing_field_rejected():
    with pytest.raises(ProtocolError):
        decode('{"type": "HELLO"}')


def test_extra_field_rejected():
    with pytest.raises(ProtocolError):
        decode('{"type": "HELLO", "participantId": "p", "x": 1}')


def test_validity_flags_constrained():
    with pytest.raises(ProtocolError):
        decode('{"type": "GAZE", "t_ms": 0, "x": 1, "y": 2, "lv": 2, "rv": 0}')
