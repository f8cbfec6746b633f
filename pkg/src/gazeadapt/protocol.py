"""Wire protocol: newline-delimited JSON messages on a bidirectional stream.

One message per line (or per WebSocket text frame). Field names are part of
the contract and round-trip exactly.
"""
from __future__ import annotations

import json
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError


class ProtocolError(ValueError):
    pass


class _Message(BaseModel):
    model_config = ConfigDict(extra="forbid")


# inbound (client -> server)

class Hello(_Message):
    type: Literal["HELLO"] = "HELLO"
    participantId: str


class Gaze(_Message):
    type: Literal["GAZE"] = "GAZE"
    t_ms: float
    x: float
    y: float
    lv: int = Field(ge=0, le=1)
    rv: int = Field(ge=0, le=1)


class DocReady(_Message):
    type: Literal["DOC_READY"] = "DOC_READY"
    docId: str


class Next(_Message):
    type: Literal["NEXT"] = "NEXT"
    docId: str


class Answers(_Message):
    type: Literal["ANSWERS"] = "ANSWERS"
    docId: str
    choices: list[int]


class Ratings(_Message):
    type: Literal["RATINGS"] = "RATINGS"
    items: list[int]


# outbound (server -> client)

class ShowDoc(_Message):
    type: Literal["SHOW_DOC"] = "SHOW_DOC"
    doc: dict


class Highlight(_Message):
    type: Literal["HIGHLIGHT"] = "HIGHLIGHT"
    refId: str
    barIds: list[str]
    outline: str = "#000000"
    width: int = 3


class Desaturate(_Message):
    type: Literal["DESATURATE"] = "DESATURATE"
    refId: str
    outline: str = "#808080"


class Remove(_Message):
    type: Literal["REMOVE"] = "REMOVE"
    refId: str


class Questions(_Message):
    type: Literal["QUESTIONS"] = "QUESTIONS"
    docId: str
    items: list[dict]


class End(_Message):
    type: Literal["END"] = "END"


class Error(_Message):
    type: Literal["ERROR"] = "ERROR"
    code: str
    message: str


Inbound = Union[Hello, Gaze, DocReady, Next, Answers, Ratings]
Outbound = Union[ShowDoc, Highlight, Desaturate, Remove, Questions, End, Error]
Message = Union[Inbound, Outbound]

_TYPES: dict[str, type[_Message]] = {
    "HELLO": Hello,
    "GAZE": Gaze,
    "DOC_READY": DocReady,
    "NEXT": Next,
    "ANSWERS": Answers,
    "RATINGS": Ratings,
    "SHOW_DOC": ShowDoc,
    "HIGHLIGHT": Highlight,
    "DESATURATE": Desaturate,
    "REMOVE": Remove,
    "QUESTIONS": Questions,
    "END": End,
    "ERROR": Error,
}


def encode(message: Message) -> str:
    """One message as one line of JSON (no trailing newline)."""
    return json.dumps(message.model_dump(mode="json"), separators=(", ", ": "))


def decode(line: str) -> Message:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed message: {e}") from None
    if not isinstance(raw, dict) or "type" not in raw:
        raise ProtocolError("message must be an object with a 'type' field")
    cls = _TYPES.get(raw["type"])
    if cls is None:
        raise ProtocolError(f"unknown message type {raw['type']!r}")
    try:
        return cls.model_validate(raw)
    except ValidationError as e:
        raise ProtocolError(f"invalid {raw['type']} message: {e}") from None
