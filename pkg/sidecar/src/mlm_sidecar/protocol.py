"""JSON-lines message framing shared by the server loop and its tests.

Wire format, one JSON object per line:

    request:  {"id": <int >= 1>, "op": "embed" | "fill" | "info", ...op fields}
    response: {"id": <echoed id>, "ok": true,  "result": <op result>}
              {"id": <echoed id>, "ok": false, "error": <message>}

The very first line the worker writes is a banner response with id 0 carrying
the model fingerprint and embedding dimension.  Request ids must be strictly
increasing within a connection.  A line that is not a JSON object gets an
error response with id -1, since no id could be recovered from it.
"""

from __future__ import annotations

import json
from typing import Any

BANNER_ID = 0
MALFORMED_ID = -1

KNOWN_OPS = ("embed", "fill", "info")


class ProtocolError(Exception):
    """A request that is syntactically JSON but violates the protocol."""

    def __init__(self, message: str, request_id: int = MALFORMED_ID) -> None:
        super().__init__(message)
        self.request_id = request_id


def success(request_id: int, result: Any) -> str:
    return json.dumps({"id": request_id, "ok": True, "result": result})


def failure(request_id: int, message: str) -> str:
    return json.dumps({"id": request_id, "ok": False, "error": message})


def parse_request(line: str, last_id: int) -> dict[str, Any]:
    """Decode one request line and enforce id and op rules.

    Raises ProtocolError carrying the id to echo; MALFORMED_ID when the line
    never yielded a usable id of its own.
    """
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"request line is not valid JSON: {exc.msg}") from exc
    if not isinstance(message, dict):
        raise ProtocolError("request must be a JSON object")
    request_id = message.get("id")
    if not isinstance(request_id, int) or isinstance(request_id, bool):
        raise ProtocolError("request id must be an integer")
    if request_id <= last_id:
        raise ProtocolError(
            f"request id {request_id} is not greater than the previous id {last_id}",
            request_id=request_id,
        )
    op = message.get("op")
    if op not in KNOWN_OPS:
        raise ProtocolError(f"unknown op {op!r}", request_id=request_id)
    return message
