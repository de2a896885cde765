"""Single-threaded request loop binding the protocol to a loaded model."""

from __future__ import annotations

from typing import Any, Callable, TextIO

from mlm_sidecar.model import MaskedLMEngine, OpError
from mlm_sidecar.protocol import (
    BANNER_ID,
    MALFORMED_ID,
    ProtocolError,
    failure,
    parse_request,
    success,
)


class StdioServer:
    """Serve embed / fill / info requests over a pair of text streams.

    Requests are handled strictly one at a time in arrival order.  Request
    errors of any kind produce an error response and the loop continues; only
    the input stream closing ends it.
    """

    def __init__(
        self,
        checkpoint: str,
        stdin: TextIO,
        stdout: TextIO,
        engine_factory: Callable[[str], MaskedLMEngine] = MaskedLMEngine,
    ) -> None:
        self._checkpoint = checkpoint
        self._stdin = stdin
        self._stdout = stdout
        self._engine_factory = engine_factory

    def _emit(self, line: str) -> None:
        self._stdout.write(line + "\n")
        self._stdout.flush()

    def serve(self) -> int:
        """Run until stdin closes.  Returns a process exit code."""
        engine: MaskedLMEngine | None = None
        load_error = ""
        try:
            engine = self._engine_factory(self._checkpoint)
        except Exception as exc:
            load_error = f"model load failed: {exc}"
        if engine is None:
            self._emit(failure(BANNER_ID, load_error))
        else:
            self._emit(success(BANNER_ID, engine.info()))

        last_id = BANNER_ID
        for raw in self._stdin:
            line = raw.strip()
            if not line:
                self._emit(failure(MALFORMED_ID, "blank request line"))
                continue
            try:
                message = parse_request(line, last_id)
            except ProtocolError as exc:
                # A validated id is consumed even when its op was rejected.
                last_id = max(last_id, exc.request_id)
                self._emit(failure(exc.request_id, str(exc)))
                continue
            request_id = int(message["id"])
            last_id = request_id
            if engine is None:
                self._emit(failure(request_id, load_error))
                continue
            try:
                result = self._dispatch(engine, message)
            except OpError as exc:
                self._emit(failure(request_id, str(exc)))
            except Exception as exc:
                self._emit(failure(request_id, f"{type(exc).__name__}: {exc}"))
            else:
                self._emit(success(request_id, result))
        return 0 if engine is not None else 1

    @staticmethod
    def _dispatch(engine: MaskedLMEngine, message: dict[str, Any]) -> Any:
        op = message["op"]
        if op == "embed":
            texts = message.get("texts")
            if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                raise OpError("embed requires a 'texts' field holding a list of strings")
            return {"vectors": engine.embed(texts), "dimension": engine.dimension}
        if op == "fill":
            text = message.get("text")
            if not isinstance(text, str):
                raise OpError("fill requires a 'text' field holding a string")
            return {"text": engine.fill(text)}
        return engine.info()
