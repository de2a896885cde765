"""Client for an external mask-fill worker speaking JSON lines on stdio.

Protocol: one JSON object per line, UTF-8. Requests carry a strictly
increasing integer `id`, an `op` of `embed`, `fill`, or `info`, and the
op's payload fields. Responses echo the id with `ok`, `result`, and, on
failure, `error`. The worker emits a banner response with id 0 before
serving; a banner with ok=false means the worker's model failed to load.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
from typing import Sequence

import numpy as np

from semlink.framing import MASK_TOKEN
from semlink.semantics import ProviderError


class SidecarProcess:
    """Owns one worker subprocess and serializes requests to it."""

    def __init__(self, command: str | Sequence[str], startup_timeout: float = 120.0) -> None:
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise ProviderError("sidecar command is empty")
        self._command = " ".join(argv)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProviderError(f"could not start sidecar {self._command!r}: {exc}") from exc
        self._lock = threading.Lock()
        self._next_id = 1
        self._timer: threading.Timer | None = threading.Timer(startup_timeout, self._proc.kill)
        self._timer.start()
        try:
            banner = self._read_response(expect_id=0)
        finally:
            self._timer.cancel()
            self._timer = None
        if not banner.get("ok"):
            self.close()
            raise ProviderError(f"sidecar failed to start: {banner.get('error')}")
        result = banner.get("result") or {}
        self.fingerprint = str(result.get("fingerprint", "unknown"))
        self.dimension = int(result.get("dimension", 0))

    def _read_response(self, expect_id: int) -> dict:
        line = self._proc.stdout.readline()
        if not line:
            code = self._proc.poll()
            raise ProviderError(
                f"sidecar {self._command!r} closed its output stream (exit code {code})"
            )
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProviderError(f"sidecar sent a non-JSON line: {line!r}") from exc
        if response.get("id") != expect_id:
            raise ProviderError(
                f"sidecar response id {response.get('id')} does not match request id {expect_id}"
            )
        return response

    def request(self, op: str, **payload) -> dict:
        """Send one request and wait for its response; raises on ok=false."""
        with self._lock:
            request_id = self._next_id
            self._next_id += 1
            if self._proc.stdin is None or self._proc.poll() is not None:
                raise ProviderError(f"sidecar {self._command!r} is not running")
            try:
                self._proc.stdin.write(json.dumps({"id": request_id, "op": op, **payload}) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ProviderError(f"sidecar {self._command!r} pipe broke: {exc}") from exc
            response = self._read_response(request_id)
        if not response.get("ok"):
            raise ProviderError(f"sidecar {op} failed: {response.get('error')}")
        result = response.get("result")
        if result is None:
            raise ProviderError(f"sidecar {op} response carried no result")
        return result

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        result = self.request("embed", texts=list(texts))
        vectors = [np.asarray(v, dtype=float) for v in result["vectors"]]
        if len(vectors) != len(texts):
            raise ProviderError(
                f"sidecar returned {len(vectors)} vectors for {len(texts)} texts"
            )
        return vectors

    def fill(self, text: str) -> str:
        return str(self.request("fill", text=text)["text"])

    def info(self) -> dict:
        return self.request("info")

    def close(self) -> None:
        if self._proc.stdin is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        try:
            self._proc.wait(timeout=10.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self) -> SidecarProcess:
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class SidecarEmbedder:
    """Embedder facade over a running sidecar process."""

    def __init__(self, process: SidecarProcess) -> None:
        self._process = process
        self.fingerprint = f"sidecar:{process.fingerprint}"

    def embed(self, text: str) -> np.ndarray:
        return self._process.embed_batch([text])[0]


class SidecarCorrector:
    """Corrector facade over a running sidecar process.

    Text without any mask token passes through unchanged; the worker's
    fill op requires at least one mask.
    """

    def __init__(self, process: SidecarProcess) -> None:
        self._process = process
        self.fingerprint = f"sidecar:{process.fingerprint}"

    def correct(self, masked_text: str) -> str:
        if MASK_TOKEN not in masked_text:
            return masked_text
        return self._process.fill(masked_text)
