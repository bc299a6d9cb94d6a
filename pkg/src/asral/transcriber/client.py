"""Client for external transcriber backends speaking the wire protocol.

Requests are serialized per connection; concurrent scoring threads each get
their own pooled connection, so worker fan-out never interleaves frames.
"""

from __future__ import annotations

import socket
import threading
from typing import Sequence

from ..manifest import DatasetState, Utterance
from .base import AdaptAck, PassSet, check_passes, derive_pass_seed
from .wire import (
    adapt_request,
    decode_message,
    encode_message,
    parse_endpoint,
    ping_request,
    transcribe_request,
)


class TransportError(RuntimeError):
    """Connection, framing, or backend-reported protocol failure."""


class _Connection:
    def __init__(self, endpoint: str, timeout: float):
        kind, host, port = parse_endpoint(endpoint)
        try:
            if kind == "unix":
                self._sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
                self._sock.settimeout(timeout)
                self._sock.connect(host)
            else:
                self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise TransportError(f"cannot connect to backend at {endpoint}: {exc}") from exc
        self._reader = self._sock.makefile("rb")
        self._lock = threading.Lock()

    def request(self, message: dict) -> dict:
        with self._lock:
            try:
                self._sock.sendall(encode_message(message))
                line = self._reader.readline()
            except OSError as exc:
                raise TransportError(f"backend I/O failed: {exc}") from exc
        if not line:
            raise TransportError("backend closed the connection")
        try:
            response = decode_message(line)
        except ValueError as exc:
            raise TransportError(f"unparseable backend response: {exc}") from exc
        if response.get("type") == "error":
            raise TransportError(f"backend error: {response.get('message', '<no message>')}")
        return response

    def close(self) -> None:
        try:
            self._reader.close()
            self._sock.close()
        except OSError:
            pass


class ExternalTranscriber:
    """Transcriber backed by a protocol server (reference adapter or real model)."""

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self._endpoint = endpoint
        self._timeout = timeout
        self._local = threading.local()
        self._connections: list[_Connection] = []
        self._pool_lock = threading.Lock()
        pong = self._request(ping_request())
        if pong.get("type") != "pong":
            raise TransportError(f"expected pong, got {pong.get('type')!r}")
        self.name = str(pong.get("backend_name", "external"))
        self.supports_dropout = bool(pong.get("supports_dropout", False))

    def transcribe_passes(self, utterance: Utterance, passes: int, run_seed: int) -> PassSet:
        check_passes(passes)
        hypotheses = []
        for t in range(passes):
            request = transcribe_request(
                utterance.id,
                utterance.payload,
                t,
                derive_pass_seed(run_seed, utterance.id, t),
            )
            response = self._request(request)
            if response.get("type") != "hypothesis":
                raise TransportError(f"expected hypothesis, got {response.get('type')!r}")
            if response.get("id") != utterance.id or response.get("pass_index") != t:
                raise TransportError(
                    f"backend response does not echo request identity "
                    f"(got id={response.get('id')!r}, pass_index={response.get('pass_index')!r})"
                )
            hypotheses.append(str(response.get("text", "")))
        return PassSet(utterance_id=utterance.id, hypotheses=tuple(hypotheses))

    def adapt(
        self,
        new_train_ids: Sequence[str],
        dataset: DatasetState,
        manifest_ref: str | None = None,
    ) -> AdaptAck:
        train_set = set(dataset.train)
        for uid in new_train_ids:
            if uid not in train_set:
                raise ValueError(f"adapt id {uid!r} is not in the train set")
        response = self._request(adapt_request(manifest_ref or ""))
        if response.get("type") != "ack":
            raise TransportError(f"expected ack, got {response.get('type')!r}")
        return AdaptAck(adapted=bool(response.get("adapted", False)), backend_name=self.name)

    def ping(self) -> dict:
        return self._request(ping_request())

    def close(self) -> None:
        with self._pool_lock:
            for conn in self._connections:
                conn.close()
            self._connections.clear()

    def __enter__(self) -> "ExternalTranscriber":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _request(self, message: dict) -> dict:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = _Connection(self._endpoint, self._timeout)
            self._local.conn = conn
            with self._pool_lock:
                self._connections.append(conn)
        return conn.request(message)
