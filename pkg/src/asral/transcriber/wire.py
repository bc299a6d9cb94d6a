"""Normative wire format for external transcriber backends.

Newline-delimited JSON over a TCP or UNIX-domain byte stream. One JSON
object per line, UTF-8, compact separators, and the field order below is
normative (bit-exact golden transcripts are shipped in protocol_goldens/):

    {"type":"ping"}
        -> {"type":"pong","backend_name":<str>,"supports_dropout":<bool>}
    {"type":"transcribe","id":<str>,"payload":<str>,"pass_index":<int>,"pass_seed":<int>}
        -> {"type":"hypothesis","id":<str>,"pass_index":<int>,"text":<str>}
    {"type":"adapt","manifest_ref":<str>}
        -> {"type":"ack","adapted":<bool>}

A malformed request yields {"type":"error","message":<str>} and the
connection stays open. pass_seed is an unsigned 64-bit integer transmitted
as a plain JSON number; decoders must keep its full precision.
"""

from __future__ import annotations

import json


def encode_message(message: dict) -> bytes:
    """Compact JSON + newline; dict insertion order is the wire order."""
    return (json.dumps(message, ensure_ascii=False, separators=(",", ":")) + "\n").encode(
        "utf-8"
    )


def decode_message(line: bytes | str) -> dict:
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    message = json.loads(line)
    if not isinstance(message, dict) or "type" not in message:
        raise ValueError("protocol message must be a JSON object with a 'type' field")
    return message


def ping_request() -> dict:
    return {"type": "ping"}


def transcribe_request(utterance_id: str, payload: str, pass_index: int, pass_seed: int) -> dict:
    return {
        "type": "transcribe",
        "id": utterance_id,
        "payload": payload,
        "pass_index": pass_index,
        "pass_seed": pass_seed,
    }


def adapt_request(manifest_ref: str) -> dict:
    return {"type": "adapt", "manifest_ref": manifest_ref}


def parse_endpoint(endpoint: str) -> tuple[str, str, int | None]:
    """Parse "host:port" or "unix:/path/to.sock" endpoint strings."""
    if endpoint.startswith("unix:"):
        path = endpoint[len("unix:") :]
        if not path:
            raise ValueError("unix endpoint needs a socket path")
        return ("unix", path, None)
    host, sep, port = endpoint.rpartition(":")
    if not sep or not host:
        raise ValueError(f"endpoint {endpoint!r} is not host:port or unix:/path")
    try:
        return ("tcp", host, int(port))
    except ValueError as exc:
        raise ValueError(f"endpoint port in {endpoint!r} is not an integer") from exc
