"""Running the handshake between two endpoints of a byte stream.

The listener (responder) plays Bob because Bob speaks first: on connect it
sends the agreed parameters and Msg1.  The connecting side (initiator) plays
Alice.  Any object with ``sendall(bytes)``, ``recv(int)`` and
``settimeout(float)`` works as a transport; sockets do.
"""

from __future__ import annotations

import logging
import random
import socket
import threading
from typing import Protocol

from . import wire
from .errors import HandshakeTimeout, MalformedMessage, TruncatedInput
from .handshake import (
    PublicParams,
    SharedKey,
    alice_finalize,
    alice_respond,
    bob_complete,
    bob_init,
    role_rngs,
)

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0
INITIATOR, RESPONDER = "initiator", "responder"


class Transport(Protocol):
    def sendall(self, data: bytes) -> None: ...

    def recv(self, size: int) -> bytes: ...

    def settimeout(self, value: float | None) -> None: ...


class ParamsMismatch(MalformedMessage):
    """The responder announced parameters different from ours."""


def _recv_exact(transport: Transport, size: int) -> bytes:
    chunks = []
    remaining = size
    while remaining:
        try:
            chunk = transport.recv(remaining)
        except socket.timeout as exc:
            raise HandshakeTimeout("peer did not deliver the next message in time") from exc
        if not chunk:
            raise TruncatedInput(f"connection closed with {remaining} bytes outstanding")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def recv_frame(transport: Transport) -> bytes:
    """Read one whole frame; the header is checked before the payload is read."""
    header = _recv_exact(transport, wire.HEADER.size)
    _, length = wire.parse_header(header)
    return header + _recv_exact(transport, length)


def _send(transport: Transport, frame: bytes, record: list[bytes] | None) -> None:
    if record is not None:
        record.append(frame)
    transport.sendall(frame)


def _recv(transport: Transport, record: list[bytes] | None) -> bytes:
    frame = recv_frame(transport)
    if record is not None:
        record.append(frame)
    return frame


def peer_handshake(
    role: str,
    transport: Transport,
    params: PublicParams | None,
    rng: random.Random,
    *,
    timeout: float = DEFAULT_TIMEOUT,
    record: list[bytes] | None = None,
) -> SharedKey:
    """Run one side of the handshake and return its key.

    ``params`` may be None for the initiator, which then adopts whatever the
    responder announces.  Frames sent and received are appended to
    ``record`` in wire order when it is given.
    """
    transport.settimeout(timeout)
    if role == RESPONDER:
        if params is None:
            raise ValueError("the responder must know the public parameters")
        _send(transport, wire.encode_params(params), record)
        msg1, bob = bob_init(params, rng)
        _send(transport, wire.encode_msg1(msg1), record)
        msg2 = wire.decode_msg2(_recv(transport, record))
        msg3, key = bob_complete(msg2, bob, params=params)
        _send(transport, wire.encode_msg3(msg3), record)
        return key
    if role == INITIATOR:
        announced = wire.decode_params(_recv(transport, record))
        if params is not None and announced != params:
            raise ParamsMismatch("responder announced different public parameters")
        msg1 = wire.decode_msg1(_recv(transport, record))
        msg2, alice = alice_respond(announced, msg1, rng)
        _send(transport, wire.encode_msg2(msg2), record)
        msg3 = wire.decode_msg3(_recv(transport, record))
        return alice_finalize(msg3, alice)
    raise ValueError(f"role must be {INITIATOR!r} or {RESPONDER!r}, got {role!r}")


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must look like HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def connect(address: tuple[str, int], seed: int, params: PublicParams | None, timeout: float = DEFAULT_TIMEOUT) -> SharedKey:
    _, _, alice_rng = role_rngs(seed)
    with socket.create_connection(address, timeout=timeout) as sock:
        return peer_handshake(INITIATOR, sock, params, alice_rng, timeout=timeout)


def serve(
    listener: socket.socket,
    params: PublicParams,
    seed: int,
    connections: int = 1,
    timeout: float = DEFAULT_TIMEOUT,
    on_result=None,
) -> list[SharedKey | BaseException]:
    """Accept ``connections`` clients, each handled on its own thread.

    Connection ``k`` draws Bob's randomness from ``role_rngs(seed, k)``.
    ``on_result(k, key_or_error)`` is called as each handshake ends.
    """
    results: list[SharedKey | BaseException | None] = [None] * connections
    threads = []

    def handle(k: int, conn: socket.socket) -> None:
        _, bob_rng, _ = role_rngs(seed, k)
        try:
            with conn:
                results[k] = peer_handshake(RESPONDER, conn, params, bob_rng, timeout=timeout)
        except Exception as exc:  # reported to the caller, one bad peer must not stop the others
            log.warning("connection %d failed: %s", k, exc)
            results[k] = exc
        if on_result is not None:
            on_result(k, results[k])

    for k in range(connections):
        conn, _ = listener.accept()
        th = threading.Thread(target=handle, args=(k, conn), daemon=True)
        th.start()
        threads.append(th)
    for th in threads:
        th.join()
    return results
