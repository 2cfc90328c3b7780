"""Bit-exact encoding of protocol messages.

Layout (all multi-byte integers little-endian)::

    frame   = "SSGK" | version u8 (1) | type u8 | payload_len u32 | payload
    matrix  = n u16 | n rows of ceil(n/8) bytes, bit j of a row at byte j//8, bit j%8
    bigint  = len u16 | len bytes of magnitude, no high zero byte (0 -> len 0)

    Msg1    = t u16 | t bigint (mu) | t bigint (sigma)
    Msg2    = t u16 | t matrix (A)  | t matrix (B)
    Msg3    = matrix (Y)
    Params  = m u16 | bigint (p) | t u16 | bigint (P coefficient bits)
"""

from __future__ import annotations

import struct

from .errors import MalformedMessage, NonzeroPadBits, TruncatedInput, UnsupportedDegreeError
from .gf2 import BinaryPoly, BitMatrix
from .handshake import Msg1, Msg2, Msg3, PublicParams
from .params import mparams_for

MAGIC = b"SSGK"
VERSION = 0x01
MSG1, MSG2, MSG3, PARAMS = 0x01, 0x02, 0x03, 0x10
MESSAGE_TYPES = {MSG1: "Msg1", MSG2: "Msg2", MSG3: "Msg3", PARAMS: "Params"}
HEADER = struct.Struct("<4sBBI")
MAX_PAYLOAD = 1 << 24


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, k: int) -> bytes:
        if self.pos + k > len(self.data):
            raise TruncatedInput(f"needed {k} bytes at offset {self.pos}, only {len(self.data) - self.pos} left")
        out = bytes(self.data[self.pos:self.pos + k])
        self.pos += k
        return out

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "little")

    def finish(self) -> None:
        if self.pos != len(self.data):
            raise MalformedMessage(f"{len(self.data) - self.pos} trailing bytes")


def _u16(v: int) -> bytes:
    if not 0 <= v < 1 << 16:
        raise ValueError(f"{v} does not fit in u16")
    return v.to_bytes(2, "little")


def encode_matrix(a: BitMatrix) -> bytes:
    width = (a.n + 7) // 8
    return _u16(a.n) + b"".join(r.to_bytes(width, "little") for r in a.rows)


def _read_matrix(rd: _Reader) -> BitMatrix:
    n = rd.u16()
    if n == 0:
        raise MalformedMessage("matrix dimension 0")
    width = (n + 7) // 8
    raw = rd.take(n * width)
    rows = []
    for i in range(n):
        r = int.from_bytes(raw[i * width:(i + 1) * width], "little")
        if r >> n:
            raise NonzeroPadBits(f"row {i} has bits set past column {n}")
        rows.append(r)
    return BitMatrix(rows, n)


def decode_matrix(data: bytes) -> BitMatrix:
    rd = _Reader(data)
    a = _read_matrix(rd)
    rd.finish()
    return a


def encode_bigint(v: int) -> bytes:
    if v < 0:
        raise ValueError("only non-negative integers are encoded")
    raw = v.to_bytes((v.bit_length() + 7) // 8, "little")
    return _u16(len(raw)) + raw


def _read_bigint(rd: _Reader) -> int:
    k = rd.u16()
    raw = rd.take(k)
    if k and raw[-1] == 0:
        raise MalformedMessage("non-canonical integer: high byte is zero")
    return int.from_bytes(raw, "little")


def decode_bigint(data: bytes) -> int:
    rd = _Reader(data)
    v = _read_bigint(rd)
    rd.finish()
    return v


def encode_frame(msg_type: int, payload: bytes) -> bytes:
    if msg_type not in MESSAGE_TYPES:
        raise ValueError(f"unknown message type 0x{msg_type:02x}")
    return HEADER.pack(MAGIC, VERSION, msg_type, len(payload)) + payload


def parse_header(header: bytes) -> tuple[int, int]:
    """Validate a 10-byte header; returns ``(msg_type, payload_len)``."""
    if len(header) < HEADER.size:
        raise TruncatedInput("frame header is shorter than 10 bytes")
    magic, version, msg_type, length = HEADER.unpack(header[:HEADER.size])
    if magic != MAGIC:
        raise MalformedMessage(f"bad magic {magic!r}")
    if version != VERSION:
        raise MalformedMessage(f"unsupported version {version}")
    if msg_type not in MESSAGE_TYPES:
        raise MalformedMessage(f"unknown message type 0x{msg_type:02x}")
    if length > MAX_PAYLOAD:
        raise MalformedMessage(f"payload length {length} exceeds limit")
    return msg_type, length


def decode_frame(data: bytes) -> tuple[int, bytes]:
    msg_type, length = parse_header(data)
    payload = data[HEADER.size:]
    if len(payload) < length:
        raise TruncatedInput(f"payload declares {length} bytes, got {len(payload)}")
    if len(payload) > length:
        raise MalformedMessage(f"{len(payload) - length} bytes after the payload")
    return msg_type, payload


def _expect(data: bytes, msg_type: int) -> _Reader:
    got, payload = decode_frame(data)
    if got != msg_type:
        raise MalformedMessage(f"expected {MESSAGE_TYPES[msg_type]}, got {MESSAGE_TYPES[got]}")
    return _Reader(payload)


def encode_msg1(msg: Msg1) -> bytes:
    if len(msg.mu) != len(msg.sigma):
        raise ValueError("mu and sigma differ in length")
    body = _u16(len(msg.mu)) + b"".join(encode_bigint(v) for v in msg.mu + msg.sigma)
    return encode_frame(MSG1, body)


def decode_msg1(data: bytes) -> Msg1:
    rd = _expect(data, MSG1)
    t = rd.u16()
    mu = tuple(_read_bigint(rd) for _ in range(t))
    sigma = tuple(_read_bigint(rd) for _ in range(t))
    rd.finish()
    return Msg1(mu, sigma)


def encode_msg2(msg: Msg2) -> bytes:
    if len(msg.A) != len(msg.B):
        raise ValueError("A and B differ in length")
    body = _u16(len(msg.A)) + b"".join(encode_matrix(a) for a in msg.A + msg.B)
    return encode_frame(MSG2, body)


def decode_msg2(data: bytes) -> Msg2:
    rd = _expect(data, MSG2)
    t = rd.u16()
    A = tuple(_read_matrix(rd) for _ in range(t))
    B = tuple(_read_matrix(rd) for _ in range(t))
    rd.finish()
    return Msg2(A, B)


def encode_msg3(msg: Msg3) -> bytes:
    return encode_frame(MSG3, encode_matrix(msg.Y))


def decode_msg3(data: bytes) -> Msg3:
    rd = _expect(data, MSG3)
    Y = _read_matrix(rd)
    rd.finish()
    return Msg3(Y)


def encode_params(params: PublicParams) -> bytes:
    mp = params.mparams
    body = _u16(mp.m) + encode_bigint(mp.p) + _u16(params.t) + encode_bigint(mp.P.bits)
    return encode_frame(PARAMS, body)


def decode_params(data: bytes) -> PublicParams:
    rd = _expect(data, PARAMS)
    m = rd.u16()
    p = _read_bigint(rd)
    t = rd.u16()
    P = BinaryPoly(_read_bigint(rd))
    rd.finish()
    try:
        mparams = mparams_for(m, P)
        params = PublicParams(mparams, t)
    except (UnsupportedDegreeError, ValueError) as exc:
        raise MalformedMessage(f"invalid parameters: {exc}") from exc
    if mparams.p != p:
        raise MalformedMessage(f"p = {p} does not match the table entry for m = {m}")
    return params


def fingerprint(K: BitMatrix) -> str:
    """Lowercase hex of the first 8 bytes of the encoded matrix (a debugging aid)."""
    return encode_matrix(K)[:8].hex()
