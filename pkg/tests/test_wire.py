import random

import pytest
from hypothesis import given, settings, strategies as st

from ssgk import wire
from ssgk.errors import MalformedMessage, NonzeroPadBits, TruncatedInput
from ssgk.gf2 import BinaryPoly, BitMatrix
from ssgk.handshake import Msg1, Msg2, Msg3, PublicParams, role_rngs
from ssgk.params import make_mparams, mparams_for


def rand_matrix(n, rng):
    return BitMatrix([rng.getrandbits(n) for _ in range(n)], n)


def test_identity_bytes():
    assert wire.encode_matrix(BitMatrix.identity(2)) == bytes([0x02, 0x00, 0x01, 0x02])
    assert wire.decode_matrix(bytes([0x02, 0x00, 0x01, 0x02])).is_identity()


def test_matrix_row_layout_lsb_first():
    # 9 columns -> two bytes per row; entry (0, 8) lands in bit 0 of the second byte
    a = BitMatrix([1 << 8] + [0] * 8, 9)
    enc = wire.encode_matrix(a)
    assert enc[:2] == b"\x09\x00" and enc[2:4] == b"\x00\x01"
    assert len(enc) == 2 + 9 * 2


def test_bigint_encoding():
    assert wire.encode_bigint(0) == b"\x00\x00"
    assert wire.encode_bigint(255) == b"\x01\x00\xff"
    assert wire.encode_bigint(256) == b"\x02\x00\x00\x01"
    with pytest.raises(MalformedMessage):
        wire.decode_bigint(b"\x02\x00\x05\x00")
    with pytest.raises(ValueError):
        wire.encode_bigint(-1)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**600))
def test_bigint_roundtrip(v):
    assert wire.decode_bigint(wire.encode_bigint(v)) == v


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 140), st.randoms(use_true_random=False))
def test_matrix_roundtrip(n, rng):
    a = rand_matrix(n, rng)
    assert wire.decode_matrix(wire.encode_matrix(a)) == a


def test_nonzero_pad_bits():
    enc = bytearray(wire.encode_matrix(BitMatrix.identity(3)))
    enc[2] |= 0x80
    with pytest.raises(NonzeroPadBits):
        wire.decode_matrix(bytes(enc))


def test_zero_dimension_and_trailing_bytes():
    with pytest.raises(MalformedMessage):
        wire.decode_matrix(b"\x00\x00")
    with pytest.raises(MalformedMessage):
        wire.decode_matrix(wire.encode_matrix(BitMatrix.identity(2)) + b"\x00")


def test_message_roundtrips_1000_each():
    rng = random.Random(0)
    for _ in range(1000):
        t = rng.randint(1, 10)
        m1 = Msg1(tuple(rng.getrandbits(rng.randint(1, 130)) for _ in range(t)), tuple(rng.getrandbits(130) for _ in range(t)))
        assert wire.decode_msg1(wire.encode_msg1(m1)) == m1
        n = rng.randint(1, 40)
        m2 = Msg2(tuple(rand_matrix(n, rng) for _ in range(t)), tuple(rand_matrix(n, rng) for _ in range(t)))
        assert wire.decode_msg2(wire.encode_msg2(m2)) == m2
        m3 = Msg3(rand_matrix(rng.randint(1, 140), rng))
        assert wire.decode_msg3(wire.encode_msg3(m3)) == m3


def test_params_roundtrip_and_bytes():
    params = PublicParams(mparams_for(5, BinaryPoly.from_exponents(5, 2, 0)), 4)
    enc = wire.encode_params(params)
    assert enc == b"SSGK\x01\x10" + (10).to_bytes(4, "little") + b"\x05\x00\x01\x00\x1f\x04\x00\x01\x00\x25"
    assert wire.decode_params(enc) == params
    big = PublicParams(make_mparams(127, role_rngs(0)[0]), 8)
    assert wire.decode_params(wire.encode_params(big)) == big


def test_params_rejects_inconsistent_values():
    params = PublicParams(mparams_for(5, BinaryPoly.from_exponents(5, 2, 0)), 4)
    body = b"\x05\x00" + wire.encode_bigint(29) + b"\x04\x00" + wire.encode_bigint(params.mparams.P.bits)
    with pytest.raises(MalformedMessage):
        wire.decode_params(wire.encode_frame(wire.PARAMS, body))
    body = b"\x06\x00" + wire.encode_bigint(63) + b"\x04\x00" + wire.encode_bigint(0b1000011)
    with pytest.raises(MalformedMessage):
        wire.decode_params(wire.encode_frame(wire.PARAMS, body))


def test_frame_errors():
    m3 = wire.encode_msg3(Msg3(BitMatrix.identity(4)))
    with pytest.raises(MalformedMessage):
        wire.decode_msg3(b"XSGK" + m3[4:])
    with pytest.raises(MalformedMessage):
        wire.decode_msg3(m3[:4] + b"\x02" + m3[5:])
    with pytest.raises(MalformedMessage):
        wire.decode_msg3(m3[:5] + b"\x07" + m3[6:])
    with pytest.raises(MalformedMessage):
        wire.decode_msg1(m3)  # right frame, wrong type
    with pytest.raises(TruncatedInput):
        wire.decode_msg3(m3[:-1])
    with pytest.raises(TruncatedInput):
        wire.decode_msg3(m3[:6])
    with pytest.raises(MalformedMessage):
        wire.decode_msg3(m3 + b"\x00")
    huge = wire.HEADER.pack(wire.MAGIC, wire.VERSION, wire.MSG3, wire.MAX_PAYLOAD + 1)
    with pytest.raises(MalformedMessage):
        wire.parse_header(huge)


def test_truncation_at_every_offset():
    rng = random.Random(1)
    frame = wire.encode_msg2(Msg2((rand_matrix(9, rng),) * 2, (rand_matrix(9, rng),) * 2))
    for k in range(len(frame)):
        with pytest.raises(MalformedMessage):
            wire.decode_msg2(frame[:k])


def test_truncated_payload_inside_declared_length():
    frame = wire.encode_msg1(Msg1((5, 7), (1, 2)))
    # shrink the declared payload length too, so only the inner parse can notice
    payload = frame[wire.HEADER.size:-1]
    with pytest.raises(TruncatedInput):
        wire.decode_msg1(wire.encode_frame(wire.MSG1, payload))


def test_fingerprint():
    assert wire.fingerprint(BitMatrix.identity(2)) == "02000102"
    a = BitMatrix.identity(20)
    assert wire.fingerprint(a) == wire.encode_matrix(a)[:8].hex() and len(wire.fingerprint(a)) == 16


def test_roundtrip_over_seeded_handshakes():
    from ssgk.handshake import handshake_with_secrets

    params = PublicParams(make_mparams(5, role_rngs(0)[0]), 4)
    assert wire.decode_params(wire.encode_params(params)) == params
    for seed in range(200):
        _, bob_rng, alice_rng = role_rngs(seed)
        tr, _, _ = handshake_with_secrets(params, bob_rng, alice_rng=alice_rng)
        assert wire.decode_msg1(wire.encode_msg1(tr.msg1)) == tr.msg1
        assert wire.decode_msg2(wire.encode_msg2(tr.msg2)) == tr.msg2
        assert wire.decode_msg3(wire.encode_msg3(tr.msg3)) == tr.msg3


def test_msg2_with_missing_matrix():
    rng = random.Random(4)
    A = tuple(rand_matrix(9, rng) for _ in range(4))
    B = tuple(rand_matrix(9, rng) for _ in range(3))
    body = (4).to_bytes(2, "little") + b"".join(wire.encode_matrix(a) for a in A + B)
    with pytest.raises(TruncatedInput):
        wire.decode_msg2(wire.encode_frame(wire.MSG2, body))
