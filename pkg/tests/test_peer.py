import socket
import threading

import pytest

from peer_util import two_process_handshake
from ssgk import peer, wire
from ssgk.errors import HandshakeTimeout, MalformedMessage, TruncatedInput
from ssgk.handshake import PublicParams, handshake_with_secrets, role_rngs
from ssgk.params import make_mparams


def params_for(m, t, seed=0):
    return PublicParams(make_mparams(m, role_rngs(seed)[0]), t)


def threaded_pair(params, seed, alice_params="same"):
    """Run both roles over a socketpair; returns (bob_key, alice_key, bob_frames, alice_frames)."""
    a_sock, b_sock = socket.socketpair()
    out = {}
    bob_frames, alice_frames = [], []

    def bob():
        try:
            out["bob"] = peer.peer_handshake(peer.RESPONDER, b_sock, params, role_rngs(seed)[1], timeout=10, record=bob_frames)
        except Exception as exc:
            out["bob"] = exc

    th = threading.Thread(target=bob)
    th.start()
    ap = params if alice_params == "same" else alice_params
    try:
        out["alice"] = peer.peer_handshake(peer.INITIATOR, a_sock, ap, role_rngs(seed)[2], timeout=10, record=alice_frames)
    except Exception as exc:
        out["alice"] = exc
    a_sock.close()
    th.join()
    b_sock.close()
    return out["bob"], out["alice"], bob_frames, alice_frames


@pytest.mark.parametrize("m,t", [(5, 4), (11, 5)])
def test_threaded_loopback_matches_in_process(m, t):
    params = params_for(m, t)
    bob_key, alice_key, bob_frames, alice_frames = threaded_pair(params, seed=3)
    assert bob_key == alice_key
    assert bob_frames == alice_frames
    _, bob_rng, alice_rng = role_rngs(3)
    tr, _, _ = handshake_with_secrets(params, bob_rng, alice_rng=alice_rng)
    expected = [
        wire.encode_params(params),
        wire.encode_msg1(tr.msg1),
        wire.encode_msg2(tr.msg2),
        wire.encode_msg3(tr.msg3),
    ]
    assert bob_frames == expected
    assert bob_key == tr.key


def test_initiator_without_params_adopts_announced():
    params = params_for(5, 4)
    bob_key, alice_key, _, _ = threaded_pair(params, seed=1, alice_params=None)
    assert bob_key == alice_key


def test_params_mismatch_is_rejected():
    params = params_for(5, 4)
    other = params_for(5, 6)
    bob_key, alice_key, _, _ = threaded_pair(params, seed=1, alice_params=other)
    assert isinstance(alice_key, peer.ParamsMismatch)
    assert isinstance(bob_key, (TruncatedInput, OSError))


def test_garbage_frame_rejected():
    a_sock, b_sock = socket.socketpair()
    with a_sock, b_sock:
        b_sock.sendall(b"HTTP/1.1 200 OK\r\n\r\n")
        with pytest.raises(MalformedMessage):
            peer.peer_handshake(peer.INITIATOR, a_sock, None, role_rngs(0)[2], timeout=5)


def test_early_close_is_truncation():
    a_sock, b_sock = socket.socketpair()
    with a_sock:
        b_sock.sendall(wire.encode_params(params_for(5, 4))[:7])
        b_sock.close()
        with pytest.raises(TruncatedInput):
            peer.peer_handshake(peer.INITIATOR, a_sock, None, role_rngs(0)[2], timeout=5)


def test_silent_peer_times_out():
    a_sock, b_sock = socket.socketpair()
    with a_sock, b_sock:
        with pytest.raises(HandshakeTimeout):
            peer.peer_handshake(peer.INITIATOR, a_sock, None, role_rngs(0)[2], timeout=0.2)


def test_unknown_role():
    a_sock, b_sock = socket.socketpair()
    with a_sock, b_sock, pytest.raises(ValueError):
        peer.peer_handshake("observer", a_sock, None, role_rngs(0)[2])


def test_parse_address():
    assert peer.parse_address("127.0.0.1:9000") == ("127.0.0.1", 9000)
    assert peer.parse_address(":0") == ("127.0.0.1", 0)
    with pytest.raises(ValueError):
        peer.parse_address("localhost")


def test_serve_handles_concurrent_clients():
    params = params_for(5, 4)
    with socket.create_server(("127.0.0.1", 0)) as listener:
        address = listener.getsockname()[:2]
        results = {}
        server = threading.Thread(target=lambda: results.update(enumerate(peer.serve(listener, params, 7, connections=3, timeout=10))))
        server.start()
        clients = [peer.connect(address, 7, params, timeout=10) for _ in range(3)]
        server.join()
    assert all(isinstance(k, type(clients[0])) for k in results.values())
    # each connection draws its own randomness, and every client key matches some server key
    assert {c.K for c in clients} <= {k.K for k in results.values()}


@pytest.mark.parametrize("m,t", [(5, 4), (127, 8)])
def test_two_process_loopback(m, t):
    server_fp, client_fp = two_process_handshake(m, t, seed=2)
    assert server_fp == client_fp and len(server_fp) == 16
