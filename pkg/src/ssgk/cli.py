"""Command-line entry point: ``ssgk params|handshake|peer|analyze``."""

from __future__ import annotations

import argparse
import json
import socket
import sys

from . import analysis, peer, wire
from .errors import SSGKError, UnsupportedDegreeError
from .handshake import PublicParams, alice_finalize, handshake_with_secrets, role_rngs
from .params import make_mparams

EXIT_OK, EXIT_PROTOCOL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _public_params(args) -> PublicParams:
    params_rng, _, _ = role_rngs(args.seed)
    try:
        return PublicParams(make_mparams(args.m, params_rng), args.t)
    except UnsupportedDegreeError as exc:
        raise UsageError(f"unsupported degree: {exc}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(fields: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(fields, indent=2, default=str))
        return
    for k, v in fields.items():
        if isinstance(v, (list, dict)):
            v = json.dumps(v, default=str)
        print(f"{k}: {v}")


def cmd_params(args) -> int:
    params = _public_params(args)
    mp = params.mparams
    _emit(
        {
            "m": mp.m,
            "n": mp.n,
            "t": params.t,
            "p": mp.p,
            "cofactor": mp.cofactor,
            "phi": mp.phi,
            "P": str(mp.P),
            "P_bits": hex(mp.P.bits),
            "factors_2m_minus_1": [list(f) for f in mp.factors.factors],
            "wire": wire.encode_params(params).hex(),
        },
        args.json,
    )
    return EXIT_OK


def cmd_handshake(args) -> int:
    params = _public_params(args)
    _, bob_rng, alice_rng = role_rngs(args.seed)
    transcript, alice, _ = handshake_with_secrets(params, bob_rng, alice_rng=alice_rng, strict=args.strict)
    bob_fp = wire.fingerprint(transcript.key.K)
    alice_fp = wire.fingerprint(alice_finalize(transcript.msg3, alice).K)
    match = bob_fp == alice_fp
    _emit(
        {
            "m": params.mparams.m,
            "t": params.t,
            "p": params.p,
            "alice_fingerprint": alice_fp,
            "bob_fingerprint": bob_fp,
            "degenerate_key": transcript.degenerate,
            "result": "MATCH" if match else "MISMATCH",
        },
        args.json,
    )
    return EXIT_OK if match else EXIT_PROTOCOL


def cmd_peer(args) -> int:
    if args.listen:
        params = _public_params(args)
        address = peer.parse_address(args.listen)
        with socket.create_server(address) as listener:
            host, port = listener.getsockname()[:2]
            print(f"listening on {host}:{port}", flush=True)

            def report(k, outcome):
                if isinstance(outcome, BaseException):
                    print(f"connection {k}: error: {outcome}", flush=True)
                else:
                    print(f"fingerprint: {wire.fingerprint(outcome.K)}", flush=True)

            results = peer.serve(listener, params, args.seed, args.connections, args.timeout, report)
        return EXIT_PROTOCOL if any(isinstance(r, BaseException) for r in results) else EXIT_OK
    params = _public_params(args) if args.m is not None else None
    key = peer.connect(peer.parse_address(args.connect), args.seed, params, args.timeout)
    print(f"fingerprint: {wire.fingerprint(key.K)}", flush=True)
    return EXIT_OK


def cmd_analyze(args) -> int:
    import random

    if args.attack == "census":
        orders = sorted(analysis.gl_order_census(args.n))
        _emit({"n": args.n, "orders": ",".join(map(str, orders))}, args.json)
        return EXIT_OK
    params = _public_params(args)
    _, bob_rng, alice_rng = role_rngs(args.seed)
    transcript, alice, bob = handshake_with_secrets(params, bob_rng, alice_rng=alice_rng)
    p = params.p
    if args.attack == "dlog":
        report = analysis.mount_dlog_attack(transcript, params, (alice, bob), rng=random.Random(args.seed))
        _emit(report.as_dict(), args.json)
        return EXIT_OK
    if args.attack == "theorem2":
        from .handshake import blinded_preimages

        a_primes, b_primes = blinded_preimages(alice, transcript.msg1)
        fields = {}
        for i, (a, b) in enumerate(zip(a_primes, b_primes), start=1):
            fields[f"A'_{i}^x != B'_{i}"] = analysis.theorem2_scan(a, b, p)
            fields[f"B'_{i}^x != A'_{i}"] = analysis.theorem2_scan(b, a, p)
        fields["proof_cases"] = analysis.theorem2_proof_cases(a_primes[0], b_primes[0], p, range(1, 6 * p + 1))
        fields["orders"] = analysis.alternative_generator_orders(transcript, p, random.Random(args.seed))
        _emit(fields, args.json)
        return EXIT_OK if all(v for k, v in fields.items() if k.startswith(("A'", "B'"))) else EXIT_PROTOCOL
    # ddh
    rng = random.Random(args.seed)
    master, R, S = alice.master, alice.R, alice.S
    proper = analysis.proper_quadruple(transcript, alice)
    sim = analysis.ddh_simulate_H(proper, master, R, S, params, rng)
    fake, c = analysis.random_quadruple(transcript, alice, rng)
    sim_fake = analysis.ddh_simulate_H(fake, master, R, S, params, rng)
    _emit(
        {
            "proper_orders_ok": analysis.verify_transcript_orders(sim, p),
            "proper_key_matches_run": sim.key == transcript.key,
            "random_c": c,
            "random_orders_ok": analysis.verify_transcript_orders(sim_fake, p),
            "random_key_matches_run": sim_fake.key == transcript.key,
        },
        args.json,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssgk", description="Secret-subgroup-generator key agreement over GF(2) matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, required=True, defaults=(None, None, None)):
        sp.add_argument("--m", type=int, required=required and defaults[0] is None, default=defaults[0], help="polynomial degree")
        sp.add_argument("--t", type=int, required=required and defaults[1] is None, default=defaults[1], help="tuple length")
        sp.add_argument("--seed", type=int, default=0 if defaults[2] is None else defaults[2])
        sp.add_argument("--json", action="store_true", help="emit JSON instead of key: value lines")

    sp = sub.add_parser("params", help="print public parameters")
    common(sp)
    sp.set_defaults(func=cmd_params)

    sp = sub.add_parser("handshake", help="run both roles in process")
    common(sp)
    sp.add_argument("--strict", action="store_true", help="also check the orders of A_i, B_i and Y")
    sp.set_defaults(func=cmd_handshake)

    sp = sub.add_parser("peer", help="run one role over TCP")
    where = sp.add_mutually_exclusive_group(required=True)
    where.add_argument("--listen", metavar="ADDR", help="HOST:PORT to listen on (responder / Bob); port 0 picks one")
    where.add_argument("--connect", metavar="ADDR", help="HOST:PORT to connect to (initiator / Alice)")
    common(sp, required=False)
    sp.add_argument("--timeout", type=float, default=peer.DEFAULT_TIMEOUT, help="seconds to wait per message")
    sp.add_argument("--connections", type=int, default=1, help="connections to serve before exiting")
    sp.set_defaults(func=cmd_peer)

    sp = sub.add_parser("analyze", help="cryptanalysis harness")
    common(sp, defaults=(5, 4, 0))
    sp.add_argument("--attack", choices=["dlog", "theorem2", "census", "ddh"], default="dlog")
    sp.add_argument("--n", type=int, default=3, help="matrix size for --attack census")
    sp.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "peer" and args.listen and (args.m is None or args.t is None):
        parser.error("--listen needs --m and --t")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SSGKError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
