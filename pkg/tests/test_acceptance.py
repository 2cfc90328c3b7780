"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` or ``[FAIL]`` line (visible under
``pytest -v``) and then asserts.  Run the file directly for just the lines:
``python3 tests/test_acceptance.py``.
"""

import random
import statistics
import sys
import time

import pytest
from peer_util import two_process_handshake

from ssgk import analysis, wire
from ssgk.gf2 import BinaryPoly, BitMatrix, mat_order
from ssgk.handshake import (
    Msg1,
    Msg2,
    Msg3,
    PublicParams,
    alice_finalize,
    alice_respond,
    blinded_preimages,
    bob_complete,
    bob_init,
    gen_exponent_tuples,
    handshake_with_secrets,
    role_rngs,
)
from ssgk.params import make_mparams, mparams_for, supported_degrees


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        return ok

    return emit


def params_for(m, t, seed=0):
    return PublicParams(make_mparams(m, role_rngs(seed)[0]), t)


def seeded_run(params, seed):
    _, bob_rng, alice_rng = role_rngs(seed)
    return handshake_with_secrets(params, bob_rng, alice_rng=alice_rng)


def test_criterion_1_key_agreement(report):
    start = time.perf_counter()
    agreed = total = 0
    for m, t in [(5, 4), (7, 4), (13, 6)]:
        params = params_for(m, t)
        for seed in range(100):
            _, bob_rng, alice_rng = role_rngs(seed)
            msg1, bob = bob_init(params, bob_rng)
            msg2, alice = alice_respond(params, msg1, alice_rng)
            msg3, k_bob = bob_complete(msg2, bob, params=params)
            agreed += alice_finalize(msg3, alice) == k_bob
            total += 1
    elapsed = time.perf_counter() - start
    ok = agreed == total == 300 and elapsed < 10
    report(1, ok, f"{agreed}/{total} runs agree at (5,4),(7,4),(13,6); {elapsed:.2f} s (limit 10 s)")
    assert ok


def test_criterion_2_order_spectrum(report):
    params = params_for(5, 4)
    phi = params.mparams.phi_factors
    bad = []
    for seed in range(20):
        tr, alice, _ = seeded_run(params, seed)
        M = alice.master
        got = {
            "M": mat_order(M.M, phi),
            "M^6": mat_order(M.T, phi),
            "M^3": mat_order(M.U, phi),
            "M^2": mat_order(M.V, phi),
        }
        want = {"M": 186, "M^6": 31, "M^3": 62, "M^2": 93}
        a_orders = {mat_order(a, phi) for a in tr.msg2.A}
        b_orders = {mat_order(b, phi) for b in tr.msg2.B}
        y_order = mat_order(tr.msg3.Y, phi)
        if got != want or a_orders != {62} or b_orders != {93} or y_order not in (1, 31):
            bad.append((seed, got, a_orders, b_orders, y_order))
    ok = not bad
    report(2, ok, f"20 instances at m=5, exact orders 186/31/62/93, A_i=62, B_i=93, Y in {{1,31}}; failures={bad}")
    assert ok


def test_criterion_3_tuple_constraints(report):
    mp = mparams_for(5, BinaryPoly.from_exponents(5, 2, 0))
    p = mp.p
    rng = random.Random(2024)
    checked = failures = 0
    for k in range(1000):
        t = 4 + k % 5
        msg1, bob = gen_exponent_tuples(PublicParams(mp, t), rng)
        mu, sigma, theta = msg1.mu, msg1.sigma, bob.theta
        good = (
            sum(a * b for a, b in zip(mu, theta)) % (2 * p) == 0
            and sum(a * b for a, b in zip(sigma, theta)) % (3 * p) == 0
            and all(v % 2 == 1 for v in mu)
            and all(v % 3 != 0 for v in sigma)
            and len(mu) == len(sigma) == len(theta) == t
        )
        checked += 1
        failures += not good
    ok = checked == 1000 and failures == 0
    report(3, ok, f"{checked} tuples at p=31, t=4..8, {failures} constraint violations")
    assert ok


def test_criterion_4_theorem2(report):
    params = params_for(5, 4)
    p = params.p
    results = []
    for seed in range(10):
        tr, alice, _ = seeded_run(params, seed)
        a, b = blinded_preimages(alice, tr.msg1)
        results.append(analysis.theorem2_scan(a[0], b[0], p) and analysis.theorem2_scan(b[0], a[0], p))
    ok = all(results)
    report(4, ok, f"{sum(results)}/10 instances: no x in [1, 186] with A'1^x = B'1 or B'1^x = A'1")
    assert ok


def test_criterion_5_census(report):
    start = time.perf_counter()
    c3 = analysis.gl_order_census(3)
    c2 = analysis.gl_order_census(2)
    elapsed = time.perf_counter() - start
    ok = c3 == {1, 2, 3, 4, 7} and c2 == {1, 2, 3} and elapsed < 5
    report(5, ok, f"GL(3,2) orders {sorted(c3)}, GL(2,2) orders {sorted(c2)}; {elapsed:.2f} s (limit 5 s)")
    assert ok


def test_criterion_6_attack_underdetermined(report):
    params = params_for(5, 4)
    start = time.perf_counter()
    reports, skipped, seed = [], 0, 0
    while len(reports) < 10:
        tr, alice, bob = seeded_run(params, seed)
        seed += 1
        if tr.degenerate:
            # K = I is public through Y = I, no attack is needed
            skipped += 1
            continue
        reports.append(analysis.mount_dlog_attack(tr, params, (alice, bob), rng=random.Random(seed)))
    elapsed = time.perf_counter() - start
    counts_ok = all(
        r.equation_count(s) == 3 and r.unknown_count(s) == 5 for r in reports for s in ("I", "II")
    )
    consistent = all(r.secrets_consistent for r in reports)
    ratios = min(len(r.candidate_ratios) for r in reports)
    keys = min(r.ratio_keys_distinct for r in reports)
    ok = counts_ok and consistent and ratios >= 2 and keys >= 2 and elapsed < 60
    report(
        6,
        ok,
        f"10 transcripts (seeds 0..{seed - 1}, {skipped} degenerate K=I skipped): dlogs ok, "
        f"3 eq vs 5 unknowns={counts_ok}, secrets consistent={consistent}, "
        f"min ratios={ratios}, min distinct keys={keys}; {elapsed:.2f} s (limit 60 s)",
    )
    assert ok


def test_criterion_7_ddh_simulator(report):
    params = params_for(5, 4)
    p = params.p
    proper_ok = 0
    differing = 0
    for seed in range(10):
        tr, alice, _ = seeded_run(params, seed)
        rng = random.Random(1000 + seed)
        quad = analysis.proper_quadruple(tr, alice)
        sim = analysis.ddh_simulate_H(quad, alice.master, alice.R, alice.S, params, rng)
        proper_ok += analysis.verify_transcript_orders(sim, p) and sim.key == tr.key
        fake, _ = analysis.random_quadruple(tr, alice, rng)
        sim_fake = analysis.ddh_simulate_H(fake, alice.master, alice.R, alice.S, params, rng)
        differing += sim_fake.key != tr.key
    ok = proper_ok == 10 and differing >= 9
    report(7, ok, f"proper quadruples reproducing K with valid orders: {proper_ok}/10; random-c keys differing: {differing}/10 (need >= 9)")
    assert ok


def _role_compute_times(params, seed):
    _, bob_rng, alice_rng = role_rngs(seed)
    t0 = time.process_time()
    msg1, bob = bob_init(params, bob_rng)
    bob_time = time.process_time() - t0
    t0 = time.process_time()
    msg2, alice = alice_respond(params, msg1, alice_rng)
    alice_time = time.process_time() - t0
    t0 = time.process_time()
    msg3, k_bob = bob_complete(msg2, bob, params=params)
    bob_time += time.process_time() - t0
    t0 = time.process_time()
    k_alice = alice_finalize(msg3, alice)
    alice_time += time.process_time() - t0
    assert k_alice == k_bob
    return bob_time, alice_time


def test_criterion_8_wire(report):
    rng = random.Random(8)

    def rand_matrix(n):
        return BitMatrix([rng.getrandbits(n) for _ in range(n)], n)

    degrees = [m for m, _, p in supported_degrees() if m != 2]
    failures = {"Msg1": 0, "Msg2": 0, "Msg3": 0, "Params": 0}
    for _ in range(1000):
        t = rng.randint(4, 8)
        m1 = Msg1(tuple(rng.getrandbits(rng.randint(1, 128)) | 1 for _ in range(t)), tuple(rng.getrandbits(128) for _ in range(t)))
        failures["Msg1"] += wire.decode_msg1(wire.encode_msg1(m1)) != m1
        n = rng.choice([6, 9, 17, 64, 131])
        m2 = Msg2(tuple(rand_matrix(n) for _ in range(t)), tuple(rand_matrix(n) for _ in range(t)))
        failures["Msg2"] += wire.decode_msg2(wire.encode_msg2(m2)) != m2
        m3 = Msg3(rand_matrix(rng.randint(1, 131)))
        failures["Msg3"] += wire.decode_msg3(wire.encode_msg3(m3)) != m3
        m = rng.choice(degrees)
        mp = make_mparams(m, rng) if m <= 31 else _large_params(m)
        pp = PublicParams(mp, rng.randint(4, min(8, mp.p - 1)))
        failures["Params"] += wire.decode_params(wire.encode_params(pp)) != pp

    fps = {}
    for m, t in [(5, 4), (127, 8)]:
        fps[(m, t)] = two_process_handshake(m, t, seed=1)
    fp_ok = all(a == b for a, b in fps.values())

    params = params_for(127, 8)
    samples = [_role_compute_times(params, seed) for seed in range(3)]
    bob_t = statistics.median(s[0] for s in samples)
    alice_t = statistics.median(s[1] for s in samples)
    ok = not any(failures.values()) and fp_ok and bob_t < 1 and alice_t < 1
    report(
        8,
        ok,
        f"roundtrip failures {failures} over 1000 each; two-process fingerprints match at (5,4)/(127,8): {fp_ok}; "
        f"m=127,t=8 compute Bob {bob_t:.3f} s, Alice {alice_t:.3f} s (limit 1 s each)",
    )
    assert ok


_LARGE = {}


def _large_params(m):
    # primitive search at big m costs ~0.3 s; one polynomial per degree is enough here
    if m not in _LARGE:
        _LARGE[m] = make_mparams(m, random.Random(m))
    return _LARGE[m]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
