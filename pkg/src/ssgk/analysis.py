"""Cryptanalysis harness for desk-scale parameters.

Everything here runs exhaustively and is only meant for small ``p`` (31, 89,
...): discrete logs by enumeration, the order-based non-membership scans,
the separate-system candidate enumeration for ``gamma / alpha``, the
GL(n, 2) order census and the transcript simulator used by the DDH
reduction.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import gcd

from .errors import DimensionError, DlogFailed, RetryExhausted
from .gf2 import (
    MAX_ATTEMPTS,
    BitMatrix,
    FactoredOrder,
    has_order,
    is_nonsingular,
    mat_inv,
    mat_mul,
    mat_pow,
    multi_pow,
)
from .handshake import (
    AliceSecret,
    BobSecret,
    Msg1,
    Msg2,
    Msg3,
    PublicParams,
    SharedKey,
    Transcript,
)
from .params import MasterMatrix

MAX_ENUMERATION_P = 97
MAX_CENSUS_N = 4


def brute_dlog(base: BitMatrix, target: BitMatrix, max_exp: int) -> int | None:
    """Smallest ``e`` in ``[0, max_exp]`` with ``base ** e == target``."""
    cur = BitMatrix.identity(base.n)
    for e in range(max_exp + 1):
        if cur == target:
            return e
        cur = mat_mul(cur, base)
    return None


def power_index(base: BitMatrix, max_exp: int) -> dict[BitMatrix, int]:
    """Map each of ``base ** 0 .. base ** max_exp`` to its smallest exponent."""
    index: dict[BitMatrix, int] = {}
    cur = BitMatrix.identity(base.n)
    for e in range(max_exp + 1):
        index.setdefault(cur, e)
        cur = mat_mul(cur, base)
    return index


def theorem2_scan(a_prime: BitMatrix, b_prime: BitMatrix, p: int) -> bool:
    """True iff ``a_prime ** x != b_prime`` for every x in [1, 6p]."""
    cur = a_prime
    for _ in range(6 * p):
        if cur == b_prime:
            return False
        cur = mat_mul(cur, a_prime)
    return True


def theorem2_proof_cases(a_prime: BitMatrix, b_prime: BitMatrix, p: int, xs) -> dict[str, bool]:
    """Check the case split used to show ``A'^x`` never equals ``B'``.

    Each x falls in one case by ``g = gcd(x, 2p)``; the case holds when some
    power kills ``A'^x`` but not ``B'``:

    * ``g == 1``: exponent 2p
    * ``g == 2``: exponent p
    * ``g == p``: exponent 2
    * ``g == 2p``: ``A'^x`` is I while ``B'`` is not

    Returns ``{case: all sampled x in that case passed}`` for cases that occurred.
    """
    kill = {1: 2 * p, 2: p, p: 2, 2 * p: 1}
    results: dict[str, bool] = {}
    for x in xs:
        g = gcd(x, 2 * p)
        e = kill[g]
        ax = mat_pow(a_prime, x)
        ok = mat_pow(ax, e).is_identity() and not mat_pow(b_prime, e).is_identity()
        key = f"gcd={g}"
        results[key] = results.get(key, True) and ok
    return results


def _enumerate_gl(n: int):
    for rows in itertools.product(range(1 << n), repeat=n):
        a = BitMatrix(rows, n)
        if is_nonsingular(a):
            yield a


def _order_by_iteration(a: BitMatrix) -> int:
    cur = a
    d = 1
    while not cur.is_identity():
        cur = mat_mul(cur, a)
        d += 1
    return d


def gl_order_census(n: int) -> set[int]:
    """Orders of all elements of GL(n, 2), by enumerating every n x n matrix."""
    if not 1 <= n <= MAX_CENSUS_N:
        raise DimensionError(f"census enumerates 2^(n^2) matrices; need 1 <= n <= {MAX_CENSUS_N}")
    return {_order_by_iteration(a) for a in _enumerate_gl(n)}


@dataclass
class LinearSystem:
    """Congruences ``sum_k coefficients[j][k] * x_k = rhs[j] (mod moduli[j])``.

    ``unknowns`` lists the unknowns as the adversary faces them;
    ``linear_unknowns`` names the columns of ``coefficients`` after bundling
    each product such as ``alpha * eta_j`` into one variable.  ``rank_mod_p``
    is the rank of ``coefficients`` over GF(p).
    """

    name: str
    unknowns: list[str]
    linear_unknowns: list[str]
    coefficients: list[list[int]]
    rhs: list[int]
    moduli: list[int]
    rank_mod_p: int

    @property
    def equation_count(self) -> int:
        return len(self.rhs)

    @property
    def unknown_count(self) -> int:
        return len(self.unknowns)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "equations": self.equation_count,
            "unknowns": self.unknown_count,
            "unknown_names": self.unknowns,
            "linear_unknowns": self.linear_unknowns,
            "coefficients": self.coefficients,
            "rhs": self.rhs,
            "moduli": self.moduli,
            "rank_mod_p": self.rank_mod_p,
        }


def rank_mod_prime(rows: list[list[int]], p: int) -> int:
    work = [[v % p for v in row] for row in rows]
    cols = len(work[0]) if work else 0
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, len(work)) if work[i][c]), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = pow(work[r][c], -1, p)
        work[r] = [v * inv % p for v in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [(v - f * w) % p for v, w in zip(work[i], work[r])]
        r += 1
    return r


@dataclass
class AttackReport:
    c: list[int]
    d: list[int]
    y_log: int
    systems: dict[str, LinearSystem]
    alpha_candidates: int
    gamma_candidates: int
    candidate_ratios: list[int]
    theta_candidates: list[tuple[int, ...]]
    theta_keys_distinct: int
    ratio_keys_distinct: int | None = None
    secrets_consistent: bool | None = None
    true_ratio: int | None = None
    notes: list[str] = field(default_factory=list)

    def equation_count(self, name: str) -> int:
        return self.systems[name].equation_count

    def unknown_count(self, name: str) -> int:
        return self.systems[name].unknown_count

    def as_dict(self) -> dict:
        return {
            "c": self.c,
            "d": self.d,
            "y_log": self.y_log,
            "systems": {k: s.as_dict() for k, s in self.systems.items()},
            "alpha_zeta1_pairs": self.alpha_candidates,
            "gamma_zeta1_pairs": self.gamma_candidates,
            "candidate_ratio_count": len(self.candidate_ratios),
            "candidate_ratios": self.candidate_ratios,
            "theta_candidates": [list(t) for t in self.theta_candidates],
            "theta_keys_distinct": self.theta_keys_distinct,
            "ratio_keys_distinct": self.ratio_keys_distinct,
            "secrets_consistent": self.secrets_consistent,
            "true_ratio": self.true_ratio,
            "notes": self.notes,
        }


def _system_I(c: list[int], mu: tuple[int, ...], p: int) -> LinearSystem:
    t = len(mu)
    js = range(2, t + 1)
    coefficients = []
    for row, j in enumerate(js):
        line = [0] * (t - 1) + [mu[j - 1]]
        line[row] = 1
        coefficients.append(line)
    return LinearSystem(
        name="I",
        unknowns=["alpha", "beta"] + [f"eta_{j}" for j in js],
        linear_unknowns=[f"alpha*eta_{j}" for j in js] + ["beta"],
        coefficients=coefficients,
        rhs=list(c),
        moduli=[2 * p] * (t - 1),
        rank_mod_p=rank_mod_prime(coefficients, p),
    )


def _system_II(d: list[int], sigma: tuple[int, ...], p: int) -> LinearSystem:
    t = len(sigma)
    js = range(2, t + 1)
    coefficients = []
    for row, j in enumerate(js):
        line = [0] * (t - 1) + [sigma[j - 1]]
        line[row] = 1
        coefficients.append(line)
    return LinearSystem(
        name="II",
        unknowns=["gamma", "delta"] + [f"xi_{j}" for j in js],
        linear_unknowns=[f"gamma*xi_{j}" for j in js] + ["delta"],
        coefficients=coefficients,
        rhs=list(d),
        moduli=[3 * p] * (t - 1),
        rank_mod_p=rank_mod_prime(coefficients, p),
    )


def _system_III(mu: tuple[int, ...], sigma: tuple[int, ...], p: int) -> LinearSystem:
    t = len(mu)
    coefficients = [list(mu), list(sigma)]
    names = [f"theta_{i}" for i in range(1, t + 1)]
    return LinearSystem(
        name="III",
        unknowns=names,
        linear_unknowns=names,
        coefficients=coefficients,
        rhs=[0, 0],
        moduli=[2 * p, 3 * p],
        rank_mod_p=rank_mod_prime(coefficients, p),
    )


def _consistent_pairs(logs: list[int], coeffs: tuple[int, ...], scale: int, p: int) -> list[tuple[int, int]]:
    """All ``(x, z1)`` with x in [1, p), z1 in [1, p] that explain ``logs``.

    For system (I) ``scale = 2`` and ``coeffs = mu``: the pair must make
    ``s_1 = 2 x z1 + mu_1`` a unit mod 2p, and every ``c_j`` must then be
    reachable as ``c_j = s_1^-1 (2 x z_j + mu_j) mod 2p`` for some
    ``z_j`` in [1, p] with ``2 x z_j + mu_j != 0 mod p``.
    """
    modulus = scale * p
    pairs = []
    for x in range(1, p):
        step = scale * x
        # every multiple of step mod `modulus` reachable by z in [1, p]
        reachable = {step * z % modulus for z in range(1, p + 1)}
        for z1 in range(1, p + 1):
            s1 = step * z1 + coeffs[0]
            if gcd(s1, modulus) != 1:
                continue
            ok = True
            for log, coef in zip(logs, coeffs[1:]):
                need = (log * s1 - coef) % modulus
                if need not in reachable or (need + coef) % p == 0:
                    ok = False
                    break
            if ok:
                pairs.append((x, z1))
    return pairs


def _crt(residues: list[tuple[int, int]]) -> int:
    x, m = 0, 1
    for r, n in residues:
        x += m * ((r - x) * pow(m, -1, n) % n)
        m *= n
    return x % m


def theta_candidates(msg1: Msg1, p: int, rng: random.Random, count: int) -> list[tuple[int, ...]]:
    """Distinct ``theta'`` in [1, 6p)^t satisfying system (III).

    Solved componentwise mod 2, 3 and p: free entries are random, the last
    one (two, mod p) are solved for, then recombined by CRT.
    """
    mu, sigma = msg1.mu, msg1.sigma
    t = len(mu)
    found: list[tuple[int, ...]] = []
    u, v = t - 2, t - 1
    for _ in range(MAX_ATTEMPTS):
        if len(found) >= count:
            break
        free = [rng.randrange(6 * p) for _ in range(t - 2)]
        det = (mu[u] * sigma[v] - mu[v] * sigma[u]) % p
        if det == 0:
            continue
        det_inv = pow(det, -1, p)
        mu_rest = -sum(m * f for m, f in zip(mu, free)) % p
        sig_rest = -sum(s * f for s, f in zip(sigma, free)) % p
        u_p = (mu_rest * sigma[v] - mu[v] * sig_rest) * det_inv % p
        v_p = (mu[u] * sig_rest - sigma[u] * mu_rest) * det_inv % p
        # every mu_i is odd, so mod 2 the first sum is just sum(theta)
        u_6 = rng.randrange(6)
        v_2 = (sum(free) + u_6) % 2
        v_3 = -(sum(s * f for s, f in zip(sigma, free)) + sigma[u] * u_6) * pow(sigma[v], -1, 3) % 3
        theta = tuple(free) + (
            _crt([(u_6 % 2, 2), (u_6 % 3, 3), (u_p, p)]),
            _crt([(v_2, 2), (v_3, 3), (v_p, p)]),
        )
        if all(x > 0 for x in theta) and theta not in found:
            found.append(theta)
    return found


def mount_dlog_attack(
    transcript: Transcript,
    params: PublicParams,
    truth: tuple[AliceSecret, BobSecret] | None = None,
    *,
    rng: random.Random | None = None,
    theta_samples: int = 8,
) -> AttackReport:
    """Play the DLP-capable adversary against one transcript.

    Logs ``c_j`` (``A_j = A_1^c_j``), ``d_j`` (``B_j = B_1^d_j``) and ``Y = A_1^y``
    are found by enumeration, systems (I), (II), (III) are assembled, and every
    ``(alpha', zeta'_1)`` and ``(gamma', zeta'_1)`` consistent with (I) and (II)
    respectively is enumerated.  With ``truth`` the report also says whether the
    real secrets satisfy each system and how many distinct keys the surviving
    ratios would give.
    """
    p, t = params.p, params.t
    if p > MAX_ENUMERATION_P:
        raise ValueError(f"exhaustive attack limited to p <= {MAX_ENUMERATION_P}")
    rng = random.Random(0) if rng is None else rng
    A, B = transcript.msg2.A, transcript.msg2.B
    mu, sigma = transcript.msg1.mu, transcript.msg1.sigma
    a_index = power_index(A[0], 2 * p)
    b_index = power_index(B[0], 3 * p)
    c, d = [], []
    for j in range(1, t):
        if A[j] not in a_index:
            raise DlogFailed(f"A_{j + 1} is not a power of A_1")
        if B[j] not in b_index:
            raise DlogFailed(f"B_{j + 1} is not a power of B_1")
        c.append(a_index[A[j]])
        d.append(b_index[B[j]])
    Y = transcript.msg3.Y
    if Y not in a_index:
        raise DlogFailed("Y is not a power of A_1")
    y_log = a_index[Y]

    systems = {
        "I": _system_I(c, mu, p),
        "II": _system_II(d, sigma, p),
        "III": _system_III(mu, sigma, p),
    }
    alpha_pairs = _consistent_pairs(c, mu, 2, p)
    gamma_pairs = _consistent_pairs(d, sigma, 3, p)
    alphas = sorted({a for a, _ in alpha_pairs})
    gammas = sorted({g for g, _ in gamma_pairs})
    ratios = sorted({g * pow(a, -1, p) % p for a in alphas for g in gammas})

    thetas = theta_candidates(transcript.msg1, p, rng, theta_samples)
    theta_keys = {multi_pow(B, th) for th in thetas}

    report = AttackReport(
        c=c,
        d=d,
        y_log=y_log,
        systems=systems,
        alpha_candidates=len(alpha_pairs),
        gamma_candidates=len(gamma_pairs),
        candidate_ratios=ratios,
        theta_candidates=thetas,
        theta_keys_distinct=len(theta_keys),
    )
    if truth is not None:
        alice, bob = truth
        report.secrets_consistent = secrets_satisfy_systems(report, transcript, alice, bob, p)
        report.true_ratio = alice.gamma * pow(alice.alpha, -1, p) % p
        report.ratio_keys_distinct = len(ratio_implied_keys(ratios, Y, alice))
        if (alice.alpha, alice.zeta[0]) not in alpha_pairs or (alice.gamma, alice.zeta[0]) not in gamma_pairs:
            report.secrets_consistent = False
            report.notes.append("true (alpha, zeta_1) or (gamma, zeta_1) missing from candidates")
    return report


def secrets_satisfy_systems(
    report: AttackReport, transcript: Transcript, alice: AliceSecret, bob: BobSecret, p: int
) -> bool:
    """Substitute the real secrets into (I), (II) and (III)."""
    mu, sigma = transcript.msg1.mu, transcript.msg1.sigma
    alpha, gamma, zeta, theta = alice.alpha, alice.gamma, alice.zeta, bob.theta
    beta = pow(2 * alpha * zeta[0] + mu[0], -1, 2 * p)
    delta = pow(3 * gamma * zeta[0] + sigma[0], -1, 3 * p)
    for j, (cj, dj) in enumerate(zip(report.c, report.d), start=1):
        eta = 2 * beta * zeta[j]
        xi = 3 * delta * zeta[j]
        if cj != (alpha * eta + beta * mu[j]) % (2 * p):
            return False
        if dj != (gamma * xi + delta * sigma[j]) % (3 * p):
            return False
    if sum(m * th for m, th in zip(mu, theta)) % (2 * p):
        return False
    if sum(s * th for s, th in zip(sigma, theta)) % (3 * p):
        return False
    return True


def ratio_implied_keys(ratios: list[int], Y: BitMatrix, alice: AliceSecret) -> set[BitMatrix]:
    """Keys ``S R^-1 Y^r R S^-1`` that Alice's final step would give for each candidate r."""
    R_inv, S_inv = mat_inv(alice.R), mat_inv(alice.S)
    keys = set()
    for r in ratios:
        inner = mat_mul(mat_mul(R_inv, mat_pow(Y, r)), alice.R)
        keys.add(mat_mul(mat_mul(alice.S, inner), S_inv))
    return keys


@dataclass(frozen=True)
class DdhQuadruple:
    G1: BitMatrix
    G2: BitMatrix
    G3: BitMatrix
    G4: BitMatrix


def proper_quadruple(transcript: Transcript, alice: AliceSecret) -> DdhQuadruple:
    """``(T^(alpha zeta_1), R^-1 Y R, T^(gamma zeta_1), S^-1 K S)`` from a real run."""
    T = alice.master.T
    p = alice.master.params.p
    return DdhQuadruple(
        G1=mat_pow(T, alice.alpha * alice.zeta[0] % p),
        G2=mat_mul(mat_mul(mat_inv(alice.R), transcript.msg3.Y), alice.R),
        G3=mat_pow(T, alice.gamma * alice.zeta[0] % p),
        G4=mat_mul(mat_mul(mat_inv(alice.S), transcript.key.K), alice.S),
    )


def random_quadruple(transcript: Transcript, alice: AliceSecret, rng: random.Random) -> tuple[DdhQuadruple, int]:
    """The proper quadruple with its last entry replaced by ``T^c``, c uniform in (1, p)."""
    q = proper_quadruple(transcript, alice)
    p = alice.master.params.p
    c = rng.randint(2, p - 1)
    return DdhQuadruple(q.G1, q.G2, q.G3, mat_pow(alice.master.T, c)), c


def _h_exponent_sums(t: int, p: int, rng: random.Random) -> tuple[list[int], list[int]]:
    """mu odd, sigma != 0 mod 3, each in [1, p] except the last, with plain sums 0 mod 2p / 3p."""
    for _ in range(MAX_ATTEMPTS):
        mu = [rng.randrange(1, p + 1, 2) for _ in range(t - 1)]
        sigma = []
        while len(sigma) < t - 1:
            v = rng.randint(1, p)
            if v % 3:
                sigma.append(v)
        mu_t = -sum(mu) % (2 * p)
        sigma_t = -sum(sigma) % (3 * p)
        if mu_t % 2 and sigma_t % 3:
            return mu + [mu_t], sigma + [sigma_t]
    raise RetryExhausted("no mu/sigma with the required plain sums")


def ddh_simulate_H(
    quad: DdhQuadruple,
    master: MasterMatrix,
    R: BitMatrix,
    S: BitMatrix,
    params: PublicParams,
    rng: random.Random,
) -> Transcript:
    """Turn a (possibly fake) DH quadruple over ``T`` into a protocol transcript.

    ``A_i = R G1^z'_i U^mu_i R^-1`` and ``B_i = S G3^z'_i V^sigma_i S^-1`` with
    ``z'_1 = 1``; a draw is kept only if none of ``A'^2, A'^p, B'^3, B'^p`` is I.
    ``Y = R G2 R^-1`` and ``K = S G4 S^-1``.

    ``mu`` and ``sigma`` have plain sums 0 mod 2p and 0 mod 3p.  With every
    ``mu_i`` odd that forces ``t`` even.
    """
    p, t = params.p, params.t
    if t % 2:
        raise ValueError("the simulator needs even t: t odd values cannot sum to 0 mod 2")
    U, V = master.U, master.V
    R_inv, S_inv = mat_inv(R), mat_inv(S)

    def blinded(z: int, m: int, s: int) -> tuple[BitMatrix, BitMatrix] | None:
        a = mat_mul(mat_pow(quad.G1, z), mat_pow(U, m))
        b = mat_mul(mat_pow(quad.G3, z), mat_pow(V, s))
        if any(mat_pow(a, e).is_identity() for e in (2, p)):
            return None
        if any(mat_pow(b, e).is_identity() for e in (3, p)):
            return None
        return a, b

    for _ in range(MAX_ATTEMPTS):
        mu, sigma = _h_exponent_sums(t, p, rng)
        first = blinded(1, mu[0], sigma[0])
        if first is not None:
            break
    else:
        raise RetryExhausted("no admissible mu_1, sigma_1")
    pairs = [first]
    for i in range(1, t):
        for _ in range(MAX_ATTEMPTS):
            got = blinded(rng.randint(1, p), mu[i], sigma[i])
            if got is not None:
                pairs.append(got)
                break
        else:
            raise RetryExhausted(f"no admissible zeta'_{i + 1}")
    A = tuple(mat_mul(mat_mul(R, a), R_inv) for a, _ in pairs)
    B = tuple(mat_mul(mat_mul(S, b), S_inv) for _, b in pairs)
    Y = mat_mul(mat_mul(R, quad.G2), R_inv)
    K = mat_mul(mat_mul(S, quad.G4), S_inv)
    return Transcript(params, Msg1(tuple(mu), tuple(sigma)), Msg2(A, B), Msg3(Y), SharedKey(K))


def verify_transcript_orders(transcript: Transcript, p: int) -> bool:
    """A_i of order 2p, B_i of order 3p, Y and K of order dividing p."""
    two_p, three_p = FactoredOrder.of(2, p), FactoredOrder.of(3, p)
    if not all(has_order(a, two_p) for a in transcript.msg2.A):
        return False
    if not all(has_order(b, three_p) for b in transcript.msg2.B):
        return False
    return mat_pow(transcript.msg3.Y, p).is_identity() and mat_pow(transcript.key.K, p).is_identity()


def alternative_generator_orders(
    transcript: Transcript, p: int, rng: random.Random, samples: int = 20
) -> dict[str, int]:
    """Sampled order facts about products of public matrices.

    ``A_i^x Y^y`` always lies in the order-2p group generated by ``A_1``;
    ``B_j^x Y^y`` mixes the two conjugations and is only tallied.
    """
    A, B, Y = transcript.msg2.A, transcript.msg2.B, transcript.msg3.Y
    ay_divides_2p = 0
    by_divides_6p = 0
    for _ in range(samples):
        i, j = rng.randrange(len(A)), rng.randrange(len(B))
        x, y = rng.randint(1, 6 * p), rng.randint(1, 6 * p)
        ay = mat_mul(mat_pow(A[i], x), mat_pow(Y, y))
        by = mat_mul(mat_pow(B[j], x), mat_pow(Y, y))
        ay_divides_2p += mat_pow(ay, 2 * p).is_identity()
        by_divides_6p += mat_pow(by, 6 * p).is_identity()
    return {"samples": samples, "AY_order_divides_2p": ay_divides_2p, "BY_order_divides_6p": by_divides_6p}
