"""The four-message key agreement.

Bob opens with exponent tuples ``(mu, sigma)`` and keeps ``theta``.  Alice
answers with ``A_i = R U^(2 alpha zeta_i + mu_i) R^-1`` and
``B_i = S V^(3 gamma zeta_i + sigma_i) S^-1``.  Bob computes
``K = prod B_i^theta_i`` and returns ``Y = prod A_i^theta_i``; Alice recovers
``K = S R^-1 Y^(gamma/alpha) R S^-1``.  Because ``sum mu_i theta_i = 0 mod 2p``
and ``sum sigma_i theta_i = 0 mod 3p`` the U and V parts cancel and both sides
land on ``S T^(gamma sum zeta_i theta_i) S^-1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd

from .errors import KeyMismatch, MalformedMessage, NotCoprimeError, RetryExhausted
from .gf2 import (
    MAX_ATTEMPTS,
    BitMatrix,
    FactoredOrder,
    SquareTable,
    has_order,
    is_nonsingular,
    mat_inv,
    mat_mul,
    mat_pow,
    multi_pow,
    random_noncommuting_pair,
)
from .params import MasterMatrix, MParamSet, generate_master_matrix

MIN_TUPLE_LENGTH = 4


@dataclass(frozen=True)
class PublicParams:
    mparams: MParamSet
    t: int

    def __post_init__(self):
        if self.t < MIN_TUPLE_LENGTH:
            raise ValueError(f"tuple length t must be at least {MIN_TUPLE_LENGTH}, got {self.t}")
        if self.mparams.p <= self.t:
            raise ValueError(f"p = {self.mparams.p} must exceed t = {self.t}")

    @property
    def p(self) -> int:
        return self.mparams.p

    @property
    def n(self) -> int:
        return self.mparams.n


@dataclass(frozen=True)
class Msg1:
    mu: tuple[int, ...]
    sigma: tuple[int, ...]


@dataclass(frozen=True)
class Msg2:
    A: tuple[BitMatrix, ...]
    B: tuple[BitMatrix, ...]


@dataclass(frozen=True)
class Msg3:
    Y: BitMatrix


@dataclass(frozen=True)
class SharedKey:
    K: BitMatrix

    def __repr__(self) -> str:
        return f"SharedKey(<secret n={self.K.n}>)"


@dataclass(frozen=True)
class BobSecret:
    theta: tuple[int, ...]


@dataclass(frozen=True)
class AliceSecret:
    master: MasterMatrix
    R: BitMatrix
    S: BitMatrix
    alpha: int
    gamma: int
    zeta: tuple[int, ...]


@dataclass(frozen=True)
class Transcript:
    """One protocol run: the public view ``(mu, sigma, A, B, Y)`` plus the key."""

    params: PublicParams
    msg1: Msg1
    msg2: Msg2
    msg3: Msg3
    key: SharedKey

    @property
    def degenerate(self) -> bool:
        """K = I, which happens when sum zeta_i theta_i = 0 mod p."""
        return self.key.K.is_identity()


def mod_inverse(a: int, n: int) -> int:
    if n < 2:
        raise ValueError("modulus must be at least 2")
    try:
        return pow(a, -1, n)
    except ValueError:
        raise NotCoprimeError(f"gcd({a}, {n}) = {gcd(a, n)}, no inverse") from None


def _draw(rng: random.Random, lo: int, hi: int, ok) -> int:
    for _ in range(MAX_ATTEMPTS):
        v = rng.randint(lo, hi)
        if ok(v):
            return v
    raise RetryExhausted(f"no acceptable draw in [{lo}, {hi}]")


def gen_exponent_tuples(params: PublicParams, rng: random.Random) -> tuple[Msg1, BobSecret]:
    """Bob's tuples: all but the last entry random, the last one closing both sums.

    The last entries solve ``sigma_t theta_t = 3p - sum sigma_i theta_i (mod 3p)``
    and ``mu_t theta_t = 2p - sum mu_i theta_i (mod 2p)``, so
    ``sum mu_i theta_i = 0 mod 2p`` and ``sum sigma_i theta_i = 0 mod 3p``.
    """
    p, t = params.p, params.t
    phi = 6 * p
    for _ in range(MAX_ATTEMPTS):
        sigma = [_draw(rng, 1, p, lambda v: v % 3 != 0) for _ in range(t - 1)]
        mu = [_draw(rng, 1, p, lambda v: v % 2 != 0) for _ in range(t - 1)]
        theta = [rng.randint(1, p) for _ in range(t - 1)]
        sig_gap = 3 * p - sum(s * th for s, th in zip(sigma, theta))
        mu_gap = 2 * p - sum(m * th for m, th in zip(mu, theta))
        if gcd(phi, sig_gap) != 1 or gcd(phi, mu_gap) != 1:
            continue
        theta_t = _draw(rng, 1, p, lambda v: gcd(phi, v) == 1)
        sigma_t = mod_inverse(theta_t, 3 * p) * sig_gap % (3 * p)
        mu_t = mod_inverse(theta_t, 2 * p) * mu_gap % (2 * p)
        if sigma_t == 0 or mu_t == 0 or sigma_t % 3 == 0 or mu_t % 2 == 0:
            continue
        mu.append(mu_t)
        sigma.append(sigma_t)
        theta.append(theta_t)
        return Msg1(tuple(mu), tuple(sigma)), BobSecret(tuple(theta))
    raise RetryExhausted(f"no valid exponent tuples for p={p}, t={t}")


def gen_blinded_tuples(
    master: MasterMatrix,
    msg1: Msg1,
    alpha: int,
    gamma: int,
    R: BitMatrix,
    S: BitMatrix,
    rng: random.Random,
) -> tuple[Msg2, tuple[int, ...]]:
    """Alice's matrices ``A_i``, ``B_i`` together with the ``zeta_i`` she drew.

    ``T^(alpha zeta) U^mu = U^(2 alpha zeta + mu)`` since ``T = U^2``, so each
    blinded matrix is a single power of ``U`` (order 2p) or ``V`` (order 3p).
    """
    p = master.params.p
    U, V = master.U, master.V
    u_table = SquareTable(U, 2 * p - 1)
    v_table = SquareTable(V, 3 * p - 1)
    R_inv, S_inv = mat_inv(R), mat_inv(S)
    A, B, zeta = [], [], []
    for mu_i, sigma_i in zip(msg1.mu, msg1.sigma):
        z = _draw(
            rng,
            1,
            p,
            lambda v: (2 * alpha * v + mu_i) % p != 0 and (3 * gamma * v + sigma_i) % p != 0,
        )
        zeta.append(z)
        A_prime = u_table.power((2 * alpha * z + mu_i) % (2 * p))
        B_prime = v_table.power((3 * gamma * z + sigma_i) % (3 * p))
        A.append(mat_mul(mat_mul(R, A_prime), R_inv))
        B.append(mat_mul(mat_mul(S, B_prime), S_inv))
    return Msg2(tuple(A), tuple(B)), tuple(zeta)


def blinded_preimages(secret: AliceSecret, msg1: Msg1) -> tuple[list[BitMatrix], list[BitMatrix]]:
    """``A'_i = T^(alpha zeta_i) U^(mu_i)`` and ``B'_i`` in the literal two-power form."""
    T, U, V = secret.master.T, secret.master.U, secret.master.V
    a = [mat_mul(mat_pow(T, secret.alpha * z), mat_pow(U, m)) for z, m in zip(secret.zeta, msg1.mu)]
    b = [mat_mul(mat_pow(T, secret.gamma * z), mat_pow(V, s)) for z, s in zip(secret.zeta, msg1.sigma)]
    return a, b


def validate_msg1(params: PublicParams, msg1: Msg1) -> None:
    t = params.t
    if len(msg1.mu) != t or len(msg1.sigma) != t:
        raise MalformedMessage(f"Msg1 tuples must have length t = {t}")
    if any(v <= 0 for v in msg1.mu + msg1.sigma):
        raise MalformedMessage("Msg1 entries must be positive")
    if any(v % 2 == 0 for v in msg1.mu[:-1]):
        raise MalformedMessage("mu_i must be odd for i < t")
    if any(v % 3 == 0 for v in msg1.sigma[:-1]):
        raise MalformedMessage("sigma_i must not be divisible by 3 for i < t")


def _check_matrices(mats, n: int, what: str) -> None:
    for i, a in enumerate(mats):
        if not isinstance(a, BitMatrix) or a.n != n:
            raise MalformedMessage(f"{what}[{i}] is not a {n}x{n} matrix")
        if not is_nonsingular(a):
            raise MalformedMessage(f"{what}[{i}] is singular")


def validate_msg2(params: PublicParams | None, msg2: Msg2, t: int, strict: bool = False) -> None:
    if len(msg2.A) != t or len(msg2.B) != t:
        raise MalformedMessage(f"Msg2 must carry t = {t} matrices of each kind")
    n = msg2.A[0].n if params is None else params.n
    _check_matrices(msg2.A, n, "A")
    _check_matrices(msg2.B, n, "B")
    if strict:
        if params is None:
            raise ValueError("strict validation needs the public parameters")
        p = params.p
        if not all(has_order(a, FactoredOrder.of(2, p)) for a in msg2.A):
            raise MalformedMessage("some A_i does not have order 2p")
        if not all(has_order(b, FactoredOrder.of(3, p)) for b in msg2.B):
            raise MalformedMessage("some B_i does not have order 3p")


def bob_init(params: PublicParams, rng: random.Random) -> tuple[Msg1, BobSecret]:
    return gen_exponent_tuples(params, rng)


def alice_respond(params: PublicParams, msg1: Msg1, rng: random.Random) -> tuple[Msg2, AliceSecret]:
    validate_msg1(params, msg1)
    master = generate_master_matrix(params.mparams, rng)
    p = params.p
    alpha = rng.randint(1, p - 1)
    gamma = rng.randint(1, p - 1)
    R, S = random_noncommuting_pair(params.n, rng)
    msg2, zeta = gen_blinded_tuples(master, msg1, alpha, gamma, R, S, rng)
    return msg2, AliceSecret(master=master, R=R, S=S, alpha=alpha, gamma=gamma, zeta=zeta)


def bob_complete(
    msg2: Msg2,
    secret: BobSecret,
    *,
    params: PublicParams | None = None,
    strict: bool = False,
) -> tuple[Msg3, SharedKey]:
    """``K = prod B_i^theta_i`` and ``Y = prod A_i^theta_i``.

    The factors commute, so the products are evaluated jointly; the result is
    the same matrix as the index-ascending product.
    """
    validate_msg2(params, msg2, len(secret.theta), strict=strict)
    Y = multi_pow(msg2.A, secret.theta)
    K = multi_pow(msg2.B, secret.theta)
    return Msg3(Y), SharedKey(K)


def alice_finalize(
    msg3: Msg3,
    secret: AliceSecret,
    *,
    strict: bool = False,
) -> SharedKey:
    """``K = S R^-1 Y^(gamma alpha^-1 mod p) R S^-1``."""
    Y = msg3.Y
    n = secret.R.n
    if not isinstance(Y, BitMatrix) or Y.n != n:
        raise MalformedMessage(f"Y is not a {n}x{n} matrix")
    p = secret.master.params.p
    if strict and not mat_pow(Y, p).is_identity():
        raise MalformedMessage("Y^p is not the identity")
    if not is_nonsingular(Y):
        raise MalformedMessage("Y is singular")
    e = secret.gamma * mod_inverse(secret.alpha, p) % p
    inner = mat_mul(mat_mul(mat_inv(secret.R), mat_pow(Y, e)), secret.R)
    return SharedKey(mat_mul(mat_mul(secret.S, inner), mat_inv(secret.S)))


def handshake_with_secrets(
    params: PublicParams,
    rng: random.Random,
    *,
    alice_rng: random.Random | None = None,
    strict: bool = False,
) -> tuple[Transcript, AliceSecret, BobSecret]:
    """Run all four steps in process; Bob draws from ``rng``, Alice from ``alice_rng`` (or ``rng``)."""
    alice_rng = rng if alice_rng is None else alice_rng
    msg1, bob = bob_init(params, rng)
    msg2, alice = alice_respond(params, msg1, alice_rng)
    msg3, bob_key = bob_complete(msg2, bob, params=params, strict=strict)
    alice_key = alice_finalize(msg3, alice, strict=strict)
    if alice_key != bob_key:
        raise KeyMismatch("Alice and Bob derived different keys")
    return Transcript(params, msg1, msg2, msg3, bob_key), alice, bob


def run_local_handshake(
    params: PublicParams,
    rng: random.Random,
    *,
    alice_rng: random.Random | None = None,
    strict: bool = False,
) -> Transcript:
    return handshake_with_secrets(params, rng, alice_rng=alice_rng, strict=strict)[0]


def role_rngs(seed: int, connection: int = 0) -> tuple[random.Random, random.Random, random.Random]:
    """Independent ``(params, bob, alice)`` generators derived from one seed.

    The in-process handshake and the networked one use the same streams, so
    equal seeds give byte-identical transcripts.
    """
    return (
        random.Random(f"ssgk/{seed}/params"),
        random.Random(f"ssgk/{seed}/{connection}/bob"),
        random.Random(f"ssgk/{seed}/{connection}/alice"),
    )
