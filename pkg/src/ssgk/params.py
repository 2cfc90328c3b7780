"""Primitive polynomials, the order-6 block and master-matrix generation.

The master matrix is ``M = B N B^-1`` with ``N = diag(D, C^cofactor)``: ``D``
has order exactly 6 and ``C`` is the companion matrix of a primitive
polynomial, so ``C^cofactor`` has prime order ``p`` and ``M`` has order ``6p``.

``D`` is 4x4.  GL(3, 2) has no element of order 6 (its element orders are
1, 2, 3, 4, 7), so the smallest block is ``diag(J2, C3)`` with ``J2`` unipotent
of order 2 and ``C3`` the companion of x^2 + x + 1 of order 3.  The matrix
dimension is therefore ``n = m + 4``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import (
    NotAnnihilatedError,
    OrderVerificationFailed,
    RetryExhausted,
    UnsupportedDegreeError,
)
from .gf2 import (
    MAX_ATTEMPTS,
    BinaryPoly,
    BitMatrix,
    FactoredOrder,
    block_diag,
    companion,
    mat_inv,
    mat_mul,
    mat_order,
    mat_pow,
    random_nonsingular,
)

D_BLOCK_SIZE = 4

# m -> (prime factors of 2^m - 1, designated large prime p)
_DEGREE_TABLE: dict[int, tuple[tuple[int, ...], int]] = {
    2: ((3,), 3),
    3: ((7,), 7),
    5: ((31,), 31),
    7: ((127,), 127),
    9: ((7, 73), 73),
    10: ((3, 11, 31), 31),
    11: ((23, 89), 89),
    13: ((8191,), 8191),
    14: ((3, 43, 127), 127),
    15: ((7, 31, 151), 151),
    16: ((3, 5, 17, 257), 257),
    17: ((131071,), 131071),
    19: ((524287,), 524287),
    23: ((47, 178481), 178481),
    31: ((2147483647,), 2147483647),
    61: ((2305843009213693951,), 2305843009213693951),
    89: ((618970019642690137449562111,), 618970019642690137449562111),
    107: ((162259276829213363391578010288127,), 162259276829213363391578010288127),
    127: (
        (170141183460469231731687303715884105727,),
        170141183460469231731687303715884105727,
    ),
}


def supported_degrees() -> list[tuple[int, FactoredOrder, int]]:
    """The built-in table as ``(m, factorization of 2^m - 1, p)`` rows."""
    return [(m, FactoredOrder.of(*primes), p) for m, (primes, p) in sorted(_DEGREE_TABLE.items())]


def lookup_degree(m: int) -> tuple[FactoredOrder, int]:
    try:
        primes, p = _DEGREE_TABLE[m]
    except KeyError:
        raise UnsupportedDegreeError(
            f"degree {m} is not supported; choose one of {sorted(_DEGREE_TABLE)}"
        ) from None
    return FactoredOrder.of(*primes), p


@dataclass(frozen=True)
class MParamSet:
    m: int
    P: BinaryPoly
    p: int
    cofactor: int
    factors: FactoredOrder
    n: int

    def __post_init__(self):
        if self.P.degree != self.m:
            raise ValueError(f"P has degree {self.P.degree}, expected {self.m}")
        if self.p * self.cofactor != (1 << self.m) - 1:
            raise ValueError("p * cofactor must equal 2^m - 1")
        if self.n != self.m + D_BLOCK_SIZE:
            raise ValueError(f"n must be m + {D_BLOCK_SIZE}")

    @property
    def phi(self) -> int:
        return 6 * self.p

    @property
    def phi_factors(self) -> FactoredOrder:
        return FactoredOrder.of(2, 3, self.p)


def mparams_for(m: int, P: BinaryPoly) -> MParamSet:
    """Attach the tabulated factorization to an agreed polynomial."""
    factors, p = lookup_degree(m)
    return MParamSet(m=m, P=P, p=p, cofactor=factors.value // p, factors=factors, n=m + D_BLOCK_SIZE)


def is_primitive(P: BinaryPoly, factors: FactoredOrder) -> bool:
    """True iff the companion matrix of ``P`` has order exactly ``factors.value``.

    ``factors`` must be the full factorization of ``2^m - 1``.
    """
    m = P.degree
    if m < 1 or factors.value != (1 << m) - 1 or not P.bits & 1:
        return False
    try:
        return mat_order(companion(P), factors) == factors.value
    except NotAnnihilatedError:
        return False


def _poly_mulmod(a: int, b: int, mod: int) -> int:
    deg = mod.bit_length() - 1
    top = 1 << deg
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= mod
    return acc


def _frobenius_screen(P: BinaryPoly) -> bool:
    """Cheap necessary condition for irreducibility: x^(2^m) = x mod P.

    Also rejects an even number of terms (P(1) = 0 means x + 1 divides P).
    """
    m = P.degree
    if m == 1:
        return True
    if bin(P.bits).count("1") % 2 == 0:
        return False
    x = 0b10
    acc = x
    for _ in range(m):
        acc = _poly_mulmod(acc, acc, P.bits)
    return acc == x


def find_primitive_poly(m: int, rng: random.Random) -> BinaryPoly:
    """Random monic degree-m polynomial with nonzero constant term that is primitive."""
    factors, _ = lookup_degree(m)
    for _ in range(MAX_ATTEMPTS):
        middle = rng.getrandbits(m - 1) if m > 1 else 0
        P = BinaryPoly((1 << m) | (middle << 1) | 1)
        if _frobenius_screen(P) and is_primitive(P, factors):
            return P
    raise RetryExhausted(f"no primitive polynomial of degree {m} in {MAX_ATTEMPTS} draws")


def make_mparams(m: int, rng: random.Random) -> MParamSet:
    return mparams_for(m, find_primitive_poly(m, rng))


J2 = BitMatrix.from_bits([[1, 1], [0, 1]])
C3 = companion(BinaryPoly.from_exponents(2, 1, 0))


def build_order6_block() -> BitMatrix:
    """The 4x4 matrix ``diag(J2, C3)`` of multiplicative order exactly 6."""
    return block_diag([J2, C3])


@dataclass(frozen=True)
class MasterMatrix:
    """Alice's secret generator ``M`` of order ``phi = 6p`` and its pieces."""

    M: BitMatrix
    basis: BitMatrix
    params: MParamSet
    phi: int
    N: BitMatrix = field(repr=False)

    @property
    def T(self) -> BitMatrix:
        return mat_pow(self.M, 6)

    @property
    def U(self) -> BitMatrix:
        return mat_pow(self.M, 3)

    @property
    def V(self) -> BitMatrix:
        return mat_pow(self.M, 2)


def generate_master_matrix(params: MParamSet, rng: random.Random) -> MasterMatrix:
    """Build ``M = B diag(D, C^cofactor) B^-1`` and verify its order is ``6p``.

    The basis change ``B`` cannot affect the order, so a failed verification
    means ``P`` (or the tabulated ``p``) is wrong; it is reported at once
    rather than retried.
    """
    C = companion(params.P)
    N = block_diag([build_order6_block(), mat_pow(C, params.cofactor)])
    basis = random_nonsingular(params.n, rng)
    M = mat_mul(mat_mul(basis, N), mat_inv(basis))
    phi_factors = params.phi_factors
    try:
        order = mat_order(M, phi_factors)
    except NotAnnihilatedError:
        order = None
    if order != params.phi:
        raise OrderVerificationFailed(
            f"master matrix has order {order}, expected 6p = {params.phi} (P = {params.P})"
        )
    return MasterMatrix(M=M, basis=basis, params=params, phi=params.phi, N=N)
