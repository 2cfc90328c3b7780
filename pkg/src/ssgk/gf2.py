"""Dense square matrices over GF(2).

Rows are bit-packed: row ``i`` is an int whose bit ``j`` holds entry ``(i, j)``.
A product row is the XOR of the rows of the right operand selected by the set
bits of the left row.  Small matrices do this with plain ints; above
``_PACKED_MIN_N`` the work moves to a numpy kernel over ``uint64`` words using
8-bit lookup tables (the "four Russians" trick), which is what keeps n ~ 131
exponentiations cheap enough for the full handshake.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, NotAnnihilatedError, RetryExhausted, SingularMatrixError

_PACKED_MIN_N = 32
MAX_ATTEMPTS = 1000


def _words_per_row(n: int) -> int:
    return (n + 63) // 64


class BitMatrix:
    """Immutable n x n matrix over GF(2).

    Build one from integer rows (``BitMatrix([0b01, 0b10])`` is I_2) or from
    nested 0/1 lists with :meth:`from_bits`.  Instances are hashable and safe
    to share between threads.
    """

    __slots__ = ("n", "_rows", "_words", "_hash")

    def __init__(self, rows: Iterable[int], n: int | None = None):
        rows = tuple(int(r) for r in rows)
        if n is None:
            n = len(rows)
        if n < 1 or len(rows) != n:
            raise DimensionError(f"need n >= 1 and exactly n rows, got n={n}, {len(rows)} rows")
        limit = 1 << n
        for r in rows:
            if r < 0 or r >= limit:
                raise DimensionError(f"row value {r} does not fit in {n} columns")
        self.n = n
        self._rows: tuple[int, ...] | None = rows
        self._words: np.ndarray | None = None
        self._hash: int | None = None

    @classmethod
    def _from_words(cls, words: np.ndarray, n: int) -> BitMatrix:
        obj = cls.__new__(cls)
        words.flags.writeable = False
        obj.n = n
        obj._rows = None
        obj._words = words
        obj._hash = None
        return obj

    @classmethod
    def from_bits(cls, bits: Sequence[Sequence[int]]) -> BitMatrix:
        n = len(bits)
        rows = []
        for line in bits:
            if len(line) != n:
                raise DimensionError("matrix must be square")
            r = 0
            for j, b in enumerate(line):
                if b not in (0, 1):
                    raise ValueError(f"entries must be 0 or 1, got {b!r}")
                r |= b << j
            rows.append(r)
        return cls(rows, n)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls([1 << i for i in range(n)], n)

    @property
    def rows(self) -> tuple[int, ...]:
        if self._rows is None:
            data = self._words.tobytes()
            step = 8 * self._words.shape[1]
            self._rows = tuple(
                int.from_bytes(data[i * step:(i + 1) * step], "little") for i in range(self.n)
            )
        return self._rows

    @property
    def words(self) -> np.ndarray:
        """Rows as a read-only ``(n, ceil(n/64))`` little-endian uint64 array."""
        if self._words is None:
            nbytes = 8 * _words_per_row(self.n)
            buf = b"".join(r.to_bytes(nbytes, "little") for r in self._rows)
            words = np.frombuffer(buf, dtype="<u8").reshape(self.n, -1)
            self._words = words
        return self._words

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(ij)
        return (self.rows[i] >> j) & 1

    def to_bits(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.n)] for r in self.rows]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        if self.n != other.n:
            return False
        if self._rows is None and other._rows is None:
            return bool(np.array_equal(self._words, other._words))
        return self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.rows))
        return self._hash

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        return mat_mul(self, other)

    def __pow__(self, e: int) -> BitMatrix:
        return mat_pow(self, e)

    def is_identity(self) -> bool:
        return self.rows == tuple(1 << i for i in range(self.n))

    def __repr__(self) -> str:
        if self.n <= 8:
            body = "; ".join("".join(str(b) for b in line) for line in self.to_bits())
            return f"BitMatrix({self.n}: {body})"
        return f"BitMatrix(n={self.n}, hash={hash(self) & 0xFFFFFFFF:08x})"


def _mul_rows(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    out = []
    for r in a:
        acc = 0
        while r:
            low = r & -r
            acc ^= b[low.bit_length() - 1]
            r ^= low
        out.append(acc)
    return tuple(out)


def _mul_words(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    chunks = (n + 7) // 8
    w = b.shape[1]
    padded = np.zeros((chunks * 8, w), dtype="<u8")
    padded[:n] = b
    padded = padded.reshape(chunks, 8, w)
    # table[c, x] = XOR of rows 8c + k of b for each set bit k of x
    table = np.zeros((chunks, 256, w), dtype="<u8")
    for k in range(8):
        s = 1 << k
        np.bitwise_xor(table[:, :s], padded[:, k][:, None, :], out=table[:, s:2 * s])
    index = a.view(np.uint8)[:, :chunks]
    picked = table[np.arange(chunks)[None, :], index]
    return np.bitwise_xor.reduce(picked, axis=1)


def mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Matrix product over GF(2)."""
    if a.n != b.n:
        raise DimensionError(f"dimension mismatch: {a.n} vs {b.n}")
    if a.n < _PACKED_MIN_N:
        return BitMatrix(_mul_rows(a.rows, b.rows), a.n)
    return BitMatrix._from_words(_mul_words(a.words, b.words, a.n), a.n)


def _gauss_jordan(rows: Sequence[int], n: int) -> list[int] | None:
    """Invert via elimination on [A | I]; None if a pivot is missing."""
    work = [r | (1 << (n + i)) for i, r in enumerate(rows)]
    for col in range(n):
        bit = 1 << col
        pivot = next((i for i in range(col, n) if work[i] & bit), None)
        if pivot is None:
            return None
        work[col], work[pivot] = work[pivot], work[col]
        prow = work[col]
        for i in range(n):
            if i != col and work[i] & bit:
                work[i] ^= prow
    return [r >> n for r in work]


def rank(a: BitMatrix) -> int:
    work = list(a.rows)
    r = 0
    for col in range(a.n):
        bit = 1 << col
        pivot = next((i for i in range(r, a.n) if work[i] & bit), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        for i in range(r + 1, a.n):
            if work[i] & bit:
                work[i] ^= work[r]
        r += 1
    return r


def is_nonsingular(a: BitMatrix) -> bool:
    return rank(a) == a.n


def mat_inv(a: BitMatrix) -> BitMatrix:
    """Inverse over GF(2); raises SingularMatrixError if there is none."""
    inv = _gauss_jordan(a.rows, a.n)
    if inv is None:
        raise SingularMatrixError(f"{a.n}x{a.n} matrix is singular")
    return BitMatrix(inv, a.n)


def mat_pow(a: BitMatrix, e: int) -> BitMatrix:
    """``a ** e`` by left-to-right square-and-multiply; ``a ** 0`` is I."""
    if e < 0:
        raise ValueError("negative exponents need mat_inv first")
    if e == 0:
        return BitMatrix.identity(a.n)
    acc = a
    for bit in bin(e)[3:]:
        acc = mat_mul(acc, acc)
        if bit == "1":
            acc = mat_mul(acc, a)
    return acc


class SquareTable:
    """Caches ``base ** (2**k)`` so repeated powers of one base skip the squarings."""

    def __init__(self, base: BitMatrix, max_exponent: int):
        self.base = base
        self.max_exponent = max_exponent
        squares = [base]
        for _ in range(max(max_exponent.bit_length() - 1, 0)):
            squares.append(mat_mul(squares[-1], squares[-1]))
        self._squares = squares

    def power(self, e: int) -> BitMatrix:
        if not 0 <= e <= self.max_exponent:
            raise ValueError(f"exponent {e} outside [0, {self.max_exponent}]")
        acc = None
        k = 0
        while e:
            if e & 1:
                sq = self._squares[k]
                acc = sq if acc is None else mat_mul(acc, sq)
            e >>= 1
            k += 1
        return BitMatrix.identity(self.base.n) if acc is None else acc


def multi_pow(bases: Sequence[BitMatrix], exponents: Sequence[int], group: int = 4) -> BitMatrix:
    """Product of ``bases[i] ** exponents[i]`` for pairwise commuting bases.

    Interleaved (Straus) evaluation: bases are split into groups of ``group``,
    every subset product within a group is tabulated, and one shared chain of
    squarings serves all exponents.
    """
    if len(bases) != len(exponents):
        raise ValueError("bases and exponents differ in length")
    if not bases:
        raise ValueError("need at least one base")
    n = bases[0].n
    if any(e < 0 for e in exponents):
        raise ValueError("negative exponents need mat_inv first")
    tables = []
    for start in range(0, len(bases), group):
        members = bases[start:start + group]
        table: list[BitMatrix | None] = [None]
        for m in members:
            table += [m if t is None else mat_mul(t, m) for t in table]
        tables.append((start, len(members), table))
    acc = None
    for bit in reversed(range(max(exponents).bit_length())):
        if acc is not None:
            acc = mat_mul(acc, acc)
        for start, size, table in tables:
            idx = 0
            for k in range(size):
                idx |= ((exponents[start + k] >> bit) & 1) << k
            if idx:
                acc = table[idx] if acc is None else mat_mul(acc, table[idx])
    return BitMatrix.identity(n) if acc is None else acc


@dataclass(frozen=True)
class FactoredOrder:
    """A positive integer with its prime factorization, e.g. ``6p = 2 * 3 * p``."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        primes = [q for q, _ in self.factors]
        if len(set(primes)) != len(primes):
            raise ValueError("primes must be distinct")
        if any(q < 2 or k < 1 for q, k in self.factors):
            raise ValueError("need primes >= 2 and multiplicities >= 1")

    @classmethod
    def of(cls, *primes: int) -> FactoredOrder:
        """Build from a list of primes, repeated as needed: ``of(2, 3, 3, 7)``."""
        counts: dict[int, int] = {}
        for q in primes:
            counts[q] = counts.get(q, 0) + 1
        return cls(tuple(sorted(counts.items())))

    @property
    def value(self) -> int:
        v = 1
        for q, k in self.factors:
            v *= q ** k
        return v

    def times(self, other: FactoredOrder) -> FactoredOrder:
        counts = dict(self.factors)
        for q, k in other.factors:
            counts[q] = counts.get(q, 0) + k
        return FactoredOrder(tuple(sorted(counts.items())))


def mat_order(a: BitMatrix, bound: FactoredOrder) -> int:
    """Exact multiplicative order of ``a``, given that it divides ``bound.value``.

    Starts from ``d = bound.value`` and divides out each prime ``q`` while
    ``a ** (d // q)`` is still the identity.
    """
    d = bound.value
    if not mat_pow(a, d).is_identity():
        raise NotAnnihilatedError(f"A^{d} is not the identity")
    for q, k in bound.factors:
        for _ in range(k):
            if mat_pow(a, d // q).is_identity():
                d //= q
            else:
                break
    return d


def has_order(a: BitMatrix, order: FactoredOrder) -> bool:
    """True iff ``a`` has multiplicative order exactly ``order.value``."""
    try:
        return mat_order(a, order) == order.value
    except NotAnnihilatedError:
        return False


def random_nonsingular(n: int, rng: random.Random) -> BitMatrix:
    """Uniform element of GL(n, 2) by rejection sampling on uniform bits."""
    if n < 1:
        raise DimensionError("n must be at least 1")
    for _ in range(MAX_ATTEMPTS):
        rows = [rng.getrandbits(n) for _ in range(n)]
        a = BitMatrix(rows, n)
        if is_nonsingular(a):
            return a
    raise RetryExhausted(f"no nonsingular {n}x{n} matrix in {MAX_ATTEMPTS} draws")


def random_noncommuting_pair(n: int, rng: random.Random) -> tuple[BitMatrix, BitMatrix]:
    if n < 2:
        raise DimensionError("GL(1, 2) is trivial; need n >= 2 for a noncommuting pair")
    for _ in range(MAX_ATTEMPTS):
        r = random_nonsingular(n, rng)
        s = random_nonsingular(n, rng)
        if mat_mul(r, s) != mat_mul(s, r):
            return r, s
    raise RetryExhausted(f"no noncommuting pair in {MAX_ATTEMPTS} draws")


@dataclass(frozen=True)
class BinaryPoly:
    """Polynomial over GF(2); bit ``i`` of ``bits`` is the coefficient of x**i."""

    bits: int

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("coefficient bits must be non-negative")

    @classmethod
    def from_exponents(cls, *exps: int) -> BinaryPoly:
        bits = 0
        for e in exps:
            bits ^= 1 << e
        return cls(bits)

    @property
    def degree(self) -> int:
        return self.bits.bit_length() - 1

    def coefficients(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.degree + 1)]

    def __str__(self) -> str:
        if self.bits == 0:
            return "0"
        terms = []
        for i in reversed(range(self.degree + 1)):
            if (self.bits >> i) & 1:
                terms.append("1" if i == 0 else "x" if i == 1 else f"x^{i}")
        return " + ".join(terms)


def companion(poly: BinaryPoly) -> BitMatrix:
    """Companion matrix of a monic polynomial of degree m >= 1.

    Rows 0..m-2 carry the superdiagonal; the last row holds the low
    coefficients ``a_0 .. a_{m-1}``, so x^2 + x + 1 gives [[0, 1], [1, 1]].
    """
    m = poly.degree
    if m < 1:
        raise ValueError(f"need a polynomial of degree >= 1, got {poly}")
    rows = [1 << (i + 1) for i in range(m - 1)]
    rows.append(poly.bits & ((1 << m) - 1))
    return BitMatrix(rows, m)


def block_diag(blocks: Sequence[BitMatrix]) -> BitMatrix:
    if not blocks:
        raise ValueError("need at least one block")
    rows = []
    offset = 0
    for blk in blocks:
        rows.extend(r << offset for r in blk.rows)
        offset += blk.n
    return BitMatrix(rows, offset)


def conjugate(x: BitMatrix, a: BitMatrix) -> BitMatrix:
    """``x @ a @ x^-1``."""
    return mat_mul(mat_mul(x, a), mat_inv(x))
