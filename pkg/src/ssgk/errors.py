"""Exception types raised across the package."""

from __future__ import annotations


class SSGKError(Exception):
    """Base class for every error raised by ssgk."""


class DimensionError(SSGKError, ValueError):
    """Operands have incompatible or unsupported dimensions."""


class SingularMatrixError(SSGKError, ArithmeticError):
    """A matrix that must be invertible has no inverse over GF(2)."""


class NotAnnihilatedError(SSGKError, ArithmeticError):
    """``A ** bound`` is not the identity, so the order does not divide bound."""


class NotCoprimeError(SSGKError, ArithmeticError):
    """Modular inverse requested for a non-unit."""


class UnsupportedDegreeError(SSGKError, ValueError):
    """No factorization of ``2**m - 1`` is tabulated for this degree."""


class OrderVerificationFailed(SSGKError):
    """A generated master matrix does not have order ``6p``."""


class RetryExhausted(SSGKError):
    """A rejection-sampling loop hit its attempt bound."""


class KeyMismatch(SSGKError):
    """Both parties finished but derived different keys."""


class DlogFailed(SSGKError):
    """An exhaustive discrete log found no exponent where one must exist."""


class MalformedMessage(SSGKError, ValueError):
    """A protocol message or wire frame is structurally invalid."""


class TruncatedInput(MalformedMessage):
    """Encoded input ended before the declared structure was complete."""


class NonzeroPadBits(MalformedMessage):
    """Padding bits past column ``n`` of an encoded matrix row are set."""


class HandshakeTimeout(SSGKError, TimeoutError):
    """The peer did not deliver a message in time."""
