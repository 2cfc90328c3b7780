"""Key agreement with secret subgroup generators over GF(2) matrices.

Bob publishes exponent tuples, Alice answers with conjugated powers of two
secret generators of orders 2p and 3p, and both end with the same matrix K.
"""

from .errors import (
    DimensionError,
    DlogFailed,
    HandshakeTimeout,
    KeyMismatch,
    MalformedMessage,
    NonzeroPadBits,
    NotAnnihilatedError,
    NotCoprimeError,
    OrderVerificationFailed,
    RetryExhausted,
    SingularMatrixError,
    SSGKError,
    TruncatedInput,
    UnsupportedDegreeError,
)
from .gf2 import (
    BinaryPoly,
    BitMatrix,
    FactoredOrder,
    companion,
    is_nonsingular,
    mat_inv,
    mat_mul,
    mat_order,
    mat_pow,
    random_nonsingular,
    rank,
)
from .handshake import (
    Msg1,
    Msg2,
    Msg3,
    PublicParams,
    SharedKey,
    Transcript,
    alice_finalize,
    alice_respond,
    bob_complete,
    bob_init,
    handshake_with_secrets,
    mod_inverse,
    role_rngs,
    run_local_handshake,
)
from .params import MasterMatrix, MParamSet, generate_master_matrix, is_primitive, make_mparams, supported_degrees

__version__ = "0.1.0"
