"""Public-key encryption with Bell-pair keys, as interacting roles over attackable channels."""
from .adversary import (
    CHANNELS,
    NO_ADVERSARY,
    AdversaryStrategy,
    AttackKind,
    EveState,
    Transit,
    UnsupportedStrategy,
    adversary_transform,
    eve_ancilla_decrypt,
    eve_read_ciphertext,
)
from .digest import FNV_OFFSET, FNV_PRIME, digest_bits, sha256_digest, test_digest
from .keystore import BELL, BellKeyStore, Decoy, KeyPair, Lifecycle, ProtocolError, RefuelRequired
from .session import EveBit, SessionOutcome, run_session
from .stages import (
    DecryptResult,
    IssueResult,
    KeygenResult,
    RecycleResult,
    SessionConfig,
    check_decoys,
    default_decoy_count,
    send,
    stage1_keygen,
    stage2_encrypt,
    stage2_issue_public_key,
    stage3_decrypt,
    stage4_recycle,
)

__all__ = [name for name in dir() if not name.startswith("_")]
