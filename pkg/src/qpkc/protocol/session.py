"""One end-to-end run of the protocol with an optional eavesdropper."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .adversary import NO_ADVERSARY, AdversaryStrategy, AttackKind, EveState, UnsupportedStrategy, eve_read_ciphertext
from .digest import Digest, digest_bits, test_digest
from .keystore import BellKeyStore
from .stages import (
    SessionConfig,
    send,
    stage1_keygen,
    stage2_encrypt,
    stage2_issue_public_key,
    stage3_decrypt,
    stage4_recycle,
)


@dataclass(frozen=True)
class EveBit:
    bit: int
    attacked: bool


@dataclass
class SessionOutcome:
    aborted: bool = False
    abort_stage: str | None = None
    message: list[int] = field(default_factory=list)
    decoy_error_rate_keygen: float | None = None
    decoy_error_rate_issue: float | None = None
    recycle_error_rate: float | None = None
    recycle_passed: bool | None = None
    recovered_message: list[int] = field(default_factory=list)
    digest_ok: bool | None = None
    eve_recovered_bits: list[EveBit] = field(default_factory=list)
    post_decrypt_bell_fidelities: list[float] = field(default_factory=list)
    store_counts: dict[str, int] = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return not self.aborted

    @property
    def msg_ok(self) -> bool:
        return self.completed and self.recovered_message == self.message

    @property
    def eve_bit_accuracy(self) -> float | None:
        """Fraction of message bits Eve ends up holding correctly (blind guesses included)."""
        if self.aborted or not self.eve_recovered_bits:
            return None
        hits = sum(e.bit == m for e, m in zip(self.eve_recovered_bits, self.message))
        return hits / len(self.message)

    @property
    def eve_decoded_fraction(self) -> float | None:
        if self.aborted or not self.eve_recovered_bits:
            return None
        return sum(e.attacked for e in self.eve_recovered_bits) / len(self.message)

    @property
    def mean_bell_fidelity(self) -> float | None:
        f = self.post_decrypt_bell_fidelities
        return sum(f) / len(f) if f else None


def run_session(
    config: SessionConfig,
    adversary: AdversaryStrategy = NO_ADVERSARY,
    rng: np.random.Generator | None = None,
    *,
    message: Sequence[int] | None = None,
    digest: Digest = test_digest,
) -> SessionOutcome:
    """Key generation, issue, encryption, transmission, decryption, digest check, recycling.

    The message and its digest (truncated to ``config.digest_bits``) travel
    together as one encrypted payload. Without an explicit ``rng`` the
    session is driven by ``config.seed``.
    """
    if adversary.kind is AttackKind.GMN_STATE_ESTIMATION:
        raise UnsupportedStrategy("state estimation is an attack on the rotation-based scheme; see qpkc.gmn")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    eve = EveState()
    r = config.message_length
    if message is None:
        message = [int(b) for b in rng.integers(2, size=r)]
    else:
        message = [int(b) for b in message]
        if len(message) != r:
            raise ValueError(f"message has {len(message)} bits, config says {r}")
    out = SessionOutcome(message=message)

    keygen = stage1_keygen(config, adversary, rng, eve)
    store: BellKeyStore = keygen.store
    out.decoy_error_rate_keygen = keygen.decoy_error_rate
    if keygen.aborted:
        return _abort(out, "keygen", store)

    issue = stage2_issue_public_key(store, config.payload_length, config, adversary, rng, eve)
    out.decoy_error_rate_issue = issue.decoy_error_rate
    if issue.aborted:
        return _abort(out, "issue", store)

    tag = digest_bits(digest(message), config.digest_bits)
    cipher = stage2_encrypt(issue.pairs, message + tag)
    pair_ids = [p.pair_id for p in issue.pairs]

    send(cipher, "ciphertext", config, NO_ADVERSARY, None, rng)
    eve_bits = []
    attack_cipher = adversary.targets("ciphertext")
    for t, pid in zip(cipher[:r], pair_ids):
        decoded = eve_read_ciphertext(adversary, eve, t, pid, rng) if attack_cipher else None
        guess = int(rng.integers(2))
        eve_bits.append(EveBit(guess, False) if decoded is None else EveBit(int(decoded), True))
    if attack_cipher:
        for t, pid in zip(cipher[r:], pair_ids[r:]):
            eve_read_ciphertext(adversary, eve, t, pid, rng)
    out.eve_recovered_bits = eve_bits

    dec = stage3_decrypt(store, cipher, pair_ids, rng)
    out.recovered_message = dec.bits[:r]
    out.digest_ok = digest_bits(digest(dec.bits[:r]), config.digest_bits) == dec.bits[r:]
    out.post_decrypt_bell_fidelities = dec.bell_fidelities

    rec = stage4_recycle(store, issue.pairs, config, adversary, rng, eve)
    out.recycle_error_rate = rec.error_rate
    out.recycle_passed = rec.passed
    if rec.passed:
        store.refuel()
    out.store_counts = store.counts()
    return out


def _abort(out: SessionOutcome, stage: str, store: BellKeyStore) -> SessionOutcome:
    out.aborted = True
    out.abort_stage = stage
    out.store_counts = store.counts()
    return out
