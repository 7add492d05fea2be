"""The four protocol stages: key generation, issue/encryption, decryption, recycling.

Trent (the trusted center) prepares Bell pairs and keeps the ``p`` halves as
Bob's public key; the ``q`` halves travel to Bob, shuffled among decoys, as
his private key. Alice borrows ``p`` qubits to encrypt with CNOT(p -> l); Bob
undoes it with CNOT(q -> l). Returned ``p`` qubits are spot-checked against
Bob's ``q`` qubits in random conjugate bases before reuse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import qsim
from .adversary import NO_ADVERSARY, AdversaryStrategy, EveState, Transit, adversary_transform
from .keystore import BellKeyStore, Decoy, KeyPair, Lifecycle, ProtocolError

_NOISE_OPS = (
    qsim.IDENTITY,
    qsim.PAULI_X,
    qsim.PAULI_Z,
    qsim.PAULI_X @ qsim.PAULI_Z,
)


def default_decoy_count(n: int) -> int:
    return max(8, math.ceil(n / 4))


@dataclass(frozen=True)
class SessionConfig:
    key_length: int = 64
    message_length: int = 32
    decoy_count: int | None = None
    recycle_test_fraction: float = 0.25
    abort_threshold: float = 0.0
    noise: float | None = None
    seed: int = 0
    digest_bits: int | None = None

    def __post_init__(self):
        if self.key_length < 1:
            raise ValueError(f"key_length must be >= 1, got {self.key_length}")
        if not 1 <= self.message_length <= self.key_length:
            raise ValueError(f"message_length must be in [1, key_length={self.key_length}], got {self.message_length}")
        if self.decoy_count is None:
            object.__setattr__(self, "decoy_count", default_decoy_count(self.key_length))
        if self.decoy_count < 1:
            raise ValueError(f"decoy_count must be >= 1, got {self.decoy_count}")
        if not 0.0 < self.recycle_test_fraction < 1.0:
            raise ValueError(f"recycle_test_fraction must lie in (0, 1), got {self.recycle_test_fraction}")
        if not 0.0 <= self.abort_threshold <= 1.0:
            raise ValueError(f"abort_threshold must lie in [0, 1], got {self.abort_threshold}")
        if self.noise is not None and not 0.0 <= self.noise <= 1.0:
            raise ValueError(f"noise must lie in [0, 1], got {self.noise}")
        spare = self.key_length - self.message_length
        if self.digest_bits is None:
            object.__setattr__(self, "digest_bits", min(64, spare))
        if not 0 <= self.digest_bits <= min(64, spare):
            raise ValueError(f"digest_bits must be in [0, min(64, key_length - message_length) = {min(64, spare)}], got {self.digest_bits}")

    @property
    def payload_length(self) -> int:
        return self.message_length + self.digest_bits


@dataclass
class KeygenResult:
    store: BellKeyStore
    decoy_error_rate: float
    aborted: bool
    decoys: list[Decoy]


@dataclass
class IssueResult:
    pairs: list[KeyPair]
    decoy_error_rate: float
    aborted: bool
    decoys: list[Decoy]


@dataclass
class DecryptResult:
    bits: list[int]
    bell_fidelities: list[float]


@dataclass
class RecycleResult:
    error_rate: float
    passed: bool
    tested: list[int]
    bases: list[str]


def _depolarize(t: Transit, p: float, rng: np.random.Generator) -> None:
    hit = rng.random() < p
    op = int(rng.integers(4))
    if hit and op:
        t.register = qsim.apply_single(t.register, _NOISE_OPS[op], t.qubit)


def send(transits: Sequence[Transit], channel: str, config: SessionConfig, adversary: AdversaryStrategy, eve: EveState | None, rng: np.random.Generator) -> None:
    """Carry qubits over a quantum channel: noise, then the eavesdropper."""
    attack = adversary.targets(channel)
    if attack and eve is None:
        raise ValueError("an active adversary needs an EveState")
    for t in transits:
        if config.noise:
            _depolarize(t, config.noise, rng)
        if attack:
            adversary_transform(adversary, t, eve, rng, channel)


def _interleave(pairs: Sequence[KeyPair], qubit_attr: str, k: int, rng: np.random.Generator) -> tuple[list[Transit], list[Decoy]]:
    total = len(pairs) + k
    positions = np.sort(rng.choice(total, size=k, replace=False))
    bases = rng.integers(2, size=k)
    bits = rng.integers(2, size=k)
    decoys = [Decoy.prepare(int(pos), qsim.X if b else qsim.Z, int(v)) for pos, b, v in zip(positions, bases, bits)]
    by_pos = {d.position: d for d in decoys}
    key_iter = iter(pairs)
    transits = []
    for pos in range(total):
        if pos in by_pos:
            transits.append(Transit(by_pos[pos], 0, pos))
        else:
            pair = next(key_iter)
            transits.append(Transit(pair, getattr(pair, qubit_attr), pos))
    return transits, decoys


def check_decoys(decoys: Sequence[Decoy], rng: np.random.Generator) -> float:
    """Receiver measures each decoy in its announced basis; returns the error rate."""
    errors = 0
    for d in decoys:
        outcome, d.register = qsim.measure_qubit(d.register, 0, d.basis, rng)
        errors += outcome != d.bit
    return errors / len(decoys)


def _announce(eve: EveState | None, stage: str, what: str, payload) -> None:
    if eve is not None:
        eve.heard.append((stage, what, payload))


def stage1_keygen(config: SessionConfig, adversary: AdversaryStrategy = NO_ADVERSARY, rng: np.random.Generator | None = None, eve: EveState | None = None) -> KeygenResult:
    """Trent makes ``n`` Bell pairs and ships the private halves to Bob among decoys."""
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    store = BellKeyStore()
    pairs = store.generate(config.key_length)
    transits, decoys = _interleave(pairs, "q_index", config.decoy_count, rng)
    send(transits, "keygen", config, adversary, eve, rng)

    layout = [(d.position, d.basis.name) for d in decoys]
    _announce(eve, "keygen", "decoys", layout)
    if eve is not None:
        eve.learn_layout("keygen", [d.position for d in decoys], [p.pair_id for p in pairs])

    rate = check_decoys(decoys, rng)
    aborted = rate > config.abort_threshold
    _announce(eve, "keygen", "verdict", "abort" if aborted else "ok")
    if aborted:
        for pair in pairs:
            store.transition(pair, Lifecycle.DISCARDED)
    return KeygenResult(store, rate, aborted, decoys)


def stage2_issue_public_key(store: BellKeyStore, count: int, config: SessionConfig, adversary: AdversaryStrategy = NO_ADVERSARY, rng: np.random.Generator | None = None, eve: EveState | None = None, recipient: str = "alice") -> IssueResult:
    """Trent sends the first ``count`` fresh public-key qubits to a sender, with decoys."""
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    pairs = store.issue(recipient, count)
    transits, decoys = _interleave(pairs, "p_index", config.decoy_count, rng)
    send(transits, "issue", config, adversary, eve, rng)

    _announce(eve, "issue", "decoys", [(d.position, d.basis.name) for d in decoys])
    _announce(eve, "issue", "subsequence", [p.pair_id for p in pairs])
    if eve is not None:
        eve.learn_layout("issue", [d.position for d in decoys], [p.pair_id for p in pairs])

    rate = check_decoys(decoys, rng)
    aborted = rate > config.abort_threshold
    _announce(eve, "issue", "verdict", "abort" if aborted else "ok")
    if aborted:
        for pair in pairs:
            store.transition(pair, Lifecycle.DISCARDED)
    return IssueResult(pairs, rate, aborted, decoys)


def stage2_encrypt(alice_pairs: Sequence[KeyPair], message: Sequence[int]) -> list[Transit]:
    """Prepare ``|m_i>`` on a fresh qubit ``l_i`` and apply CNOT(p_i -> l_i)."""
    message = list(message)
    if len(message) != len(alice_pairs):
        raise ValueError(f"message has {len(message)} bits but {len(alice_pairs)} key qubits were issued")
    cipher = []
    for i, (pair, m) in enumerate(zip(alice_pairs, message)):
        if m not in (0, 1):
            raise ValueError(f"message bits must be 0 or 1, got {m!r}")
        reg, l = qsim.append_qubit(pair.register, int(m), "l")
        pair.register = qsim.apply_cnot(reg, pair.p_index, l)
        cipher.append(Transit(pair, l, i))
    return cipher


def stage3_decrypt(store: BellKeyStore, ciphertext: Sequence[Transit], pair_ids: Sequence[int], rng: np.random.Generator) -> DecryptResult:
    """Bob applies CNOT(q_i -> l_i) and reads ``l_i`` in Z.

    ``pair_ids`` is Trent's announcement of which public-key sub-sequence the
    sender used.
    """
    if len(pair_ids) != len(ciphertext):
        raise ProtocolError(f"{len(ciphertext)} ciphertext qubits but {len(pair_ids)} pair ids")
    bits, fids = [], []
    for t, pid in zip(ciphertext, pair_ids):
        pair = store.get(pid)
        if pair.lifecycle is not Lifecycle.ISSUED or t.holder is not pair:
            raise ProtocolError(f"ciphertext qubit {t.position} does not match issued pair {pid}")
        reg = qsim.apply_cnot(pair.register, pair.q_index, t.qubit)
        bit, reg = qsim.measure_qubit(reg, t.qubit, qsim.Z, rng)
        if t.qubit != reg.num_qubits - 1:
            raise qsim.QuantumStateError(f"ciphertext qubit {t.qubit} is not the newest qubit of pair {pid}")
        pair.register = qsim.discard_qubit(reg, t.qubit, qsim.Z, bit)
        bits.append(bit)
        fids.append(pair.bell_fidelity())
    return DecryptResult(bits, fids)


def stage4_recycle(store: BellKeyStore, returned: Sequence[KeyPair], config: SessionConfig, adversary: AdversaryStrategy = NO_ADVERSARY, rng: np.random.Generator | None = None, eve: EveState | None = None) -> RecycleResult:
    """Trent spot-checks returned public-key qubits against Bob's halves.

    A random ``recycle_test_fraction`` of the pairs is measured on both sides
    in a shared random basis (Z or X); for intact Bell pairs the outcomes
    agree. On success the tested pairs are consumed and the rest become
    ``recycled``; otherwise every returned pair is discarded.
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    returned = list(returned)
    for pair in returned:
        if pair.lifecycle is not Lifecycle.ISSUED:
            raise ProtocolError(f"pair {pair.pair_id} was not issued (state {pair.lifecycle.value})")
    send([Transit(p, p.p_index, i) for i, p in enumerate(returned)], "recycle", config, adversary, eve, rng)

    n_test = math.ceil(config.recycle_test_fraction * len(returned))
    picks = sorted(int(i) for i in rng.choice(len(returned), size=n_test, replace=False))
    bases = [qsim.X if b else qsim.Z for b in rng.integers(2, size=n_test)]
    _announce(eve, "recycle", "tests", [(returned[i].pair_id, b.name) for i, b in zip(picks, bases)])

    mismatches = 0
    for i, basis in zip(picks, bases):
        pair = returned[i]
        trent, reg = qsim.measure_qubit(pair.register, pair.p_index, basis, rng)
        bob, pair.register = qsim.measure_qubit(reg, pair.q_index, basis, rng)
        mismatches += trent != bob
    rate = mismatches / n_test if n_test else 0.0
    passed = rate <= config.abort_threshold
    _announce(eve, "recycle", "verdict", "ok" if passed else "discard")

    tested = {returned[i].pair_id for i in picks}
    for pair in returned:
        if not passed:
            store.transition(pair, Lifecycle.DISCARDED)
        elif pair.pair_id in tested:
            store.transition(pair, Lifecycle.CONSUMED)
        else:
            store.transition(pair, Lifecycle.RECYCLED)
    return RecycleResult(rate, passed, sorted(tested), [b.name for b in bases])
