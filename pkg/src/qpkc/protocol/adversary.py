"""Eavesdropper strategies acting on qubits in flight."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .. import qsim

CHANNELS = ("keygen", "issue", "ciphertext", "recycle")


class UnsupportedStrategy(ValueError):
    pass


class AttackKind(str, enum.Enum):
    NONE = "none"
    INTERCEPT = "intercept"
    ENTANGLE = "entangle"
    DOS = "dos"
    GMN_STATE_ESTIMATION = "gmn-state-estimation"


_DEFAULT_CHANNELS = {
    AttackKind.NONE: frozenset(),
    AttackKind.INTERCEPT: frozenset({"keygen", "ciphertext"}),
    AttackKind.ENTANGLE: frozenset({"keygen", "ciphertext"}),
    AttackKind.DOS: frozenset({"ciphertext"}),
    AttackKind.GMN_STATE_ESTIMATION: frozenset(),
}


@dataclass(frozen=True)
class AdversaryStrategy:
    """What Eve does and where.

    ``attack_fraction`` is the independent per-qubit probability that a qubit
    in flight on a targeted channel gets attacked. ``channels`` defaults to the
    places each strategy needs: the private-key transmission for the intercept
    and entangling attacks (plus the ciphertext, where Eve cashes in), the
    ciphertext alone for the flip attack.
    """

    kind: AttackKind = AttackKind.NONE
    attack_fraction: float = 1.0
    flip_probability: float = 1.0
    channels: frozenset[str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        for name in ("attack_fraction", "flip_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if self.channels is None:
            object.__setattr__(self, "channels", _DEFAULT_CHANNELS[self.kind])
        else:
            chans = frozenset(self.channels)
            unknown = chans - set(CHANNELS)
            if unknown:
                raise ValueError(f"unknown channels {sorted(unknown)}; valid: {', '.join(CHANNELS)}")
            object.__setattr__(self, "channels", chans)

    def targets(self, channel: str) -> bool:
        return self.kind is not AttackKind.NONE and channel in self.channels


NO_ADVERSARY = AdversaryStrategy()


class Transit:
    """Handle on one qubit in flight: the holder's register plus an index.

    The adversary sees only these handles in transmission order; key qubits and
    decoys look the same.
    """

    __slots__ = ("holder", "qubit", "position")

    def __init__(self, holder, qubit: int, position: int):
        self.holder = holder
        self.qubit = qubit
        self.position = position

    @property
    def register(self) -> qsim.QuantumRegister:
        return self.holder.register

    @register.setter
    def register(self, reg: qsim.QuantumRegister) -> None:
        self.holder.register = reg


@dataclass
class EveState:
    """Eve's private memory plus everything she overhears on classical channels."""

    ancillas: dict[tuple[str, int], int] = field(default_factory=dict)
    reads: dict[tuple[str, int], tuple[str, int]] = field(default_factory=dict)
    pair_ancilla: dict[int, int] = field(default_factory=dict)
    pair_reads: dict[int, tuple[str, int]] = field(default_factory=dict)
    heard: list[tuple[str, str, object]] = field(default_factory=list)

    def learn_layout(self, channel: str, decoy_positions, pair_ids) -> None:
        """Map transmission slots to pair ids once decoy positions are public."""
        decoys = set(int(p) for p in decoy_positions)
        key_slots = [pos for pos in range(len(decoys) + len(pair_ids)) if pos not in decoys]
        for pos, pid in zip(key_slots, pair_ids):
            if (channel, pos) in self.ancillas:
                self.pair_ancilla.setdefault(pid, self.ancillas[(channel, pos)])
            if (channel, pos) in self.reads:
                self.pair_reads.setdefault(pid, self.reads[(channel, pos)])


def adversary_transform(strategy: AdversaryStrategy, transit: Transit, eve: EveState, rng: np.random.Generator, channel: str = "keygen") -> None:
    """Apply one strategy to a qubit in flight, updating ``transit`` and ``eve`` in place.

    Each call consumes a fixed number of draws for a given strategy kind so
    runs that differ only in ``attack_fraction`` stay on aligned random streams.
    """
    kind = strategy.kind
    if kind is AttackKind.GMN_STATE_ESTIMATION:
        raise UnsupportedStrategy("state estimation targets the rotation-based scheme, not Bell-pair keys")
    if kind is AttackKind.NONE:
        return
    attacked = rng.random() < strategy.attack_fraction
    key = (channel, transit.position)
    if kind is AttackKind.INTERCEPT:
        basis = qsim.Z if rng.random() < 0.5 else qsim.X
        if attacked:
            outcome, transit.register = qsim.measure_qubit(transit.register, transit.qubit, basis, rng)
            eve.reads[key] = (basis.name, outcome)
    elif kind is AttackKind.ENTANGLE:
        if attacked:
            reg, a = qsim.append_qubit(transit.register, 0, "ancilla")
            transit.register = qsim.apply_cnot(reg, transit.qubit, a)
            eve.ancillas[key] = a
    elif kind is AttackKind.DOS:
        flip = rng.random() < strategy.flip_probability
        if attacked and flip:
            transit.register = qsim.apply_single(transit.register, qsim.PAULI_X, transit.qubit)


def eve_ancilla_decrypt(eve: EveState, cipher: Transit, pair_id: int, rng: np.random.Generator) -> int:
    """Read a ciphertext bit through the ancilla Eve tied to the pair.

    CNOT(ancilla -> l) disentangles ``l`` into ``|m>``; Eve reads it in Z and
    undoes the CNOT before forwarding, so Bob's decryption is unaffected.
    """
    if pair_id not in eve.pair_ancilla:
        raise UnsupportedStrategy(f"no ancilla attached to pair {pair_id}")
    a = eve.pair_ancilla[pair_id]
    reg = qsim.apply_cnot(cipher.register, a, cipher.qubit)
    bit, reg = qsim.measure_qubit(reg, cipher.qubit, qsim.Z, rng)
    cipher.register = qsim.apply_cnot(reg, a, cipher.qubit)
    return bit


def eve_read_ciphertext(strategy: AdversaryStrategy, eve: EveState, cipher: Transit, pair_id: int, rng: np.random.Generator) -> int | None:
    """Eve's move on a ciphertext qubit; returns the plaintext bit if she can decode it."""
    kind = strategy.kind
    if kind is AttackKind.ENTANGLE:
        if pair_id in eve.pair_ancilla:
            return eve_ancilla_decrypt(eve, cipher, pair_id, rng)
        return None
    if kind is AttackKind.INTERCEPT:
        read = eve.pair_reads.get(pair_id)
        if read is not None and read[0] == "Z":
            # pair collapsed to |zz>, so l = |m xor z> and a Z read is harmless
            out, cipher.register = qsim.measure_qubit(cipher.register, cipher.qubit, qsim.Z, rng)
            return out ^ read[1]
        return None
    adversary_transform(strategy, cipher, eve, rng, "ciphertext")
    return None
