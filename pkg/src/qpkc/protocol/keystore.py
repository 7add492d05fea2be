"""Bell-pair key material held by the trusted center and its users."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .. import qsim

BELL = qsim.prepare_bell_pair()


class ProtocolError(RuntimeError):
    pass


class RefuelRequired(ProtocolError):
    """Not enough fresh pairs to serve a request."""


class Lifecycle(str, enum.Enum):
    FRESH = "fresh"
    ISSUED = "issued"
    RECYCLED = "recycled"
    CONSUMED = "consumed"
    DISCARDED = "discarded"


_ALLOWED = {
    Lifecycle.FRESH: {Lifecycle.ISSUED, Lifecycle.DISCARDED},
    Lifecycle.ISSUED: {Lifecycle.RECYCLED, Lifecycle.CONSUMED, Lifecycle.DISCARDED},
    Lifecycle.RECYCLED: {Lifecycle.FRESH, Lifecycle.CONSUMED, Lifecycle.DISCARDED},
    Lifecycle.CONSUMED: set(),
    Lifecycle.DISCARDED: set(),
}


@dataclass
class KeyPair:
    """One Bell pair: ``p`` is a public-key qubit, ``q`` the private-key twin.

    The register may grow when other qubits (a ciphertext qubit, an
    eavesdropper's ancilla) become entangled with the pair.
    """

    pair_id: int
    register: qsim.QuantumRegister
    p_index: int = 0
    q_index: int = 1
    lifecycle: Lifecycle = Lifecycle.FRESH

    def bell_fidelity(self) -> float:
        return qsim.subsystem_fidelity(self.register, [self.p_index, self.q_index], BELL)


@dataclass
class Decoy:
    """BB84-type decoy: prepared as basis vector ``bit`` of ``basis``."""

    position: int
    basis: qsim.MeasurementBasis
    bit: int
    register: qsim.QuantumRegister = field(repr=False)

    @classmethod
    def prepare(cls, position: int, basis: qsim.MeasurementBasis, bit: int) -> "Decoy":
        if basis not in (qsim.Z, qsim.X):
            raise ValueError(f"decoys use the Z or X basis, got {basis}")
        return cls(position, basis, bit, qsim.prepare_basis_state(basis, bit))


class BellKeyStore:
    def __init__(self):
        self.pairs: list[KeyPair] = []
        self.issued_to: dict[str, list[int]] = {}

    def __len__(self):
        return len(self.pairs)

    def generate(self, count: int) -> list[KeyPair]:
        start = len(self.pairs)
        new = [KeyPair(start + i, BELL.copy()) for i in range(count)]
        self.pairs.extend(new)
        return new

    def get(self, pair_id: int) -> KeyPair:
        if not 0 <= pair_id < len(self.pairs):
            raise ProtocolError(f"unknown pair id {pair_id}")
        return self.pairs[pair_id]

    def with_state(self, state: Lifecycle) -> list[KeyPair]:
        return [p for p in self.pairs if p.lifecycle is state]

    def fresh(self) -> list[KeyPair]:
        return self.with_state(Lifecycle.FRESH)

    def transition(self, pair: KeyPair, new: Lifecycle) -> None:
        if new not in _ALLOWED[pair.lifecycle]:
            raise ProtocolError(f"pair {pair.pair_id}: illegal transition {pair.lifecycle.value} -> {new.value}")
        pair.lifecycle = new

    def issue(self, recipient: str, count: int) -> list[KeyPair]:
        fresh = self.fresh()
        if len(fresh) < count:
            raise RefuelRequired(f"{count} pairs requested, {len(fresh)} fresh")
        chosen = fresh[:count]
        for pair in chosen:
            self.transition(pair, Lifecycle.ISSUED)
        self.issued_to.setdefault(recipient, []).extend(p.pair_id for p in chosen)
        return chosen

    def refuel(self, new_pairs: int = 0) -> int:
        """Return recycled pairs to service and optionally mint new ones."""
        recycled = self.with_state(Lifecycle.RECYCLED)
        for pair in recycled:
            self.transition(pair, Lifecycle.FRESH)
        self.generate(new_pairs)
        return len(recycled) + new_pairs

    def counts(self) -> dict[str, int]:
        out = {s.value: 0 for s in Lifecycle}
        for p in self.pairs:
            out[p.lifecycle.value] += 1
        return out
