"""Small pure-state qubit simulator.

Registers are dense amplitude vectors over a handful of qubits. Qubit 0 is
the leftmost symbol of a ket and the most significant bit of the amplitude
index, so ``|10>`` lives at index 2.

Every gate and measurement returns a new register; nothing is mutated in
place. All randomness comes from an injected ``numpy.random.Generator``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

NORM_TOL = 1e-10
MATRIX_TOL = 1e-12
_MIN_BRANCH = 1e-15


class QuantumStateError(RuntimeError):
    """An internal invariant of the simulator was violated."""


@dataclass(frozen=True)
class MeasurementBasis:
    """Projective basis ``{R(theta)|0>, R(theta)|1>}`` in the x-z plane."""

    theta: float
    name: str = ""

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError(f"basis angle must be finite, got {self.theta!r}")

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        r = rotation_gate(self.theta)
        return r[:, 0].copy(), r[:, 1].copy()

    def __str__(self):
        return self.name or f"Planar({self.theta:.6g})"


Z = MeasurementBasis(0.0, "Z")
X = MeasurementBasis(math.pi / 2, "X")


def planar(theta: float) -> MeasurementBasis:
    return MeasurementBasis(float(theta))


@dataclass
class QuantumRegister:
    amplitudes: np.ndarray
    labels: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2 or amps.size & (amps.size - 1):
            raise ValueError(f"amplitude vector length must be a power of two >= 2, got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"register is not normalized (sum |a|^2 = {norm!r})")
        self.amplitudes = amps

    @classmethod
    def _trusted(cls, amplitudes: np.ndarray, labels: dict[int, str]) -> "QuantumRegister":
        # Skips validation; only for results of norm-preserving internal ops.
        reg = object.__new__(cls)
        reg.amplitudes = amplitudes
        reg.labels = labels
        return reg

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "QuantumRegister":
        return QuantumRegister._trusted(self.amplitudes.copy(), dict(self.labels))

    def __repr__(self):
        return f"QuantumRegister(num_qubits={self.num_qubits}, labels={self.labels})"


def _check_qubit(reg: QuantumRegister, q: int) -> None:
    if not 0 <= q < reg.num_qubits:
        raise IndexError(f"qubit index {q} out of range for {reg.num_qubits}-qubit register")


def new_register(num_qubits: int, initial_bits: Sequence[int], labels: dict[int, str] | None = None) -> QuantumRegister:
    """Computational basis state ``|b_0 b_1 ...>``."""
    bits = list(initial_bits)
    if num_qubits < 1 or len(bits) != num_qubits:
        raise ValueError(f"need {num_qubits} >= 1 initial bits, got {len(bits)}")
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"initial bits must be 0 or 1, got {b!r}")
        index = (index << 1) | int(b)
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[index] = 1.0
    return QuantumRegister._trusted(amps, dict(labels or {}))


def register_from_vector(vector, labels: dict[int, str] | None = None) -> QuantumRegister:
    return QuantumRegister(np.array(vector, dtype=complex), dict(labels or {}))


def rotation_gate(theta: float) -> np.ndarray:
    """Real planar rotation ``[[cos t/2, -sin t/2], [sin t/2, cos t/2]]``.

    R(a) R(b) = R(a + b) and R(pi)|psi> is orthogonal to |psi>.
    """
    if not math.isfinite(theta):
        raise ValueError(f"rotation angle must be finite, got {theta!r}")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def is_unitary(u: np.ndarray, tol: float = MATRIX_TOL) -> bool:
    u = np.asarray(u)
    return u.shape == (2, 2) and bool(np.allclose(u.conj().T @ u, IDENTITY, atol=tol, rtol=0))


def apply_single(reg: QuantumRegister, u: np.ndarray, q: int) -> QuantumRegister:
    _check_qubit(reg, q)
    n = reg.num_qubits
    psi = reg.amplitudes.reshape(1 << q, 2, 1 << (n - q - 1))
    out = np.matmul(u, psi)
    return QuantumRegister._trusted(out.reshape(-1), dict(reg.labels))


@lru_cache(maxsize=None)
def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n)
    cmask = 1 << (n - 1 - control)
    tmask = 1 << (n - 1 - target)
    return np.where(idx & cmask, idx ^ tmask, idx)


def apply_cnot(reg: QuantumRegister, control: int, target: int) -> QuantumRegister:
    if control == target:
        raise ValueError(f"CNOT control and target must differ (both {control})")
    _check_qubit(reg, control)
    _check_qubit(reg, target)
    perm = _cnot_permutation(reg.num_qubits, control, target)
    return QuantumRegister._trusted(reg.amplitudes[perm], dict(reg.labels))


def tensor(a: QuantumRegister, b: QuantumRegister) -> QuantumRegister:
    """``a ⊗ b``; qubits of ``b`` are renumbered after those of ``a``."""
    labels = dict(a.labels)
    labels.update({k + a.num_qubits: v for k, v in b.labels.items()})
    return QuantumRegister._trusted(np.multiply.outer(a.amplitudes, b.amplitudes).reshape(-1), labels)


def append_qubit(reg: QuantumRegister, bit: int = 0, label: str | None = None) -> tuple[QuantumRegister, int]:
    """Attach a fresh ``|bit>`` qubit at the end; returns the register and its index."""
    extra = new_register(1, [bit], {0: label} if label else None)
    return tensor(reg, extra), reg.num_qubits


def prepare_bell_pair() -> QuantumRegister:
    amps = np.zeros(4, dtype=complex)
    amps[0] = amps[3] = 1 / math.sqrt(2)
    return QuantumRegister._trusted(amps, {0: "p", 1: "q"})


def prepare_basis_state(basis: MeasurementBasis, bit: int) -> QuantumRegister:
    """Single qubit in ``R(theta)|bit>``."""
    vec = basis.vectors()[bit]
    return QuantumRegister._trusted(vec.astype(complex), {})


def _z_frame_probability_one(reg: QuantumRegister, q: int, basis: MeasurementBasis) -> tuple[np.ndarray, float]:
    n = reg.num_qubits
    rotated = reg if basis.theta == 0.0 else apply_single(reg, rotation_gate(-basis.theta), q)
    view = rotated.amplitudes.reshape(1 << q, 2, 1 << (n - q - 1))
    p1 = float(np.sum(np.abs(view[:, 1, :]) ** 2))
    return view, min(max(p1, 0.0), 1.0)


def outcome_probabilities(reg: QuantumRegister, q: int, basis: MeasurementBasis) -> tuple[float, float]:
    _check_qubit(reg, q)
    _, p1 = _z_frame_probability_one(reg, q, basis)
    return 1.0 - p1, p1


def measure_qubit(reg: QuantumRegister, q: int, basis: MeasurementBasis, rng: np.random.Generator) -> tuple[int, QuantumRegister]:
    """Projective measurement of one qubit.

    Consumes exactly one uniform draw from ``rng`` so that random streams stay
    aligned between runs that differ only in which qubits were disturbed.
    """
    _check_qubit(reg, q)
    view, p1 = _z_frame_probability_one(reg, q, basis)
    outcome = 1 if rng.random() < p1 else 0
    p = p1 if outcome else 1.0 - p1
    if p < _MIN_BRANCH:
        raise QuantumStateError(f"selected measurement branch has probability {p!r}")
    collapsed = np.zeros_like(view)
    collapsed[:, outcome, :] = view[:, outcome, :] / math.sqrt(p)
    out = QuantumRegister._trusted(collapsed.reshape(-1), dict(reg.labels))
    if basis.theta != 0.0:
        out = apply_single(out, rotation_gate(basis.theta), q)
    return outcome, out


def discard_qubit(reg: QuantumRegister, q: int, basis: MeasurementBasis, outcome: int) -> QuantumRegister:
    """Drop a qubit that is known to sit in basis vector ``outcome`` of ``basis``.

    Valid right after :func:`measure_qubit`, when the qubit is in a product
    state with the rest of the register.
    """
    _check_qubit(reg, q)
    if reg.num_qubits == 1:
        raise ValueError("cannot discard the only qubit of a register")
    n = reg.num_qubits
    rotated = reg if basis.theta == 0.0 else apply_single(reg, rotation_gate(-basis.theta), q)
    view = rotated.amplitudes.reshape(1 << q, 2, 1 << (n - q - 1))
    rest = view[:, outcome, :].reshape(-1)
    weight = float(np.vdot(rest, rest).real)
    if abs(weight - 1.0) > NORM_TOL:
        raise QuantumStateError(f"qubit {q} is not in basis vector {outcome} of {basis} (weight {weight!r})")
    labels = {}
    for k, v in reg.labels.items():
        if k < q:
            labels[k] = v
        elif k > q:
            labels[k - 1] = v
    return QuantumRegister._trusted(rest.copy(), labels)


def fidelity(reg: QuantumRegister, reference: QuantumRegister) -> float:
    if reg.num_qubits != reference.num_qubits:
        raise ValueError(f"dimension mismatch: {reg.num_qubits} vs {reference.num_qubits} qubits")
    return float(abs(np.vdot(reference.amplitudes, reg.amplitudes)) ** 2)


def subsystem_fidelity(reg: QuantumRegister, qubits: Sequence[int], reference: QuantumRegister) -> float:
    """Overlap ``<ref| rho_S |ref>`` of the reduced state on ``qubits`` with a pure reference."""
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit in {qubits}")
    if reference.num_qubits != len(qubits):
        raise ValueError(f"reference has {reference.num_qubits} qubits, subsystem has {len(qubits)}")
    for q in qubits:
        _check_qubit(reg, q)
    n = reg.num_qubits
    rest = [q for q in range(n) if q not in qubits]
    psi = reg.amplitudes.reshape((2,) * n).transpose(qubits + rest)
    psi = psi.reshape(1 << len(qubits), -1)
    overlap = reference.amplitudes.conj() @ psi
    return float(np.sum(np.abs(overlap) ** 2))


def planar_overlap(angle_a, angle_b):
    """``|<R(a)0|R(b)0>|^2 = cos^2((a - b)/2)``; vectorized over numpy arrays."""
    return np.cos((np.asarray(angle_a) - np.asarray(angle_b)) / 2) ** 2
