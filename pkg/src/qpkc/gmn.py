"""State-estimation attack on the rotation-based (GMN) public-key scheme.

A GMN public key is a list of single qubits ``R(s_j * theta_n)|0>`` with the
integers ``s_j`` as the private key. An eavesdropper holding ``K`` copies of a
key qubit can build an estimate at the optimal collective-measurement fidelity
``F(K)``, measure ciphertexts in the estimated basis, and resend what she saw.

Closed forms:

* Eve reads the plaintext bit correctly with probability ``F``;
* her information is ``1 - 2 h(F)`` bits, ``h`` the binary entropy;
* the resend causes Alice/Bob disagreement with probability ``2 F (1 - F)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qsim

MAX_RESOLUTION = 30
MAX_COPIES = 10**6


class FidelityMode(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


# ---------------------------------------------------------------------------
# key generation, encryption, decryption


@dataclass
class GmnKeyPair:
    n: int
    s: np.ndarray
    public_states: list[qsim.QuantumRegister]

    @property
    def theta_n(self) -> float:
        return resolution_angle(self.n)

    @property
    def angles(self) -> np.ndarray:
        return self.s * self.theta_n


def resolution_angle(n: int) -> float:
    return math.pi / 2 ** (n - 1)


def gmn_keygen(n: int, N: int, rng: np.random.Generator) -> GmnKeyPair:
    if not 1 <= n <= MAX_RESOLUTION:
        raise ValueError(f"resolution exponent n must be in [1, {MAX_RESOLUTION}], got {n}")
    if N < 1:
        raise ValueError(f"key length N must be >= 1, got {N}")
    s = rng.integers(0, 2**n, size=N, dtype=np.int64)
    theta = resolution_angle(n)
    zero = qsim.new_register(1, [0])
    states = [qsim.apply_single(zero, qsim.rotation_gate(float(sj) * theta), 0) for sj in s]
    return GmnKeyPair(n, s, states)


def gmn_encrypt(pub_state: qsim.QuantumRegister, m: int) -> qsim.QuantumRegister:
    if pub_state.num_qubits != 1:
        raise ValueError(f"GMN public-key state must be one qubit, got {pub_state.num_qubits}")
    if m not in (0, 1):
        raise ValueError(f"plaintext bit must be 0 or 1, got {m!r}")
    if m == 0:
        return pub_state.copy()
    return qsim.apply_single(pub_state, qsim.rotation_gate(math.pi), 0)


def gmn_decrypt(cipher: qsim.QuantumRegister, s_j: int, theta_n: float, rng: np.random.Generator) -> int:
    outcome, _ = qsim.measure_qubit(cipher, 0, qsim.planar(s_j * theta_n), rng)
    return outcome


# ---------------------------------------------------------------------------
# estimation fidelity

_LOG_2PI = math.log(2 * math.pi)
_STIRLERR_SMALL = np.array(
    [0.0] + [math.lgamma(k + 1) - (k + 0.5) * math.log(k) + k - 0.5 * _LOG_2PI for k in range(1, 16)]
)


def _stirlerr(k: np.ndarray) -> np.ndarray:
    # log(k!) minus its Stirling approximation, for integer-valued float k >= 1
    x = np.asarray(k, dtype=float)
    x2 = x * x
    out = (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680 - 1 / (1188 * x2)) / x2) / x2) / x2) / x
    small = x <= 15
    if np.any(small):
        out[small] = _STIRLERR_SMALL[x[small].astype(np.int64)]
    return out


def _bd0(x: np.ndarray, mean: float) -> np.ndarray:
    # x log(x/mean) + mean - x, without cancellation near x = mean
    v = (x - mean) / mean
    return mean * ((1 + v) * np.log1p(v) - v)


def _log_binomial_half(M: int) -> np.ndarray:
    """``log(C(M, i) / 2^M)`` for i = 0..M, via Stirling remainders."""
    lb = np.empty(M + 1)
    lb[0] = lb[M] = -M * math.log(2)
    if M > 1:
        i = np.arange(1.0, M)
        j = M - i
        s_i = _stirlerr(i)
        half = M / 2
        bd_i = _bd0(i, half)
        # symmetric in i <-> M - i
        lb[1:M] = (
            _stirlerr(np.array([float(M)]))[0]
            - s_i
            - s_i[::-1]
            - bd_i
            - bd_i[::-1]
            + 0.5 * (math.log(M) - _LOG_2PI - np.log(i) - np.log(j))
        )
    return lb


def optimal_fidelity_exact(M: int) -> float:
    """Optimal x-z-plane estimation fidelity from ``M`` copies.

    ``1/2 + 2^-(M+1) * sum_i sqrt(C(M,i) C(M,i+1))`` evaluated in log space;
    relative error stays below 1e-10 up to ``M = 10**6``.
    """
    if not isinstance(M, (int, np.integer)) or not 1 <= M <= MAX_COPIES:
        raise ValueError(f"copies M must be an integer in [1, {MAX_COPIES}], got {M!r}")
    M = int(M)
    lb = _log_binomial_half(M)
    terms = np.exp(0.5 * (lb[:-1] + lb[1:]))
    return 0.5 + 0.5 * float(np.sum(terms))


def optimal_fidelity_approx(M: int) -> float:
    if M < 1:
        raise ValueError(f"copies M must be >= 1, got {M!r}")
    return 1.0 - 1.0 / (4 * M)


def estimation_fidelity(M: int, mode: FidelityMode | str = FidelityMode.APPROX) -> float:
    mode = FidelityMode(mode)
    if mode is FidelityMode.EXACT:
        return optimal_fidelity_exact(M)
    return optimal_fidelity_approx(M)


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def error_probability(F: float) -> float:
    if not 0.5 <= F <= 1.0:
        raise ValueError(f"fidelity must lie in [1/2, 1], got {F!r}")
    return 2 * F * (1 - F)


def eve_information(F: float) -> float:
    """Eve's information per plaintext bit, ``1 - 2 h(F)``.

    Negative for F below roughly 0.89, where h(F) exceeds 1/2; callers
    wanting a physical value clamp at 0.
    """
    if not 0.5 < F <= 1.0:
        raise ValueError(f"fidelity must lie in (1/2, 1], got {F!r}")
    return 1.0 - 2.0 * binary_entropy(F)


@dataclass(frozen=True)
class EstimationModel:
    """Eve's state estimate: a planar guess at a fixed overlap with the truth."""

    copies: int
    mode: FidelityMode = FidelityMode.APPROX

    @property
    def fidelity(self) -> float:
        return estimation_fidelity(self.copies, self.mode)

    def guess(self, true_angle, rng: np.random.Generator):
        return estimated_state(true_angle, self.fidelity, rng)


def deviation_angle(F: float) -> float:
    if not 0.5 < F <= 1.0:
        raise ValueError(f"fidelity must lie in (1/2, 1], got {F!r}")
    return 2 * math.acos(math.sqrt(F))


def estimated_state(true_angle, F: float, rng: np.random.Generator):
    """Guessed angle ``true_angle ± 2 arccos(sqrt F)`` with a random sign.

    Works elementwise when ``true_angle`` is an array.
    """
    delta = deviation_angle(F)
    if np.ndim(true_angle) == 0:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return float(true_angle) + sign * delta
    angles = np.asarray(true_angle, dtype=float)
    signs = np.where(rng.random(angles.shape) < 0.5, 1.0, -1.0)
    return angles + signs * delta


# ---------------------------------------------------------------------------
# reports


@dataclass
class AttackReport:
    K: int
    F: float
    I_AE: float
    P_e: float
    empirical_Pc: float | None = None
    empirical_Pe: float | None = None
    trials: int = 0

    @property
    def I_AE_clamped(self) -> float:
        return max(0.0, self.I_AE)


def table1_report(K_values: Sequence[int], fidelity_mode: FidelityMode | str = FidelityMode.APPROX) -> list[AttackReport]:
    rows = []
    for K in K_values:
        if K < 1:
            raise ValueError(f"K must be >= 1, got {K!r}")
        F = estimation_fidelity(int(K), fidelity_mode)
        rows.append(AttackReport(K=int(K), F=F, I_AE=eve_information(F), P_e=error_probability(F)))
    return rows


def simulate_state_estimation_attack(
    n: int,
    K: int,
    message_bits: Sequence[int],
    trials: int,
    rng: np.random.Generator,
    *,
    fidelity: float | None = None,
    engine: str = "vectorized",
    chunk: int = 1 << 18,
) -> AttackReport:
    """Monte Carlo intercept-estimate-resend against GMN encryption.

    Each trial draws a fresh key for the message, gives Eve a guess at
    fidelity ``F`` (default ``1 - 1/(4K)``) per key qubit, lets her measure the
    ciphertext in her guessed basis and resend the observed basis vector, and
    has Bob decrypt with the true key.

    ``engine="register"`` pushes every qubit through :mod:`qpkc.qsim`;
    ``"vectorized"`` samples the same Born probabilities for whole batches.
    """
    bits = np.asarray(list(message_bits), dtype=np.int64)
    if bits.size == 0:
        raise ValueError("message must contain at least one bit")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("message bits must be 0 or 1")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 1 <= n <= MAX_RESOLUTION:
        raise ValueError(f"resolution exponent n must be in [1, {MAX_RESOLUTION}], got {n}")
    F = optimal_fidelity_approx(K) if fidelity is None else float(fidelity)
    deviation_angle(F)  # domain check

    if engine == "vectorized":
        eve_ok, bob_err = _attack_vectorized(n, F, bits, trials, rng, chunk)
    elif engine == "register":
        eve_ok, bob_err = _attack_registers(n, F, bits, trials, rng)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    total = trials * bits.size
    return AttackReport(
        K=int(K),
        F=F,
        I_AE=eve_information(F),
        P_e=error_probability(F),
        empirical_Pc=eve_ok / total,
        empirical_Pe=bob_err / total,
        trials=total,
    )


def _attack_vectorized(n, F, bits, trials, rng, chunk):
    theta = resolution_angle(n)
    eve_ok = bob_err = 0
    per_trial = bits.size
    trials_per_chunk = max(1, chunk // per_trial)
    done = 0
    while done < trials:
        t = min(trials_per_chunk, trials - done)
        m = np.tile(bits, t)
        key = rng.integers(0, 2**n, size=m.size, dtype=np.int64) * theta
        guess = estimated_state(key, F, rng)
        cipher = key + m * math.pi
        # Eve measures in {R(guess)|0>, R(guess)|1>}
        eve_bit = (rng.random(m.size) >= qsim.planar_overlap(cipher, guess)).astype(np.int64)
        resent = guess + eve_bit * math.pi
        bob_bit = (rng.random(m.size) >= qsim.planar_overlap(resent, key)).astype(np.int64)
        eve_ok += int(np.count_nonzero(eve_bit == m))
        bob_err += int(np.count_nonzero(bob_bit != m))
        done += t
    return eve_ok, bob_err


def _attack_registers(n, F, bits, trials, rng):
    eve_ok = bob_err = 0
    for _ in range(trials):
        key = gmn_keygen(n, bits.size, rng)
        theta = key.theta_n
        for j, m in enumerate(bits):
            true_angle = float(key.s[j]) * theta
            guess = estimated_state(true_angle, F, rng)
            cipher = gmn_encrypt(key.public_states[j], int(m))
            eve_bit, collapsed = qsim.measure_qubit(cipher, 0, qsim.planar(guess), rng)
            bob_bit = gmn_decrypt(collapsed, int(key.s[j]), theta, rng)
            eve_ok += eve_bit == m
            bob_err += bob_bit != m
    return int(eve_ok), int(bob_err)
