import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpkc import gmn, qsim
from qpkc.gmn import FidelityMode

# Exact sums from mpmath at 40 digits, frozen here.
EXACT_F = {
    1: 0.75,
    2: 0.8535533905932737622,
    10: 0.97524289667510288193,
    20: 0.98762525772612793368,
    100: 0.99750602705661717535,
    1000: 0.99975006228085312823,
    10_000: 0.99997500062478121052,
    100_000: 0.99999750000624978125,
}

TABLE1 = {  # K: (I_AE, P_e) to 4 d.p.
    10: (0.6627, 0.0488),
    20: (0.8061, 0.0247),
    50: (0.9092, 0.0100),
    100: (0.9496, 0.0050),
    1000: (0.9933, 0.0005),
}


def mp_exact(M):
    mpmath.mp.dps = 40
    total = mpmath.fsum(mpmath.sqrt(math.comb(M, i) * math.comb(M, i + 1)) for i in range(M))
    return mpmath.mpf(1) / 2 + total / mpmath.mpf(2) ** (M + 1)


# keygen / encrypt / decrypt


def test_keygen_n1_gives_computational_states():
    key = gmn.gmn_keygen(1, 50, np.random.default_rng(0))
    assert key.theta_n == pytest.approx(math.pi)
    for s, st_ in zip(key.s, key.public_states):
        assert qsim.fidelity(st_, qsim.new_register(1, [int(s)])) == pytest.approx(1.0, abs=1e-12)


def test_keygen_n2_s1_is_plus():
    key = gmn.gmn_keygen(2, 200, np.random.default_rng(1))
    plus = qsim.prepare_basis_state(qsim.X, 0)
    j = int(np.flatnonzero(key.s == 1)[0])
    assert qsim.fidelity(key.public_states[j], plus) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30)
@given(st.integers(1, 30), st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_keygen_invariants(n, N, seed):
    key = gmn.gmn_keygen(n, N, np.random.default_rng(seed))
    assert len(key.s) == N == len(key.public_states)
    assert np.all((key.s >= 0) & (key.s < 2**n))
    assert key.theta_n * 2**n == pytest.approx(2 * math.pi, abs=1e-12)
    zero = qsim.new_register(1, [0])
    for s, reg in zip(key.s, key.public_states):
        ref = qsim.apply_single(zero, qsim.rotation_gate(float(s) * key.theta_n), 0)
        assert qsim.fidelity(reg, ref) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", [0, 31])
def test_keygen_rejects_bad_resolution(n):
    with pytest.raises(ValueError):
        gmn.gmn_keygen(n, 1, np.random.default_rng(0))


def test_encrypt_branches():
    rng = np.random.default_rng(2)
    zero = qsim.new_register(1, [0])
    assert np.allclose(gmn.gmn_encrypt(zero, 1).amplitudes, [0, 1], atol=1e-15)
    for theta in rng.uniform(0, 2 * math.pi, size=50):
        psi = qsim.apply_single(zero, qsim.rotation_gate(theta), 0)
        assert np.array_equal(gmn.gmn_encrypt(psi, 0).amplitudes, psi.amplitudes)
        assert qsim.fidelity(gmn.gmn_encrypt(psi, 1), psi) == pytest.approx(0.0, abs=1e-12)


def test_decrypt_round_trip():
    rng = np.random.default_rng(3)
    key = gmn.gmn_keygen(8, 64, rng)
    for j in range(64):
        for m in (0, 1):
            cipher = gmn.gmn_encrypt(key.public_states[j], m)
            assert gmn.gmn_decrypt(cipher, int(key.s[j]), key.theta_n, rng) == m


def test_bob_error_after_resend_is_one_minus_f():
    # m = 0: Eve resends her guessed state at overlap F, Bob measures in the key basis
    theta, F = 0.9, 0.975
    guess = gmn.estimated_state(theta, F, np.random.default_rng(4))
    resent = qsim.apply_single(qsim.new_register(1, [0]), qsim.rotation_gate(guess), 0)
    _, p1 = qsim.outcome_probabilities(resent, 0, qsim.planar(theta))
    assert p1 == pytest.approx(1 - F, abs=1e-12)


# fidelity bound


@pytest.mark.parametrize("M", range(1, 21))
def test_exact_fidelity_matches_integer_oracle(M):
    assert gmn.optimal_fidelity_exact(M) == pytest.approx(float(mp_exact(M)), rel=1e-13)


@pytest.mark.parametrize("M, expected", sorted(EXACT_F.items()))
def test_exact_fidelity_frozen(M, expected):
    assert gmn.optimal_fidelity_exact(M) == pytest.approx(expected, rel=1e-12)


def test_exact_fidelity_small_cases():
    assert gmn.optimal_fidelity_exact(1) == 0.75
    assert gmn.optimal_fidelity_exact(2) == pytest.approx(0.5 + 2 * math.sqrt(2) / 8, abs=1e-15)
    assert gmn.optimal_fidelity_exact(10) == pytest.approx(0.975242, abs=1e-6)


@pytest.mark.parametrize("M", [0, -1, 10**6 + 1])
def test_exact_fidelity_domain(M):
    with pytest.raises(ValueError):
        gmn.optimal_fidelity_exact(M)


def test_exact_fidelity_monotone_and_close_to_approx():
    Ms = list(range(1, 2001)) + [5000, 10_000, 100_000, 10**6]
    F = [gmn.optimal_fidelity_exact(M) for M in Ms]
    assert all(b >= a for a, b in zip(F, F[1:]))
    for M, f in zip(Ms, F):
        if M >= 10:
            assert abs(f - gmn.optimal_fidelity_approx(M)) < 1e-3
        assert 0.5 < f < 1.0


def test_approx_values():
    assert gmn.optimal_fidelity_approx(1) == 0.75
    assert gmn.optimal_fidelity_approx(10) == 0.975
    assert gmn.optimal_fidelity_approx(100) == 0.9975


def test_estimation_fidelity_modes():
    assert gmn.estimation_fidelity(10, "exact") == gmn.optimal_fidelity_exact(10)
    assert gmn.estimation_fidelity(10) == 0.975
    assert gmn.EstimationModel(100, FidelityMode.EXACT).fidelity == pytest.approx(EXACT_F[100], rel=1e-12)


# derived formulas


@pytest.mark.parametrize("F, expected", [(0.975, 0.04875), (0.9875, 0.0246875), (1.0, 0.0)])
def test_error_probability(F, expected):
    assert gmn.error_probability(F) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("F", [0.49, 1.01, math.nan])
def test_error_probability_domain(F):
    with pytest.raises(ValueError):
        gmn.error_probability(F)


def test_eve_information_values():
    assert round(gmn.eve_information(0.975), 4) == 0.6627
    assert round(gmn.eve_information(0.9975), 4) == 0.9496
    assert gmn.eve_information(1.0) == 1.0


@pytest.mark.parametrize("F", [0.5, 0.2, 1.5])
def test_eve_information_domain(F):
    with pytest.raises(ValueError):
        gmn.eve_information(F)


def test_eve_information_strictly_increasing_near_one():
    grid = np.linspace(0.9, 1.0, 101)[1:]
    values = [gmn.eve_information(f) for f in grid]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_binary_entropy_against_oracle():
    for p in np.linspace(0.01, 0.99, 50):
        oracle = float(-(mpmath.mpf(p) * mpmath.log(p, 2) + (1 - mpmath.mpf(p)) * mpmath.log(1 - p, 2)))
        assert gmn.binary_entropy(p) == pytest.approx(oracle, rel=1e-13)


def test_table1_reproduced():
    rows = gmn.table1_report(list(TABLE1))
    assert [r.K for r in rows] == list(TABLE1)
    for r in rows:
        I, Pe = TABLE1[r.K]
        assert round(r.I_AE, 4) == I
        assert round(r.P_e, 4) == Pe
        assert r.P_e == pytest.approx(2 * r.F * (1 - r.F), abs=1e-12)
        assert r.empirical_Pc is None and r.empirical_Pe is None and r.trials == 0


def test_table1_exact_k1():
    (row,) = gmn.table1_report([1], "exact")
    assert row.F == 0.75 and row.P_e == 0.375
    assert row.I_AE < 0 and row.I_AE_clamped == 0.0


def test_table1_rejects_zero():
    with pytest.raises(ValueError):
        gmn.table1_report([10, 0])


# estimation model


def test_deviation_angle():
    assert gmn.deviation_angle(1.0) == 0.0
    assert gmn.deviation_angle(0.975) == pytest.approx(0.3175604292915217, abs=1e-14)


def test_estimated_state_perfect():
    assert gmn.estimated_state(1.234, 1.0, np.random.default_rng(5)) == 1.234


def test_estimated_state_overlap_equals_f():
    rng = np.random.default_rng(6)
    zero = qsim.new_register(1, [0])
    for _ in range(100):
        true = rng.uniform(0, 2 * math.pi)
        F = rng.uniform(0.51, 1.0)
        guess = gmn.estimated_state(true, F, rng)
        a = qsim.apply_single(zero, qsim.rotation_gate(true), 0)
        b = qsim.apply_single(zero, qsim.rotation_gate(guess), 0)
        assert qsim.fidelity(a, b) == pytest.approx(F, abs=1e-12)


def test_estimated_state_sign_is_random():
    rng = np.random.default_rng(7)
    guesses = gmn.estimated_state(np.zeros(10_000), 0.9, rng)
    delta = gmn.deviation_angle(0.9)
    assert np.allclose(np.abs(guesses), delta)
    plus = np.count_nonzero(guesses > 0)
    assert abs(plus - 5000) < 4 * 50


@pytest.mark.parametrize("m", [0, 1])
@pytest.mark.parametrize("F", [0.6, 0.975, 0.9999])
def test_basis_overlap_identity(m, F):
    theta = 0.37
    delta = gmn.deviation_angle(F)
    cipher = gmn.gmn_encrypt(qsim.apply_single(qsim.new_register(1, [0]), qsim.rotation_gate(theta), 0), m)
    for sign in (1, -1):
        probs = qsim.outcome_probabilities(cipher, 0, qsim.planar(theta + sign * delta))
        assert probs[m] == pytest.approx(F, abs=1e-12)


# Monte Carlo


@pytest.mark.parametrize("K", [10, 20, 50])
def test_monte_carlo_matches_closed_forms(K):
    rng = np.random.default_rng([11, K])
    rep = gmn.simulate_state_estimation_attack(16, K, [0, 1, 1, 0], 250_000, rng)
    n = rep.trials
    assert n == 1_000_000
    F, Pe = rep.F, rep.P_e
    assert abs(rep.empirical_Pc - F) < 4 * math.sqrt(F * (1 - F) / n)
    assert abs(rep.empirical_Pe - Pe) < 4 * math.sqrt(Pe * (1 - Pe) / n)


def test_monte_carlo_perfect_estimate():
    rep = gmn.simulate_state_estimation_attack(16, 10, [1, 0, 1], 10_000, np.random.default_rng(12), fidelity=1.0)
    assert rep.empirical_Pe == 0.0 and rep.empirical_Pc == 1.0


def test_register_engine_agrees_with_closed_form():
    rep = gmn.simulate_state_estimation_attack(8, 5, [0, 1], 4000, np.random.default_rng(13), engine="register")
    n, F, Pe = rep.trials, rep.F, rep.P_e
    assert abs(rep.empirical_Pc - F) < 4 * math.sqrt(F * (1 - F) / n)
    assert abs(rep.empirical_Pe - Pe) < 4 * math.sqrt(Pe * (1 - Pe) / n)


def test_register_engine_perfect_estimate():
    rep = gmn.simulate_state_estimation_attack(4, 10, [0, 1], 200, np.random.default_rng(14), fidelity=1.0, engine="register")
    assert rep.empirical_Pe == 0.0 and rep.empirical_Pc == 1.0


def test_monte_carlo_deterministic_for_seed():
    a = gmn.simulate_state_estimation_attack(16, 10, [1], 10_000, np.random.default_rng(15))
    b = gmn.simulate_state_estimation_attack(16, 10, [1], 10_000, np.random.default_rng(15))
    assert a == b


@pytest.mark.parametrize("kwargs", [
    dict(message_bits=[]),
    dict(message_bits=[2]),
    dict(trials=0),
    dict(fidelity=0.4),
    dict(engine="gpu"),
])
def test_monte_carlo_argument_errors(kwargs):
    args = dict(n=8, K=10, message_bits=[1], trials=10, rng=np.random.default_rng(0))
    args.update(kwargs)
    with pytest.raises(ValueError):
        gmn.simulate_state_estimation_attack(**args)
