"""
State estimation against rotation-based public keys
====================================================

With K copies of a public-key qubit, Eve estimates the state at fidelity
F(K), reads ciphertexts in the guessed basis and resends what she saw.
"""
import numpy as np

from qpkc import gmn

# exact fidelity bound against the 1 - 1/(4K) approximation
for K in (1, 2, 10, 100, 1000):
    print(f"K={K:5d}  exact={gmn.optimal_fidelity_exact(K):.8f}  approx={gmn.optimal_fidelity_approx(K):.8f}")

# information and disturbance per bit
print("\n   K      I_AE     P_e")
for row in gmn.table1_report([10, 20, 50, 100, 1000]):
    print(f"{row.K:4d}  {row.I_AE:.4f}  {row.P_e:.4f}")

# Monte Carlo check of the closed forms
rng = np.random.default_rng(1)
rep = gmn.simulate_state_estimation_attack(16, 10, [0, 1], 500_000, rng)
print(f"\nK=10: Eve accuracy {rep.empirical_Pc:.5f} (F={rep.F}), error rate {rep.empirical_Pe:.5f} (2F(1-F)={rep.P_e:.5f})")

# the same attack, one qubit at a time through the register simulator
rep = gmn.simulate_state_estimation_attack(8, 10, [1], 5000, rng, engine="register")
print(f"register engine: Eve accuracy {rep.empirical_Pc:.4f}, error rate {rep.empirical_Pe:.4f}")
