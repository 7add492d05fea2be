"""
Qubit mechanics
===============

Registers, planar rotations, CNOT and measurement in conjugate bases.
"""
import math

import numpy as np

from qpkc import qsim

rng = np.random.default_rng(0)

# R(pi/2)|0> is |+>, and R(pi) is a half-turn to the orthogonal state
zero = qsim.new_register(1, [0])
plus = qsim.apply_single(zero, qsim.rotation_gate(math.pi / 2), 0)
print("R(pi/2)|0> =", np.round(plus.amplitudes.real, 6))
print("P(+) in X basis:", qsim.outcome_probabilities(plus, 0, qsim.X)[0])

# overlap of two planar states depends only on the angle between them
a = qsim.apply_single(zero, qsim.rotation_gate(math.pi / 3), 0)
b = qsim.apply_single(zero, qsim.rotation_gate(math.pi / 6), 0)
print("fidelity(pi/3, pi/6) =", qsim.fidelity(a, b), "= cos^2(pi/12) =", math.cos(math.pi / 12) ** 2)

# a Bell pair gives random but perfectly correlated outcomes in any shared basis
for basis in (qsim.Z, qsim.X, qsim.planar(0.7)):
    agree = 0
    for _ in range(1000):
        x, reg = qsim.measure_qubit(qsim.prepare_bell_pair(), 0, basis, rng)
        y, _ = qsim.measure_qubit(reg, 1, basis, rng)
        agree += x == y
    print(f"{basis}: agreement {agree}/1000")

# each half on its own is maximally mixed
print("marginal of q in X:", qsim.outcome_probabilities(qsim.prepare_bell_pair(), 1, qsim.X))
