"""
Leakage versus detection
========================

Eve ties an ancilla to a fraction of the private-key qubits. Each attacked
pair later leaks its plaintext bit, but each attacked decoy errs with
probability 1/4, so the abort probability climbs with the fraction.
"""
from qpkc import harness
from qpkc.protocol import AdversaryStrategy, SessionConfig

config = harness.SweepConfig(
    SessionConfig(key_length=32, message_length=16),
    AdversaryStrategy("entangle"),
    fractions=(0.0, 0.1, 0.2, 0.4, 0.7, 1.0),
    trials=300,
)
report = harness.cmd_sweep(config)
k = config.session.decoy_count
print(" f     abort   1-(1-f/4)^k   eve acc")
for row in report.rows:
    f = row["attack_fraction"]
    acc = row["eve_mean_accuracy"]
    print(f"{f:.1f}  {row['abort_probability']:.3f}   {1 - (1 - f / 4) ** k:.3f}         {'-' if acc is None else f'{acc:.3f}'}")
