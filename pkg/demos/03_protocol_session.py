"""
One protocol session
====================

Trent makes Bell pairs, Bob gets the private halves among decoys, Alice
borrows public halves to encrypt, Bob decrypts, and Trent recycles.
"""
import numpy as np

from qpkc import qsim
from qpkc.protocol import (
    AdversaryStrategy,
    BellKeyStore,
    SessionConfig,
    run_session,
    stage2_encrypt,
    stage3_decrypt,
)

# encryption and decryption by hand
store = BellKeyStore()
store.generate(4)
pairs = store.issue("alice", 4)
cipher = stage2_encrypt(pairs, [1, 0, 1, 1])
print("ciphertext qubit in Z:", qsim.outcome_probabilities(cipher[0].register, cipher[0].qubit, qsim.Z))
dec = stage3_decrypt(store, cipher, [p.pair_id for p in pairs], np.random.default_rng(0))
print("Bob reads", dec.bits, "Bell fidelity after decryption", dec.bell_fidelities)

# full sessions
config = SessionConfig(key_length=64, message_length=32, seed=7)
out = run_session(config)
print("\nclean:", "msg_ok", out.msg_ok, "digest_ok", out.digest_ok, "store", out.store_counts)

out = run_session(config, AdversaryStrategy("dos", flip_probability=0.5))
print("flip attack:", "msg_ok", out.msg_ok, "digest_ok", out.digest_ok)

out = run_session(config, AdversaryStrategy("intercept"))
print("intercept-resend:", "aborted at", out.abort_stage, "decoy error rate", out.decoy_error_rate_keygen)
