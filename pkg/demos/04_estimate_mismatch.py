"""
Using the wrong noise model
===========================

True noise is a Pauli channel; mitigation inverts the depolarizing channel
that overlaps it best. For dephasing the result overshoots.
"""

import numpy as np

from qemtk import analysis as an

res = an.mismatch_experiment((0.5, 0, 0), n_states=10, seed=7)
print("best depolarizing strength:", res.lambda_max)
print("eigenvalues of the recovered map:", np.round(np.sort(res.recovered_eigenvalues.real), 6))
print()
print(f"{'z_in':>8} {'z_noisy':>8} {'z_mit':>8} {'F_mit':>7} state?")
for row in res.rows:
    print(f"{row['z_in']:8.4f} {row['z_noisy']:8.4f} {row['z_mitigated']:8.4f} "
          f"{row['f_mitigated']:7.4f} {row['f_mitigated_valid']}")

print()
for p in [(0.9, 0.05, 0.05), (0.7, 0.1, 0.1), (0, 1, 0)]:
    r = an.mismatch_experiment(p, n_states=1)
    print(p, "->", round(r.lambda_max, 6), r.verdict)
