"""
Non-invertible noise: Drazin versus Moore-Penrose
=================================================

A channel with a zero eigenvalue has no inverse. The Drazin inverse keeps
trace preservation, the Moore-Penrose pseudoinverse does not.
"""

import numpy as np

from qemtk import inverses as inv
from qemtk import matrep as mr
from qemtk import noisemodels as nm

np.set_printoptions(precision=4, suppress=True)

ch = nm.fixture("example2")
print("eigenvalues:", np.sort(np.linalg.eigvals(ch.natural).real))
print("classified as", inv.classify(ch).kind)

D = inv.drazin_inverse(ch)
P = inv.moore_penrose(ch)
for name, G in (("Drazin", D), ("Moore-Penrose", P)):
    v = mr.check_properties(G)
    print(f"{name:>14}: TP residual {v.tp_residual:.3g}, CP={v.is_cp}")
    print(G.natural.real)

# D N is the spectral projector onto the non-null part
print("D N is idempotent:", np.allclose(D.natural @ ch.natural @ D.natural @ ch.natural, D.natural @ ch.natural))

print()
print("Jordan structure of a random trace-preserving map with a defective zero block")
M = nm.tp_map_from_jordan([(1, 1), (0.5, 1), (0, 2)], 2, seed=1)
dec = inv.spectral_decompose(M.natural)
print("   blocks:", [(complex(np.round(lam, 6)), k) for lam, k in dec.blocks])
print("   index of zero:", dec.zero_index)
Dm = inv.drazin_inverse(M)
print("   M D M == M ?", np.allclose(M.natural @ Dm.natural @ M.natural, M.natural))
print("   D trace preserving:", mr.natural_tp_residual(Dm) < 1e-9)

print()
print("CNOT onto a |0> target dephases the control")
c = nm.cnot_dephasing_channel()
print(c.natural.real)
print("Drazin inverse equals the channel:", np.allclose(inv.drazin_inverse(c).natural, c.natural))
