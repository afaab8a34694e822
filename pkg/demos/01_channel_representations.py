"""
Channel representations and inverses that are not channels
==========================================================

A qubit channel given by its Choi matrix, converted to the superoperator
that acts on column-stacked density matrices, then inverted.
"""

import numpy as np

from qemtk import inverses as inv
from qemtk import matrep as mr
from qemtk import noisemodels as nm

np.set_printoptions(precision=4, suppress=True)

print("1. a channel from its Choi matrix")
ch = nm.fixture("example1")
print(ch.choi)
print("   verdict:", mr.check_properties(ch).as_dict())

print("2. the same map as a superoperator")
print(ch.natural)
rho = nm.random_state(2, seed=0)
print("   applying via Kraus and via the superoperator agree:",
      np.allclose(ch(rho), mr.apply_kraus(ch.kraus, rho)))

print("3. the inverse map")
Ninv = inv.exact_inverse(ch)
print(Ninv.natural)
v = mr.check_properties(Ninv)
print(f"   HP={v.is_hp} TP={v.is_tp} CP={v.is_cp}, min Choi eigenvalue {v.min_choi_eigenvalue:.4f}")

# undoing a contraction has to expand somewhere, so a negative Choi eigenvalue is expected
print("4. the same holds for depolarizing noise")
for lam in (0.05, 1 / 3, 0.9):
    c = inv.classify(nm.depolarizing(lam))
    print(f"   lam={lam:.3f}: {c.kind}, min Choi eigenvalue of inverse {c.inverse_cp_verdict.min_choi_eigenvalue:.4f}")
