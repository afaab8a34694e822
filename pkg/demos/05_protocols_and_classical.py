"""
Standard mitigation protocols and a classical comparison
========================================================
"""

import numpy as np

from qemtk import classical as cl
from qemtk import inverses as inv
from qemtk import matrep as mr
from qemtk import noisemodels as nm
from qemtk import protocols as pr

print("zero-noise extrapolation of <Z> under amplified depolarizing noise")
scales = np.array([1.0, 1.5, 2.0, 3.0])
values = (1 - 0.05) ** scales
for fit in ("richardson", "linear", "exp"):
    est, _ = pr.richardson_extrapolate(scales, values, fit)
    print(f"   {fit:>10}: {est:.6f}")

print("quasiprobability decomposition of the inverse depolarizing map")
basis = [mr.unitary_channel(P) for P in nm.PAULIS.values()]
for lam in (0.1, 1 / 3, 0.6):
    dec = pr.quasiprob_decompose(inv.exact_inverse(nm.depolarizing(lam)), basis)
    print(f"   lam={lam:.3f}: coefficients {np.round(dec.coefficients, 4)}, cost {dec.cost:.4f}")

print("readout inversion")
T = pr.symmetric_confusion(0.1)
print("   ", pr.readout_mitigate(T, [0.05, 0.95]))
print("   ", pr.readout_mitigate(T, [0.05, 0.95], project=True))

print("virtual distillation purifies")
rho = nm.random_state(3, seed=2)
print("   ", [round(pr.purity(pr.virtual_distill(rho, m)), 4) for m in (1, 2, 3, 4)])

print("repetition code over a binary symmetric channel")
for p in (0.05, 0.1, 0.2):
    r = cl.repetition_error_rate(p, 200_000, seed=0)
    print(f"   p={p}: exact {r.exact:.5f}, simulated {r.empirical:.5f}, leading order {r.paper_value:.5f}")
msg = "1011"
received = cl.transmit(cl.repetition_encode(msg), 0.1, seed=3)
print("   sent", msg, "decoded", "".join(map(str, cl.repetition_decode(received))))
