"""
Mitigating with an imperfect noise estimate
===========================================

Random layered circuits whose noise estimates are slightly off. The error in
the reversal map is expanded to first order and compared with bounds.
"""

import numpy as np

from qemtk import analysis as an
from qemtk import circuits as cc

circ = an.random_circuit(3, 2, 1e-3, seed=4)
r = an.first_order_report(circ)
print("first-order fidelity", round(r.F_first_order, 8))
print(f"   bounds: [{r.lower_bound:.8f}, {r.upper_bound:.8f}]  holds={r.sandwich_holds}")
print(f"   ||first-order error|| {r.delta_first_order_norm:.3g} <= layerwise bound {r.layerwise_bound:.3g}")

print("mitigated output vs ideal:")
em = cc.em_output(circ)
print("   valid state:", em.valid, " distance:", np.linalg.norm(em.matrix - cc.ideal_output(circ)))

print("the first-order term captures the error up to second order:")
for f in (1.0, 0.1, 0.01):
    rep = an.delta_report(an.rescale_estimates(circ, f))
    print(f"   scale {f:5}: residual {rep.second_order_residual:.3e}")

print("observable error bound")
for A in an.sample_observables(2, 3, seed=0):
    delta, bound = an.observable_error_bound(circ, A)
    print(f"   {delta:.3e} <= {bound:.3e}")

# the right-hand side vanishes whenever every map involved preserves trace
s = an.sufficient_condition(circ, n_random=0)
print(f"sufficient condition: lhs {s.lhs:.3e}, rhs {s.rhs:.3e}, holds={s.holds}")
print("   trace functional defect of R - U^dag:", an.reversal_trace_defect(circ))
