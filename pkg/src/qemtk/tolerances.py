"""Default numerical tolerances.

Every function that uses one of these takes a keyword override.
"""

TOL_HERM = 1e-9
TOL_TP = 1e-9
TOL_CP = 1e-9
TOL_PSD = 1e-9

# inverses / spectral structure
TOL_ZERO = 1e-9
TOL_RANK = 1e-9
EPS_CLUSTER = 1e-7
COND_MAX = 1e8
TOL_JORDAN = 1e-6
TOL_INV = 1e-9
TOL_BACKEND = 1e-6

# protocols
TOL_SPAN = 1e-9
