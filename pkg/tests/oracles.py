"""Reference computations that avoid the code paths under test."""

from fractions import Fraction
from itertools import product

import numpy as np
import sympy as sp


def natural_by_basis(kraus, d_in, d_out):
    """Column (b*d_in + a) is the column-stacked image of |a><b|."""
    M = np.zeros((d_out * d_out, d_in * d_in), dtype=complex)
    for a, b in product(range(d_in), repeat=2):
        E = np.zeros((d_in, d_in), dtype=complex)
        E[a, b] = 1
        out = sum(K @ E @ K.conj().T for K in kraus)
        M[:, b * d_in + a] = out.T.reshape(-1)
    return M


def choi_by_blocks(kraus, d_in, d_out):
    """Block (a, b) of the Choi matrix is the image of |a><b|."""
    C = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for a, b in product(range(d_in), repeat=2):
        E = np.zeros((d_in, d_in), dtype=complex)
        E[a, b] = 1
        C[a * d_out:(a + 1) * d_out, b * d_out:(b + 1) * d_out] = sum(K @ E @ K.conj().T for K in kraus)
    return C


def drazin_by_pinv(M, k):
    """``A^D = A^k (A^(2k+1))^+ A^k`` for index ``k``."""
    Ak = np.linalg.matrix_power(M, k)
    return Ak @ np.linalg.pinv(np.linalg.matrix_power(M, 2 * k + 1), rcond=1e-13) @ Ak


def dephasing_by_partial_trace(U, rho):
    """Apply ``U`` to ``rho (x) |0><0|`` and trace out the second qubit by summing blocks."""
    joint = U @ np.kron(rho, np.diag([1, 0])) @ U.conj().T
    out = np.zeros((2, 2), dtype=complex)
    for e in range(2):
        out += joint[e::2, e::2]
    return out


def pauli_natural_symbolic(w):
    """Exact natural form of the Pauli channel with weights ``w`` (I, X, Y, Z)."""
    I = sp.eye(2)
    X = sp.Matrix([[0, 1], [1, 0]])
    Y = sp.Matrix([[0, -sp.I], [sp.I, 0]])
    Z = sp.Matrix([[1, 0], [0, -1]])
    return sum((wi * sp.kronecker_product(P.conjugate(), P) for wi, P in zip(w, (I, X, Y, Z))), sp.zeros(4, 4))


def depolarizing_quasiprob_symbolic():
    """Coefficients of the depolarizing inverse over Pauli conjugations, as sympy expressions in lam."""
    lam = sp.symbols("lam", positive=True)
    a = sp.symbols("a0:4")
    D = pauli_natural_symbolic([1 - 3 * lam / 4, lam / 4, lam / 4, lam / 4])
    target = D.inv()
    basis = [pauli_natural_symbolic([int(i == j) for j in range(4)]) for i in range(4)]
    eqs = list(sum((ai * B for ai, B in zip(a, basis)), sp.zeros(4, 4)) - target)
    sol = sp.solve(eqs, a, dict=True)[0]
    return lam, [sp.simplify(sol[ai]) for ai in a]


def depolarizing_inverse_min_choi_eig(lam):
    """Smallest eigenvalue of the Choi matrix of the inverse depolarizing map (exact)."""
    D = pauli_natural_symbolic([1 - 3 * lam / 4, lam / 4, lam / 4, lam / 4])
    Dinv = D.inv()
    # block (a, b) is the image of |a><b|, pushed through the natural form column by column
    C = sp.zeros(4, 4)
    for a, b in product(range(2), repeat=2):
        E = sp.zeros(2, 2)
        E[a, b] = 1
        out = Dinv * E.T.reshape(4, 1)
        C[a * 2:(a + 1) * 2, b * 2:(b + 1) * 2] = out.reshape(2, 2).T
    return min(C.eigenvals())


def repetition_error_symbolic():
    p = sp.symbols("p")
    total = 0
    for flips in product((0, 1), repeat=3):
        k = sum(flips)
        if k >= 2:
            total += p**k * (1 - p) ** (3 - k)
    return p, sp.expand(total)


def lambda_grid_max(p, step=1e-5):
    p1, p2, p3 = p
    p4 = max(1 - p1 - p2 - p3, 0.0)
    lam = np.arange(0, 1 + step / 2, step)
    s = np.sqrt(p2) + np.sqrt(p3) + np.sqrt(p4)
    vals = np.sqrt(p1 * (1 - 0.75 * lam)) + s * np.sqrt(lam / 4)
    i = int(np.argmax(vals))
    return lam[i], vals[i]


def vd_diag(weights, m):
    num = [Fraction(w) ** m for w in weights]
    tot = sum(num)
    return [x / tot for x in num]
