"""Inverses of channels: exact, Drazin and Moore-Penrose.

The Drazin inverse inverts every Jordan block with a nonzero eigenvalue and
sends the nilpotent part to zero. Two constructions are provided:

``schur`` (default)
    Reorder a complex Schur form so the zero eigenvalues trail, then assemble
    ``[[T11^-1, S], [0, 0]]`` with ``S = sum_i T11^-(i+2) T12 T22^i``.
``spectral``
    Build ``Q J' Q^-1`` from an explicit Jordan basis (:func:`spectral_decompose`).

Jordan structure is numerically ill-posed, so the Schur route is the one we
trust; the spectral route serves as a cross-check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from . import tolerances as tol
from .errors import (
    BackendDisagreement,
    ClusterAmbiguity,
    DimensionMismatch,
    IllConditionedBasis,
    NonInvertibleChannel,
    PostconditionFailed,
)
from .matrep import (
    ChannelRep,
    PropertyVerdict,
    check_properties,
    natural_tp_residual,
    sigma_min,
)

log = logging.getLogger(__name__)

INVERTIBLE_CPTP = "InvertibleCPTPInverse"
INVERTIBLE_NON_CP = "InvertibleNonCPInverse"
NON_INVERTIBLE = "NonInvertible"

# Largest modulus tolerated for an eigenvalue that the rank analysis assigns to
# the nilpotent part (perturbed defective zero blocks spread like eps**(1/k)).
ZERO_SPREAD = 1e-4


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def numerical_rank(A, tol_rank: float = tol.TOL_RANK) -> int:
    s = np.linalg.svd(np.asarray(A), compute_uv=False)
    if s.size == 0:
        return 0
    return int((s > tol_rank * max(1.0, s[0])).sum())


def _null_space(A, tol_rank: float) -> np.ndarray:
    A = np.asarray(A)
    _, s, Vh = np.linalg.svd(A)
    thr = tol_rank * max(1.0, s[0] if s.size else 0.0)
    r = int((s > thr).sum())
    return Vh[r:].conj().T


def zero_structure(M, tol_rank: float = tol.TOL_RANK) -> tuple[int, int]:
    """``(multiplicity, index)`` of the eigenvalue zero from the rank sequence of ``M^j``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    ranks = [n]
    P = np.eye(n, dtype=complex)
    for _ in range(n + 1):
        P = P @ M
        ranks.append(numerical_rank(P, tol_rank))
        if ranks[-1] == ranks[-2]:
            break
    return n - ranks[-1], len(ranks) - 2


def _square_natural(ch: ChannelRep) -> np.ndarray:
    if not ch.is_square:
        raise DimensionMismatch(f"need dim_in == dim_out, got ({ch.dim_in}, {ch.dim_out})")
    return np.asarray(ch.natural)


# ---------------------------------------------------------------------------
# classification and the exact inverse
# ---------------------------------------------------------------------------


class InvertibilityClass(NamedTuple):
    kind: str
    witness: float  # smallest singular value of the natural form
    min_abs_eigenvalue: float
    inverse_cp_verdict: PropertyVerdict | None


def classify(ch: ChannelRep, *, tol_zero: float = tol.TOL_ZERO) -> InvertibilityClass:
    M = _square_natural(ch)
    s = sigma_min(M)
    lam = float(np.abs(np.linalg.eigvals(M)).min())
    if s <= tol_zero:
        return InvertibilityClass(NON_INVERTIBLE, s, lam, None)
    verdict = check_properties(exact_inverse(ch, tol_zero=tol_zero))
    kind = INVERTIBLE_CPTP if verdict.is_cp and verdict.is_tp else INVERTIBLE_NON_CP
    return InvertibilityClass(kind, s, lam, verdict)


def exact_inverse(
    ch: ChannelRep,
    *,
    tol_zero: float = tol.TOL_ZERO,
    tol_inv: float = tol.TOL_INV,
    tol_tp: float = tol.TOL_TP,
) -> ChannelRep:
    """Channel whose natural form is ``inv(v(ch))``.

    Raises :class:`NonInvertibleChannel` when the smallest singular value is at
    most ``tol_zero``. HP and TP are carried over from the input (checked).
    """
    M = _square_natural(ch)
    if sigma_min(M) <= tol_zero:
        raise NonInvertibleChannel("natural form is singular")
    Minv = np.linalg.inv(M)
    n = M.shape[0]
    scale = max(1.0, np.linalg.norm(Minv, 2))
    if np.linalg.norm(Minv @ M - np.eye(n), 2) > tol_inv * scale * max(1.0, np.linalg.norm(M, 2)):
        raise PostconditionFailed("inverse does not compose to the identity")
    inv = ChannelRep.from_natural(Minv, ch.dim_in, ch.dim_out)
    if natural_tp_residual(ch) <= tol_tp and natural_tp_residual(inv) > tol_tp * scale:
        raise PostconditionFailed("inverse of a TP map is not TP")
    return inv


# ---------------------------------------------------------------------------
# Jordan structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralDecomposition:
    """``M ~= Q J Q^-1`` with ``J`` assembled from ``blocks``.

    ``blocks`` lists ``(eigenvalue, size)`` in the column order of ``Q``; each
    block's columns form a Jordan chain starting with the eigenvector.
    """

    Q: np.ndarray
    blocks: tuple[tuple[complex, int], ...]
    zero_index: int
    condition_number: float
    residual: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([lam for lam, k in self.blocks for _ in range(k)])

    def jordan_matrix(self) -> np.ndarray:
        return jordan_from_blocks(self.blocks)

    def drazin_jordan_matrix(self) -> np.ndarray:
        """``J'``: inverse of every nonzero block, zero for the nilpotent blocks."""
        n = sum(k for _, k in self.blocks)
        Jp = np.zeros((n, n), dtype=complex)
        i = 0
        for lam, k in self.blocks:
            if lam != 0:
                Jp[i:i + k, i:i + k] = inverse_jordan_block(lam, k)
            i += k
        return Jp


def jordan_block(lam: complex, k: int) -> np.ndarray:
    return lam * np.eye(k, dtype=complex) + np.eye(k, k=1, dtype=complex)


def inverse_jordan_block(lam: complex, k: int) -> np.ndarray:
    """Upper-triangular Toeplitz matrix with first row ``(-1)^j / lam^(j+1)``."""
    first = np.array([(-1) ** j / lam ** (j + 1) for j in range(k)], dtype=complex)
    return sla.toeplitz(np.r_[first[0], np.zeros(k - 1)], first)


def jordan_from_blocks(blocks) -> np.ndarray:
    return sla.block_diag(*[jordan_block(lam, k) for lam, k in blocks]).astype(complex)


def _cluster(values: np.ndarray, eps: float) -> list[list[int]]:
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= eps:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _nilpotent_chains(B: np.ndarray, tol_rank: float) -> list[np.ndarray]:
    """Jordan chains of an (approximately) nilpotent ``B``; each is ``[B^(l-1) x, ..., x]``."""
    m = B.shape[0]
    kers = [np.zeros((m, 0), dtype=complex)]
    P = np.eye(m, dtype=complex)
    while kers[-1].shape[1] < m:
        P = P @ B
        K = _null_space(P, tol_rank)
        if K.shape[1] <= kers[-1].shape[1]:
            raise ClusterAmbiguity("eigenvalue cluster is not a single (defective) eigenvalue")
        kers.append(K)
    tops: list[tuple[int, np.ndarray]] = []
    for j in range(len(kers) - 1, 0, -1):
        reached = [np.linalg.matrix_power(B, lv - j) @ x for lv, x in tops]
        need = kers[j].shape[1] - kers[j - 1].shape[1] - len(reached)
        if need < 0:
            raise ClusterAmbiguity("inconsistent kernel dimensions in Jordan chain search")
        if need == 0:
            continue
        avoid = np.column_stack([kers[j - 1], *reached]) if (kers[j - 1].shape[1] or reached) else None
        cand = kers[j]
        if avoid is not None and avoid.shape[1]:
            Qa = sla.orth(avoid)
            cand = cand - Qa @ (Qa.conj().T @ cand)
        U, s, _ = np.linalg.svd(cand)
        if s.size < need or s[need - 1] <= 1e-8:
            raise ClusterAmbiguity("could not complete Jordan chains")
        tops.extend((j, U[:, i]) for i in range(need))
    chains = []
    for lv, x in tops:
        chains.append(np.column_stack([np.linalg.matrix_power(B, lv - 1 - i) @ x for i in range(lv)]))
    return chains


def spectral_decompose(
    M,
    *,
    eps_cluster: float = tol.EPS_CLUSTER,
    tol_rank: float = tol.TOL_RANK,
    tol_zero: float = tol.TOL_ZERO,
    cond_max: float = tol.COND_MAX,
    tol_jordan: float = tol.TOL_JORDAN,
) -> SpectralDecomposition:
    """Numerical Jordan decomposition.

    Eigenvalues come from a complex Schur form. The zero cluster holds the
    ``m`` smallest-modulus eigenvalues, where ``m`` is the algebraic
    multiplicity of zero read off the rank sequence of ``M^j`` (plus anything
    with modulus at most ``tol_zero``). The remaining eigenvalues are grouped
    by single linkage at ``eps_cluster``. Within a cluster the block sizes come
    from the kernels of ``(M - mean I)^j`` restricted to the cluster's
    generalized eigenspace.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    ev = np.diag(sla.schur(M, output="complex")[0])
    m0, _ = zero_structure(M, tol_rank)
    order = np.argsort(np.abs(ev))
    zero_idx = set(order[:m0].tolist()) | {i for i in range(n) if abs(ev[i]) <= tol_zero}
    if zero_idx and max(abs(ev[i]) for i in zero_idx) > ZERO_SPREAD:
        raise ClusterAmbiguity("eigenvalues assigned to zero are not small")
    rest = [i for i in range(n) if i not in zero_idx]
    clusters = [[rest[i] for i in g] for g in _cluster(ev[rest], eps_cluster)]
    groups = ([sorted(zero_idx)] if zero_idx else []) + clusters
    centers = [0.0 if zero_idx and g is groups[0] else complex(ev[g].mean()) for g in groups]
    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            gap = np.abs(ev[groups[a]][:, None] - ev[groups[b]][None, :]).min()
            if gap <= 2 * eps_cluster:
                raise ClusterAmbiguity(f"eigenvalue clusters {centers[a]:.3g} and {centers[b]:.3g} nearly touch")

    cols, blocks, zero_index = [], [], 0
    for g, lam in zip(groups, centers):
        mult = len(g)
        A = M - lam * np.eye(n)
        _, _, Vh = np.linalg.svd(np.linalg.matrix_power(A, mult))
        G = Vh[n - mult:].conj().T
        B = G.conj().T @ A @ G
        chains = _nilpotent_chains(B, tol_rank)
        for ch in chains:
            cols.append(G @ ch)
            blocks.append((lam, ch.shape[1]))
        if lam == 0:
            zero_index = max(ch.shape[1] for ch in chains)
    Q = np.column_stack(cols)
    cond = float(np.linalg.cond(Q))
    if not np.isfinite(cond) or cond > cond_max:
        raise IllConditionedBasis(f"Jordan basis condition number {cond:.3g} exceeds {cond_max:.3g}")
    J = jordan_from_blocks(blocks)
    resid = float(np.linalg.norm(Q @ J @ np.linalg.inv(Q) - M))
    if resid > tol_jordan * max(np.linalg.norm(M), 1e-300):
        raise IllConditionedBasis(f"Jordan reconstruction residual {resid:.3g} too large")
    return SpectralDecomposition(Q, tuple(blocks), zero_index, cond, resid)


# ---------------------------------------------------------------------------
# Drazin inverse
# ---------------------------------------------------------------------------


def drazin_matrix_schur(
    M, *, tol_rank: float = tol.TOL_RANK, tol_zero: float = tol.TOL_ZERO
) -> tuple[np.ndarray, int]:
    """Drazin inverse from a reordered complex Schur form; returns ``(D, index)``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    m, index = zero_structure(M, tol_rank)
    if m == 0:
        return np.linalg.inv(M), 0
    if m == n:
        return np.zeros_like(M), index
    ev = np.sort(np.abs(np.linalg.eigvals(M)))
    small, big = ev[m - 1], ev[m]
    if small > ZERO_SPREAD or big <= tol_zero:
        raise ClusterAmbiguity(f"no clean gap between zero and nonzero eigenvalues ({small:.3g}, {big:.3g})")
    cut = np.sqrt(max(small, 1e-300) * big)
    T, Zs, sdim = sla.schur(M, output="complex", sort=lambda x: abs(x) > cut)
    p = n - m
    if sdim != p:
        raise ClusterAmbiguity(f"Schur reordering selected {sdim} eigenvalues, expected {p}")
    T11, T12, T22 = T[:p, :p], T[:p, p:], T[p:, p:]
    T11inv = sla.solve_triangular(T11, np.eye(p))
    S = np.zeros((p, m), dtype=complex)
    left = T11inv @ T11inv  # T11^-(i+2)
    right = np.eye(m, dtype=complex)  # T22^i
    for _ in range(m):
        S += left @ T12 @ right
        left = left @ T11inv
        right = right @ T22
    DT = np.zeros((n, n), dtype=complex)
    DT[:p, :p] = T11inv
    DT[:p, p:] = S
    return Zs @ DT @ Zs.conj().T, index


def drazin_matrix_spectral(M, **kw) -> tuple[np.ndarray, int]:
    dec = spectral_decompose(M, **kw)
    Q = dec.Q
    return Q @ dec.drazin_jordan_matrix() @ np.linalg.inv(Q), dec.zero_index


def drazin_matrix(M, backend: str = "schur", **kw) -> tuple[np.ndarray, int]:
    if backend == "schur":
        return drazin_matrix_schur(M, **{k: v for k, v in kw.items() if k in ("tol_rank", "tol_zero")})
    if backend == "spectral":
        return drazin_matrix_spectral(M, **kw)
    raise ValueError(f"unknown backend {backend!r}")


class DrazinResiduals(NamedTuple):
    commutation: float  # ||M D - D M||
    reflexive: float  # ||D M D - D||
    index_power: float  # ||M^(k+1) D - M^k||
    idempotent: float  # ||(M D)^2 - M D||
    projector_spectrum: float  # distance of eig(M D) from {0, 1}

    def max(self) -> float:
        return max(self)


def drazin_residuals(M, D, index: int) -> DrazinResiduals:
    M, D = np.asarray(M), np.asarray(D)
    P = M @ D
    Mk = np.linalg.matrix_power(M, index)
    ev = np.linalg.eigvals(P)
    off_01 = float(np.minimum(np.abs(ev), np.abs(ev - 1)).max()) if ev.size else 0.0
    return DrazinResiduals(
        float(np.linalg.norm(P - D @ M)),
        float(np.linalg.norm(D @ M @ D - D)),
        float(np.linalg.norm(Mk @ M @ D - Mk)),
        float(np.linalg.norm(P @ P - P)),
        off_01,
    )


def drazin_inverse(
    ch: ChannelRep,
    *,
    backend: str = "schur",
    cross_check: bool = True,
    check: bool = True,
    tol_rank: float = tol.TOL_RANK,
    tol_zero: float = tol.TOL_ZERO,
    tol_tp: float = tol.TOL_TP,
    tol_backend: float = tol.TOL_BACKEND,
    tol_post: float = 1e-8,
) -> ChannelRep:
    """Drazin inverse of a square map.

    With ``check`` the defining relations and trace preservation (for TP
    input) are verified, scaled by the size of the result. With
    ``cross_check`` the other backend is run as well and the two must agree to
    ``tol_backend`` in relative Frobenius norm. When the spectral backend is the
    cross-check and cannot resolve the Jordan structure, the check is skipped
    with a logged warning.
    """
    M = _square_natural(ch)
    D, index = drazin_matrix(M, backend, tol_rank=tol_rank, tol_zero=tol_zero)
    scale = max(1.0, np.linalg.norm(D)) * max(1.0, np.linalg.norm(M)) ** (index + 1)
    if check:
        res = drazin_residuals(M, D, index)
        if res.max() > tol_post * scale:
            raise PostconditionFailed(f"Drazin relations violated: {res}")
    out = ChannelRep.from_natural(D, ch.dim_in, ch.dim_out)
    if check and natural_tp_residual(ch) <= tol_tp:
        if natural_tp_residual(out) > tol_post * scale:
            raise PostconditionFailed("Drazin inverse of a TP map is not TP")
    if cross_check:
        other = "spectral" if backend == "schur" else "schur"
        try:
            D2, _ = drazin_matrix(M, other, tol_rank=tol_rank, tol_zero=tol_zero)
        except (IllConditionedBasis, ClusterAmbiguity) as exc:
            # Jordan structure is not resolvable here; the Schur result stands on its own checks.
            if backend != "schur":
                raise
            log.warning("Drazin cross-check skipped: %s", exc)
            return out
        diff = np.linalg.norm(D - D2) / max(1.0, np.linalg.norm(D))
        if diff > tol_backend:
            raise BackendDisagreement(f"Drazin backends differ by {diff:.3g}")
    return out


# ---------------------------------------------------------------------------
# Moore-Penrose
# ---------------------------------------------------------------------------


def pinv_matrix(M, tol_zero: float = tol.TOL_ZERO) -> np.ndarray:
    """SVD pseudoinverse; singular values at most ``tol_zero`` are dropped."""
    U, s, Vh = np.linalg.svd(np.asarray(M, dtype=complex))
    inv_s = np.zeros_like(s)
    keep = s > tol_zero
    inv_s[keep] = 1.0 / s[keep]
    return (Vh.conj().T * inv_s) @ U.conj().T


def penrose_residuals(M, P) -> tuple[float, float, float, float]:
    """The four Penrose conditions: ``MPM=M``, ``PMP=P``, ``(MP)^H=MP``, ``(PM)^H=PM``."""
    M, P = np.asarray(M), np.asarray(P)
    MP, PM = M @ P, P @ M
    return (
        float(np.linalg.norm(MP @ M - M)),
        float(np.linalg.norm(PM @ P - P)),
        float(np.linalg.norm(MP.conj().T - MP)),
        float(np.linalg.norm(PM.conj().T - PM)),
    )


def moore_penrose(ch: ChannelRep, *, tol_zero: float = tol.TOL_ZERO) -> ChannelRep:
    return ChannelRep.from_natural(pinv_matrix(ch.natural, tol_zero), ch.dim_out, ch.dim_in)


# ---------------------------------------------------------------------------
# non-CP witness
# ---------------------------------------------------------------------------


def non_cp_witness(
    ch: ChannelRep, *, tol_zero: float = tol.TOL_ZERO, tol_cp: float = tol.TOL_CP
) -> complex | None:
    """A nonzero eigenvalue of modulus strictly inside (0, 1), or ``None``.

    The smallest qualifying modulus is returned. For a CPTP input the
    (Drazin) inverse is then confirmed to be non-CP.
    """
    M = _square_natural(ch)
    ev = np.linalg.eigvals(M)
    mods = np.abs(ev)
    cand = np.flatnonzero((mods > tol_zero) & (mods < 1 - tol_zero))
    if cand.size == 0:
        return None
    lam = complex(ev[cand[np.argmin(mods[cand])]])
    v = check_properties(ch)
    if v.is_cp and v.is_tp:
        inv = drazin_inverse(ch, cross_check=False)
        if check_properties(inv).min_choi_eigenvalue >= -tol_cp:
            raise PostconditionFailed("contracting eigenvalue but the inverse looks CP")
    return lam
