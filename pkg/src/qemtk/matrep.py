"""Matrix representations of linear maps on operator spaces.

Conventions (fixed once, used everywhere):

* A composite index ``(x, y)`` of an ``m (x) n`` space is the flat index
  ``x * n + y``.
* Vectorization is column stacking: the entry ``A[i, j]`` of a
  ``d_out x d_in`` matrix lands at flat index ``j * d_out + i``, so the matrix
  unit ``E_{a,b}`` is sent to ``e_b (x) e_a``.
* The Choi matrix is ``sum_{a,b} E_{a,b} (x) M(E_{a,b})`` (input factor first).
* The natural form ``v(M)`` satisfies ``v(M) @ vectorize(A) == vectorize(M(A))``.

Under these conventions the natural form of ``A -> K A K^dag`` is
``conj(K) (x) K`` and ``C[(a,i),(b,j)] = v(M)[(j,i),(b,a)]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import tolerances as tol
from .errors import (
    DimensionMismatch,
    LengthMismatch,
    NonHermitianInput,
    ShapeMismatch,
)

REPS = ("kraus", "choi", "natural")


def _as_matrix(A, name="matrix") -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def _frozen(A: np.ndarray) -> np.ndarray:
    A = np.array(A, dtype=complex, copy=True)
    A.setflags(write=False)
    return A


# ---------------------------------------------------------------------------
# vectorization
# ---------------------------------------------------------------------------


def vectorize(A) -> np.ndarray:
    """Column-stack ``A`` so that ``E_{a,b}`` maps to ``e_b (x) e_a``."""
    A = _as_matrix(A)
    return A.reshape(-1, order="F").copy()


def unvectorize(v, shape: int | tuple[int, int] | None = None) -> np.ndarray:
    """Inverse of :func:`vectorize`.

    ``shape`` is ``(rows, cols)``; an int means square; ``None`` infers a square
    matrix from the length.
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    if shape is None:
        d = int(round(np.sqrt(v.size)))
        shape = (d, d)
    elif isinstance(shape, (int, np.integer)):
        shape = (int(shape), int(shape))
    if shape[0] * shape[1] != v.size:
        raise LengthMismatch(f"cannot reshape length {v.size} into {shape}")
    return v.reshape(shape, order="F").copy()


def vec_trace(v, d: int) -> complex:
    """Trace of the operator whose vectorization is ``v``."""
    v = np.asarray(v).reshape(-1)
    if v.size != d * d:
        raise LengthMismatch(f"expected length {d * d}, got {v.size}")
    return complex(v[np.arange(d) * (d + 1)].sum())


def trace_functional(d: int) -> np.ndarray:
    """Row vector ``t`` with ``t @ vectorize(A) == Tr(A)``."""
    return vectorize(np.eye(d)).real


# ---------------------------------------------------------------------------
# conversions between forms
# ---------------------------------------------------------------------------


def apply_kraus(kraus: Sequence[np.ndarray], A) -> np.ndarray:
    A = _as_matrix(A)
    return sum(K @ A @ K.conj().T for K in kraus)


def matrix_unit(rows: int, cols: int, a: int, b: int) -> np.ndarray:
    E = np.zeros((rows, cols), dtype=complex)
    E[a, b] = 1.0
    return E


def natural_from_kraus(kraus: Sequence[np.ndarray], *, atol: float = 1e-12) -> np.ndarray:
    """Natural form of ``A -> sum_i K_i A K_i^dag``.

    The closed form ``sum_i conj(K_i) (x) K_i`` is checked column by column
    against the direct action on every matrix unit.
    """
    kraus = [_as_matrix(K, "Kraus operator") for K in kraus]
    if not kraus:
        raise ShapeMismatch("empty Kraus list")
    shape = kraus[0].shape
    if any(K.shape != shape for K in kraus):
        raise ShapeMismatch("Kraus operators have different shapes")
    d_out, d_in = shape
    M = sum(np.kron(K.conj(), K) for K in kraus)
    for b in range(d_in):
        for a in range(d_in):
            col = vectorize(apply_kraus(kraus, matrix_unit(d_in, d_in, a, b)))
            if not np.allclose(M[:, b * d_in + a], col, atol=atol, rtol=0):
                raise AssertionError("natural form fails its defining relation")
    return M


def choi_from_natural(M, dim_in: int, dim_out: int) -> np.ndarray:
    """``C[(a,i),(b,j)] = M[(j,i),(b,a)]``."""
    M = _as_matrix(M, "natural form")
    if M.shape != (dim_out**2, dim_in**2):
        raise ShapeMismatch(
            f"natural form shape {M.shape} does not match dims ({dim_in}, {dim_out})"
        )
    # M4[j, i, b, a] -> C4[a, i, b, j]
    C4 = M.reshape(dim_out, dim_out, dim_in, dim_in).transpose(3, 1, 2, 0)
    return C4.reshape(dim_in * dim_out, dim_in * dim_out).copy()


def natural_from_choi(C, dim_in: int, dim_out: int) -> np.ndarray:
    C = _as_matrix(C, "Choi matrix")
    n = dim_in * dim_out
    if C.shape != (n, n):
        raise ShapeMismatch(f"Choi shape {C.shape} does not match dims ({dim_in}, {dim_out})")
    # C4[a, i, b, j] -> M4[j, i, b, a]
    M4 = C.reshape(dim_in, dim_out, dim_in, dim_out).transpose(3, 1, 2, 0)
    return M4.reshape(dim_out**2, dim_in**2).copy()


def kraus_from_choi(C, dim_in: int, dim_out: int, *, tol_cp: float = tol.TOL_CP) -> list[np.ndarray]:
    """Canonical Kraus operators from the eigendecomposition of a PSD Choi matrix."""
    C = _as_matrix(C, "Choi matrix")
    H = (C + C.conj().T) / 2
    if np.linalg.norm(C - H) > tol.TOL_HERM * max(1.0, np.linalg.norm(C)):
        raise NonHermitianInput("Choi matrix is not Hermitian; map is not CP")
    w, V = np.linalg.eigh(H)
    if w.min() < -tol_cp:
        raise ValueError(f"map is not completely positive (min Choi eigenvalue {w.min():.3g})")
    ops = []
    for lam, psi in zip(w[::-1], V[:, ::-1].T):
        if lam <= tol_cp:
            continue
        # psi[a * dim_out + i] = K[i, a] / sqrt(lam)
        ops.append(np.sqrt(lam) * psi.reshape(dim_in, dim_out).T)
    if not ops:
        ops.append(np.zeros((dim_out, dim_in), dtype=complex))
    return ops


# ---------------------------------------------------------------------------
# the channel value type
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChannelRep:
    """A linear map ``L(C^dim_in) -> L(C^dim_out)`` stored in one of three forms.

    Construct through :meth:`from_kraus`, :meth:`from_choi` or
    :meth:`from_natural`. The other forms are derived lazily and cached.
    Payload arrays are read-only.
    """

    dim_in: int
    dim_out: int
    rep: str
    data: object

    def __post_init__(self):
        if self.rep not in REPS:
            raise ValueError(f"unknown representation {self.rep!r}")
        di, do = self.dim_in, self.dim_out
        if self.rep == "kraus":
            ops = tuple(_frozen(_as_matrix(K, "Kraus operator")) for K in self.data)
            if not ops:
                raise ShapeMismatch("empty Kraus list")
            for K in ops:
                if K.shape != (do, di):
                    raise ShapeMismatch(f"Kraus operator shape {K.shape} != ({do}, {di})")
            object.__setattr__(self, "data", ops)
        else:
            A = _frozen(_as_matrix(self.data))
            want = (di * do, di * do) if self.rep == "choi" else (do * do, di * di)
            if A.shape != want:
                raise ShapeMismatch(f"{self.rep} payload shape {A.shape} != {want}")
            object.__setattr__(self, "data", A)

    @classmethod
    def from_kraus(cls, ops, *, channel: bool = False, tol_tp: float = tol.TOL_TP) -> "ChannelRep":
        """Build from Kraus operators; ``channel=True`` additionally demands TP."""
        ops = [_as_matrix(K, "Kraus operator") for K in ops]
        if not ops:
            raise ShapeMismatch("empty Kraus list")
        d_out, d_in = ops[0].shape
        ch = cls(d_in, d_out, "kraus", ops)
        if channel:
            S = sum(K.conj().T @ K for K in ops)
            if spectral_norm(S - np.eye(d_in)) > tol_tp:
                raise ValueError("Kraus operators do not satisfy sum K^dag K = I")
        return ch

    @classmethod
    def from_choi(cls, C, dim_in: int | None = None, dim_out: int | None = None) -> "ChannelRep":
        C = _as_matrix(C, "Choi matrix")
        dim_in, dim_out = _infer_dims(C.shape[0], dim_in, dim_out)
        return cls(dim_in, dim_out, "choi", C)

    @classmethod
    def from_natural(cls, M, dim_in: int | None = None, dim_out: int | None = None) -> "ChannelRep":
        M = _as_matrix(M, "natural form")
        if dim_in is None:
            dim_in = _isqrt(M.shape[1])
        if dim_out is None:
            dim_out = _isqrt(M.shape[0])
        return cls(dim_in, dim_out, "natural", M)

    @cached_property
    def natural(self) -> np.ndarray:
        if self.rep == "natural":
            return self.data
        if self.rep == "choi":
            M = natural_from_choi(self.data, self.dim_in, self.dim_out)
        else:
            M = natural_from_kraus(self.data)
        return _frozen(M)

    @cached_property
    def choi(self) -> np.ndarray:
        if self.rep == "choi":
            return self.data
        return _frozen(choi_from_natural(self.natural, self.dim_in, self.dim_out))

    @cached_property
    def kraus(self) -> tuple[np.ndarray, ...]:
        """Kraus operators; raises ``ValueError`` when the map is not CP."""
        if self.rep == "kraus":
            return self.data
        return tuple(_frozen(K) for K in kraus_from_choi(self.choi, self.dim_in, self.dim_out))

    @property
    def is_square(self) -> bool:
        return self.dim_in == self.dim_out

    def to(self, rep: str) -> "ChannelRep":
        if rep == self.rep:
            return self
        return ChannelRep(self.dim_in, self.dim_out, rep, getattr(self, rep))

    def __call__(self, A) -> np.ndarray:
        A = _as_matrix(A)
        if A.shape != (self.dim_in, self.dim_in):
            raise DimensionMismatch(f"input shape {A.shape} != ({self.dim_in}, {self.dim_in})")
        return unvectorize(self.natural @ vectorize(A), self.dim_out)

    def compose(self, other: "ChannelRep") -> "ChannelRep":
        """The map ``self o other`` (``other`` acts first)."""
        if other.dim_out != self.dim_in:
            raise DimensionMismatch("cannot compose: dimensions do not chain")
        return ChannelRep.from_natural(self.natural @ other.natural, other.dim_in, self.dim_out)

    __matmul__ = compose

    def __add__(self, other: "ChannelRep") -> "ChannelRep":
        _check_same_dims(self, other)
        return ChannelRep.from_natural(self.natural + other.natural, self.dim_in, self.dim_out)

    def __sub__(self, other: "ChannelRep") -> "ChannelRep":
        _check_same_dims(self, other)
        return ChannelRep.from_natural(self.natural - other.natural, self.dim_in, self.dim_out)

    def __mul__(self, c) -> "ChannelRep":
        return ChannelRep.from_natural(c * self.natural, self.dim_in, self.dim_out)

    __rmul__ = __mul__

    def adjoint(self) -> "ChannelRep":
        """Hilbert-Schmidt adjoint; for a unitary channel this is its inverse."""
        return ChannelRep.from_natural(self.natural.conj().T, self.dim_out, self.dim_in)

    def __repr__(self):
        return f"ChannelRep(dim_in={self.dim_in}, dim_out={self.dim_out}, rep={self.rep!r})"


def _check_same_dims(a: ChannelRep, b: ChannelRep):
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise DimensionMismatch("maps have different dimensions")


def _isqrt(n: int) -> int:
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise ShapeMismatch(f"{n} is not a perfect square")
    return d


def _infer_dims(n: int, dim_in, dim_out) -> tuple[int, int]:
    if dim_in is None and dim_out is None:
        d = _isqrt(n)
        return d, d
    if dim_in is None:
        dim_in = n // dim_out
    if dim_out is None:
        dim_out = n // dim_in
    if dim_in * dim_out != n:
        raise ShapeMismatch(f"dims ({dim_in}, {dim_out}) incompatible with Choi size {n}")
    return dim_in, dim_out


def identity_channel(d: int) -> ChannelRep:
    return ChannelRep.from_natural(np.eye(d * d), d, d)


def unitary_channel(U) -> ChannelRep:
    """``A -> U A U^dag``."""
    U = _as_matrix(U, "unitary")
    return ChannelRep.from_kraus([U])


def as_channel(ch) -> ChannelRep:
    if isinstance(ch, ChannelRep):
        return ch
    return ChannelRep.from_natural(ch)


# ---------------------------------------------------------------------------
# property checks
# ---------------------------------------------------------------------------


def partial_trace(X, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Partial trace of a bipartite operator, keeping subsystem ``keep`` (0 or 1)."""
    d0, d1 = dims
    X4 = np.asarray(X).reshape(d0, d1, d0, d1)
    if keep == 0:
        return np.einsum("ijkj->ik", X4)
    return np.einsum("ijil->jl", X4)


class PropertyVerdict(NamedTuple):
    is_cp: bool
    is_tp: bool
    is_hp: bool
    min_choi_eigenvalue: float
    tp_residual: float
    spectral_radius: float | None
    herm_residual: float

    def as_dict(self) -> dict:
        return self._asdict()


def check_properties(
    ch: ChannelRep,
    *,
    tol_cp: float = tol.TOL_CP,
    tol_tp: float = tol.TOL_TP,
    tol_herm: float = tol.TOL_HERM,
) -> PropertyVerdict:
    """CP / TP / HP verdict with the residuals behind it.

    TP is judged from the Choi matrix with the output factor traced out; the
    spectral radius is reported only for square maps.
    """
    C = np.asarray(ch.choi)
    herm_res = float(np.linalg.norm(C - C.conj().T, 2))
    is_hp = herm_res <= tol_herm
    min_eig = float(np.linalg.eigvalsh((C + C.conj().T) / 2).min())
    is_cp = is_hp and min_eig >= -tol_cp
    red = partial_trace(C, (ch.dim_in, ch.dim_out), keep=0)
    tp_res = float(np.linalg.norm(red - np.eye(ch.dim_in), 2))
    radius = None
    if ch.is_square:
        radius = float(np.abs(np.linalg.eigvals(ch.natural)).max())
    return PropertyVerdict(is_cp, tp_res <= tol_tp, is_hp, min_eig, tp_res, radius, herm_res)


def natural_tp_residual(ch: ChannelRep) -> float:
    """TP residual measured on the natural form: ``||t_out M - t_in||``."""
    t_in, t_out = trace_functional(ch.dim_in), trace_functional(ch.dim_out)
    return float(np.linalg.norm(t_out @ ch.natural - t_in))


def is_unitary_channel(ch: ChannelRep, atol: float = 1e-9) -> bool:
    if not ch.is_square:
        return False
    M = np.asarray(ch.natural)
    if np.linalg.norm(M.conj().T @ M - np.eye(M.shape[0]), 2) > atol:
        return False
    v = check_properties(ch, tol_cp=atol, tol_tp=atol, tol_herm=atol)
    return v.is_cp and v.is_tp


# ---------------------------------------------------------------------------
# norms and state metrics
# ---------------------------------------------------------------------------


def frobenius_norm(A) -> float:
    return float(np.linalg.norm(np.asarray(A), "fro"))


def trace_norm(A) -> float:
    return float(np.linalg.svd(np.asarray(A), compute_uv=False).sum())


def spectral_norm(A) -> float:
    A = np.asarray(A)
    if A.ndim == 1:
        return float(np.linalg.norm(A))
    return float(np.linalg.svd(A, compute_uv=False).max(initial=0.0))


def sigma_min(A) -> float:
    """Smallest singular value, i.e. ``inf_{|x|=1} |A x|`` for square ``A``."""
    s = np.linalg.svd(np.asarray(A), compute_uv=False)
    return float(s.min()) if s.size else 0.0


def trace_distance(rho1, rho2) -> float:
    return 0.5 * trace_norm(np.asarray(rho1) - np.asarray(rho2))


def is_hermitian(A, atol: float = tol.TOL_HERM) -> bool:
    A = np.asarray(A)
    return A.shape[0] == A.shape[1] and np.linalg.norm(A - A.conj().T, 2) <= atol


def is_state(rho, *, tol_herm=tol.TOL_HERM, tol_trace=tol.TOL_TP, tol_psd=tol.TOL_PSD) -> bool:
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol_herm):
        return False
    if abs(np.trace(rho) - 1) > tol_trace:
        return False
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -tol_psd


def _psd_sqrt(H: np.ndarray) -> tuple[np.ndarray, bool]:
    w, V = np.linalg.eigh(H)
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T, bool(w.min() >= -tol.TOL_PSD)


class Fidelity(NamedTuple):
    value: float
    valid: bool


def fidelity(rho1, rho2, *, tol_herm: float = tol.TOL_HERM, tol_psd: float = tol.TOL_PSD) -> Fidelity:
    """Root fidelity ``tr sqrt(sqrt(rho1) rho2 sqrt(rho1))``.

    Inputs only need to be Hermitian. Negative eigenvalues are clipped before
    taking square roots; ``valid`` is False whenever an input had an
    eigenvalue below ``-tol_psd``. No normalization is applied, so non-states
    can yield values above one.
    """
    r1, r2 = _as_matrix(rho1), _as_matrix(rho2)
    if r1.shape != r2.shape:
        raise DimensionMismatch("fidelity arguments differ in shape")
    for r in (r1, r2):
        if not is_hermitian(r, tol_herm):
            raise NonHermitianInput("fidelity needs Hermitian inputs")
    h1, h2 = (r1 + r1.conj().T) / 2, (r2 + r2.conj().T) / 2
    valid = bool(np.linalg.eigvalsh(h1).min() >= -tol_psd and np.linalg.eigvalsh(h2).min() >= -tol_psd)
    s1, _ = _psd_sqrt(h1)
    w2, V2 = np.linalg.eigh(h2)
    h2c = (V2 * np.clip(w2, 0, None)) @ V2.conj().T
    inner = s1 @ h2c @ s1
    ev = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    return Fidelity(float(np.sqrt(np.clip(ev, 0, None)).sum()), valid)


def squared_fidelity(rho1, rho2, **kw) -> Fidelity:
    """``fidelity(...)**2`` (the Uhlmann-Jozsa convention)."""
    f = fidelity(rho1, rho2, **kw)
    return Fidelity(f.value**2, f.valid)


def expectation(rho, A) -> float:
    return float(np.real(np.trace(np.asarray(A) @ np.asarray(rho))))
