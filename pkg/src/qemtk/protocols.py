"""Desk-scale versions of common error-mitigation protocols.

Zero-noise extrapolation, quasiprobability decomposition and sampling,
readout-matrix inversion and virtual distillation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import tolerances as tol
from .errors import DegenerateScales, ParamOutOfRange, SingularReadoutMatrix, TargetOutsideSpan
from .matrep import ChannelRep, as_channel, sigma_min

# ---------------------------------------------------------------------------
# extrapolation
# ---------------------------------------------------------------------------


def richardson_weights(scales: Sequence[float]) -> np.ndarray:
    """``r_i = prod_{j != i} s_j / (s_j - s_i)``; these cancel powers 1..k-1 of the scale."""
    s = np.asarray(scales, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise DegenerateScales("need at least one scale factor")
    if np.any(s <= 0):
        raise DegenerateScales("scale factors must be positive")
    if np.unique(s).size != s.size:
        raise DegenerateScales("scale factors must be distinct")
    r = np.ones_like(s)
    for i in range(s.size):
        for j in range(s.size):
            if j != i:
                r[i] *= s[j] / (s[j] - s[i])
    return r


def richardson_extrapolate(scales, values, fit: str = "richardson") -> tuple[float, np.ndarray]:
    """Zero-noise estimate from values measured at amplified noise ``scales``.

    ``fit`` selects the model: ``richardson`` (polynomial through all points),
    ``linear`` (least-squares line) or ``exp`` (least-squares line through
    ``log|value|``, all values sharing one sign). Returns the estimate and the
    weights applied to the values (to their logarithms for ``exp``).
    """
    s = np.asarray(scales, dtype=float)
    y = np.asarray(values, dtype=float)
    if s.shape != y.shape:
        raise ValueError("scales and values differ in length")
    r = richardson_weights(s)
    if fit == "richardson":
        return float(r @ y), r
    if fit in ("linear", "exp"):
        if s.size < 2:
            raise DegenerateScales(f"{fit} fit needs at least two points")
        V = np.column_stack([np.ones_like(s), s])
        w = np.linalg.pinv(V)[0]
        if fit == "linear":
            return float(w @ y), w
        sign = np.sign(y)
        if np.any(sign == 0) or np.unique(sign).size != 1:
            raise ValueError("exponential fit needs nonzero values of one sign")
        return float(sign[0] * np.exp(w @ np.log(np.abs(y)))), w
    raise ValueError(f"unknown fit {fit!r}")


# ---------------------------------------------------------------------------
# quasiprobability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuasiprobDecomposition:
    coefficients: np.ndarray
    basis: tuple[ChannelRep, ...]
    residual: float

    @property
    def cost(self) -> float:
        """``tau = sum |a_i|``."""
        return float(np.abs(self.coefficients).sum())

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.coefficients) / self.cost

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.coefficients)


def quasiprob_decompose(target, basis: Sequence, *, tol_span: float = tol.TOL_SPAN) -> QuasiprobDecomposition:
    """Real coefficients ``a`` with ``v(target) = sum_i a_i v(basis_i)`` by least squares."""
    target = as_channel(target)
    basis = tuple(as_channel(b) for b in basis)
    A = np.column_stack([np.asarray(b.natural).ravel() for b in basis])
    b = np.asarray(target.natural).ravel()
    Ar = np.vstack([A.real, A.imag])
    br = np.concatenate([b.real, b.imag])
    a, *_ = np.linalg.lstsq(Ar, br, rcond=None)
    resid = float(np.linalg.norm(Ar @ a - br))
    if resid > tol_span * max(1.0, float(np.linalg.norm(br))):
        raise TargetOutsideSpan(f"target lies outside the span of the basis (residual {resid:.3g})")
    return QuasiprobDecomposition(a, basis, resid)


class QuasiprobEstimate(NamedTuple):
    estimate: float
    stderr: float
    samples: np.ndarray


def quasiprob_estimate(dec: QuasiprobDecomposition, expectations, n_samples: int, seed=None) -> QuasiprobEstimate:
    """Monte-Carlo estimate of ``sum_i a_i <A>_i`` from single-shot +-1 outcomes.

    Each sample picks basis circuit ``i`` with probability ``|a_i| / tau``,
    draws one +-1 outcome with mean ``<A>_i`` and records
    ``tau * sign(a_i) * outcome``.
    """
    e = np.asarray(expectations, dtype=float)
    if e.shape != dec.coefficients.shape:
        raise ValueError("need one expectation value per basis element")
    if np.any(np.abs(e) > 1 + 1e-12):
        raise ParamOutOfRange("single-shot sampling needs expectations in [-1, 1]")
    rng = np.random.default_rng(seed)
    idx = rng.choice(e.size, size=n_samples, p=dec.probabilities)
    outcome = np.where(rng.random(n_samples) < (1 + e[idx]) / 2, 1.0, -1.0)
    samples = dec.cost * dec.signs[idx] * outcome
    return QuasiprobEstimate(float(samples.mean()), float(samples.std(ddof=1) / np.sqrt(n_samples)), samples)


# ---------------------------------------------------------------------------
# readout
# ---------------------------------------------------------------------------


def check_stochastic(T, atol: float = 1e-9) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError("stochastic matrix must be square")
    if np.any(T < -atol) or np.any(np.abs(T.sum(axis=0) - 1) > atol):
        raise ValueError("matrix is not column-stochastic")
    return T


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-and-threshold)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    k = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


class ReadoutResult(NamedTuple):
    distribution: np.ndarray
    has_negative: bool
    projected: bool


def readout_mitigate(T, p_noisy, *, project: bool = False, tol_zero: float = tol.TOL_ZERO) -> ReadoutResult:
    """Solve ``T p = p_noisy``; negative entries are flagged and optionally projected away."""
    T = check_stochastic(T)
    p = np.asarray(p_noisy, dtype=float)
    if sigma_min(T) <= tol_zero:
        raise SingularReadoutMatrix("readout matrix is singular")
    q = np.linalg.solve(T, p)
    neg = bool(np.any(q < 0))
    if project and neg:
        return ReadoutResult(project_to_simplex(q), True, True)
    return ReadoutResult(q, neg, False)


def symmetric_confusion(q: float, n_outcomes: int = 2) -> np.ndarray:
    """Each outcome is misread as each other one with probability ``q / (K - 1)``."""
    K = n_outcomes
    return (1 - q) * np.eye(K) + q / (K - 1) * (np.ones((K, K)) - np.eye(K))


# ---------------------------------------------------------------------------
# virtual distillation
# ---------------------------------------------------------------------------


def virtual_distill(rho, m: int) -> np.ndarray:
    """``rho^m / tr(rho^m)``. The maximally mixed state is a fixed point."""
    if m < 1:
        raise ParamOutOfRange("number of copies must be at least 1")
    rho = np.asarray(rho, dtype=complex)
    P = np.linalg.matrix_power(rho, m)
    tr = np.trace(P).real
    if tr <= tol.TOL_ZERO:
        raise ValueError("tr(rho^m) vanishes")
    return P / tr


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.trace(rho @ rho).real)
