"""Classical baseline: binary symmetric channel and the 3-bit repetition code."""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

import numpy as np

from . import tolerances as tol
from .errors import LengthNotMultipleOf3, ParamOutOfRange, SingularChannel
from .matrep import sigma_min
from .protocols import check_stochastic


def bsc(p: float) -> np.ndarray:
    """Column-stochastic matrix ``[[1-p, p], [p, 1-p]]``."""
    if not 0 <= p <= 1:
        raise ParamOutOfRange(f"flip probability must lie in [0, 1], got {p}")
    return np.array([[1 - p, p], [p, 1 - p]], dtype=float)


def _bits(s) -> np.ndarray:
    if isinstance(s, str):
        s = [int(ch) for ch in s]
    b = np.asarray(s, dtype=np.uint8)
    if b.ndim != 1 or np.any(b > 1):
        raise ValueError("bit strings contain only 0 and 1")
    return b


def repetition_encode(bits) -> np.ndarray:
    return np.repeat(_bits(bits), 3)


def repetition_decode(received) -> np.ndarray:
    """Majority vote over consecutive triples."""
    r = _bits(received)
    if r.size % 3:
        raise LengthNotMultipleOf3(f"received length {r.size} is not a multiple of 3")
    return (r.reshape(-1, 3).sum(axis=1) >= 2).astype(np.uint8)


def transmit(bits, p: float, seed=None) -> np.ndarray:
    """Send ``bits`` through independent BSC uses."""
    b = _bits(bits)
    if not 0 <= p <= 1:
        raise ParamOutOfRange(f"flip probability must lie in [0, 1], got {p}")
    flips = np.random.default_rng(seed).random(b.size) < p
    return b ^ flips.astype(np.uint8)


def repetition_exact_error(p: float) -> float:
    """Logical error probability by enumerating the 8 flip patterns."""
    if not 0 <= p <= 1:
        raise ParamOutOfRange(f"flip probability must lie in [0, 1], got {p}")
    err = 0.0
    for pattern in product((0, 1), repeat=3):
        k = sum(pattern)
        if k >= 2:
            err += p**k * (1 - p) ** (3 - k)
    return err


class RepetitionErrorRate(NamedTuple):
    empirical: float
    exact: float
    paper_value: float  # leading-order 3 p^2 (1 - p), without the triple flip
    stderr: float
    n_trials: int


def repetition_error_rate(p: float, n_trials: int = 1_000_000, seed=None) -> RepetitionErrorRate:
    """Monte-Carlo logical error rate of the repetition code against the exact value."""
    exact = repetition_exact_error(p)
    rng = np.random.default_rng(seed)
    flips = (rng.random((n_trials, 3)) < p).sum(axis=1)
    emp = float((flips >= 2).mean())
    stderr = float(np.sqrt(max(exact * (1 - exact), 0.0) / n_trials))
    return RepetitionErrorRate(emp, exact, 3 * p**2 * (1 - p), stderr, n_trials)


class InvertedDistribution(NamedTuple):
    distribution: np.ndarray
    has_negative: bool


def invert_distribution(N, observed, *, tol_zero: float = tol.TOL_ZERO) -> InvertedDistribution:
    """``N^-1 observed``; finite-sample input can produce negative entries."""
    N = check_stochastic(N)
    if sigma_min(N) <= tol_zero:
        raise SingularChannel("stochastic matrix is not invertible")
    v = np.linalg.solve(N, np.asarray(observed, dtype=float))
    return InvertedDistribution(v, bool(np.any(v < 0)))


def empirical_distribution(bits, n_outcomes: int = 2) -> np.ndarray:
    return np.bincount(_bits(bits), minlength=n_outcomes) / len(bits)


def bitwise_strategy_agreement(p: float) -> dict[str, float]:
    """Per-bit agreement probability of the two deterministic post-processings."""
    if not 0 <= p <= 1:
        raise ParamOutOfRange(f"flip probability must lie in [0, 1], got {p}")
    return {"keep": 1 - p, "flip": p}
