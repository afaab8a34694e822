"""Concrete channels: Pauli family, dilations, worked-example fixtures, random draws."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NonUnitaryInput, ParamOutOfRange, ShapeMismatch, UnknownFixture
from .matrep import ChannelRep

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@dataclass(frozen=True)
class PauliChannelParams:
    """Weights of I, X, Y; the Z weight is ``1 - p1 - p2 - p3``."""

    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        for w in self.weights:
            if not -1e-12 <= w <= 1 + 1e-12:
                raise ParamOutOfRange(f"Pauli weights must lie in [0, 1], got {self.weights}")

    @property
    def p4(self) -> float:
        return 1.0 - self.p1 - self.p2 - self.p3

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return (self.p1, self.p2, self.p3, self.p4)


def pauli_channel(p1, p2=None, p3=None) -> ChannelRep:
    """Kraus set ``{sqrt(p1) I, sqrt(p2) X, sqrt(p3) Y, sqrt(p4) Z}``."""
    params = p1 if isinstance(p1, PauliChannelParams) else PauliChannelParams(p1, p2, p3)
    ops = [np.sqrt(max(w, 0.0)) * P for w, P in zip(params.weights, PAULIS.values())]
    return ChannelRep.from_kraus(ops, channel=True)


def depolarizing(lam: float) -> ChannelRep:
    if not 0 <= lam <= 1:
        raise ParamOutOfRange(f"depolarizing strength must lie in [0, 1], got {lam}")
    return pauli_channel(1 - 3 * lam / 4, lam / 4, lam / 4)


def phase_damping(gamma: float) -> ChannelRep:
    if not 0 <= gamma <= 1:
        raise ParamOutOfRange(f"phase damping parameter must lie in [0, 1], got {gamma}")
    K0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    K1 = np.array([[0, 0], [0, np.sqrt(gamma)]], dtype=complex)
    return ChannelRep.from_kraus([K0, K1], channel=True)


def amplitude_damping(gamma: float) -> ChannelRep:
    """Decay ``|1> -> |0>`` with probability ``gamma``; non-unital for ``gamma > 0``."""
    if not 0 <= gamma <= 1:
        raise ParamOutOfRange(f"damping parameter must lie in [0, 1], got {gamma}")
    K0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    K1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return ChannelRep.from_kraus([K0, K1], channel=True)


def channel_from_dilation(U, sigma_env, traced: int = 1, *, atol: float = 1e-9) -> ChannelRep:
    """Reduced channel ``rho -> Tr_env[U (rho (x) sigma_env) U^dag]``.

    ``traced`` is the position of the environment factor in the joint space
    (1: system (x) env, 0: env (x) system). Kraus operators are
    ``sqrt(q_k) <l|_env U |k>_env`` over an eigenbasis ``{q_k, |k>}`` of
    ``sigma_env``.
    """
    U = np.asarray(U, dtype=complex)
    sigma = np.asarray(sigma_env, dtype=complex)
    d_env = sigma.shape[0]
    n = U.shape[0]
    if U.shape != (n, n) or n % d_env:
        raise ShapeMismatch(f"unitary of shape {U.shape} does not factor with env dim {d_env}")
    if np.linalg.norm(U.conj().T @ U - np.eye(n), 2) > atol:
        raise NonUnitaryInput("dilation operator is not unitary")
    d_sys = n // d_env
    q, W = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    if traced == 1:
        U4 = U.reshape(d_sys, d_env, d_sys, d_env)  # [i, l, a, k]
        blocks = lambda l, k: U4[:, l, :, k]  # noqa: E731
    elif traced == 0:
        U4 = U.reshape(d_env, d_sys, d_env, d_sys)  # [l, i, k, a]
        blocks = lambda l, k: U4[l, :, k, :]  # noqa: E731
    else:
        raise ValueError("traced must be 0 or 1")
    ops = []
    for qk, wk in zip(q, W.T):
        if qk <= 1e-14:
            continue
        for l in range(d_env):
            # <l| U |w_k> on the environment factor
            K = sum(wk[k] * blocks(l, k) for k in range(d_env))
            ops.append(np.sqrt(qk) * K)
    return ChannelRep.from_kraus(ops, channel=True)


def cnot_dephasing_channel() -> ChannelRep:
    """Channel on the control qubit of a CNOT whose target starts in ``|0>``."""
    return channel_from_dilation(CNOT, np.diag([1.0, 0.0]), traced=1)


# ---------------------------------------------------------------------------
# worked-example fixtures (exact rationals)
# ---------------------------------------------------------------------------


def _c(re="0", im="0") -> tuple[Fraction, Fraction]:
    return Fraction(re), Fraction(im)


def _real(rows, scale="1") -> list[list[tuple[Fraction, Fraction]]]:
    s = Fraction(scale)
    return [[(Fraction(x) * s, Fraction(0)) for x in row] for row in rows]


_FIXTURES = {
    "example1": ("choi", [
        [_c("3/4"), _c(), _c(im="-1/8"), _c("1/2", "1/8")],
        [_c(), _c("1/4"), _c(im="-1/8"), _c(im="1/8")],
        [_c(im="1/8"), _c(im="1/8"), _c("1/4"), _c()],
        [_c("1/2", "-1/8"), _c(im="-1/8"), _c(), _c("3/4")],
    ]),
    "example1_natural": ("natural", [
        [_c("3/4"), _c(im="1/8"), _c(im="-1/8"), _c("1/4")],
        [_c(), _c("1/2", "-1/8"), _c(im="-1/8"), _c()],
        [_c(), _c(im="1/8"), _c("1/2", "1/8"), _c()],
        [_c("1/4"), _c(im="-1/8"), _c(im="1/8"), _c("3/4")],
    ]),
    "example1_inverse": ("natural", [
        [_c("3/2"), _c("1/4", "-1/2"), _c("1/4", "1/2"), _c("-1/2")],
        [_c(), _c("2", "1/2"), _c(im="1/2"), _c()],
        [_c(), _c(im="-1/2"), _c("2", "-1/2"), _c()],
        [_c("-1/2"), _c("-1/4", "1/2"), _c("-1/4", "-1/2"), _c("3/2")],
    ]),
    "example1_inverse_choi": ("choi", [
        [_c("3/2"), _c(), _c("1/4", "1/2"), _c("2", "-1/2")],
        [_c(), _c("-1/2"), _c(im="1/2"), _c("-1/4", "-1/2")],
        [_c("1/4", "-1/2"), _c(im="-1/2"), _c("-1/2"), _c()],
        [_c("2", "1/2"), _c("-1/4", "1/2"), _c(), _c("3/2")],
    ]),
    "example2": ("choi", _real(
        [[8, 0, 1, 6], [0, 12, 2, -1], [1, 2, 8, 0], [6, -1, 0, 12]], "1/20")),
    "example2_natural": ("natural", _real(
        [[8, 1, 1, 8], [0, 6, 2, 0], [0, 2, 6, 0], [12, -1, -1, 12]], "1/20")),
    "example2_drazin": ("natural", _real([
        ["2/5", "5/16", "5/16", "2/5"],
        [0, "15/4", "-5/4", 0],
        [0, "-5/4", "15/4", 0],
        ["3/5", "-5/16", "-5/16", "3/5"],
    ])),
    "example2_drazin_choi": ("choi", _real([
        ["2/5", 0, "5/16", "15/4"],
        [0, "3/5", "-5/4", "-5/16"],
        ["5/16", "-5/4", "2/5", 0],
        ["15/4", "-5/16", 0, "3/5"],
    ])),
    "example2_moore_penrose": ("natural", _real([
        ["115/294", "10/441", "10/441", "505/882"],
        ["50/147", "3245/882", "-1165/882", "-100/441"],
        ["50/147", "-1165/882", "3245/882", "-100/441"],
        ["115/294", "10/441", "10/441", "505/882"],
    ])),
    "example2_moore_penrose_choi": ("choi", _real([
        ["115/294", "50/147", "10/441", "3245/882"],
        ["50/147", "115/294", "-1165/882", "10/441"],
        ["10/441", "-1165/882", "505/882", "-100/441"],
        ["3245/882", "10/441", "-100/441", "505/882"],
    ])),
    "mismatch_noise": ("natural", _real(
        [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]])),
    "mismatch_depolarizing": ("natural", _real(
        [[5, 0, 0, 1], [0, 4, 0, 0], [0, 0, 4, 0], [1, 0, 0, 5]], "1/6")),
    "mismatch_depolarizing_inverse": ("natural", _real(
        [[5, 0, 0, -1], [0, 6, 0, 0], [0, 0, 6, 0], [-1, 0, 0, 5]], "1/4")),
    "mismatch_recovered": ("natural", _real(
        [[5, 0, 0, -1], [0, 0, 0, 0], [0, 0, 0, 0], [-1, 0, 0, 5]], "1/4")),
}

FIXTURE_NAMES = tuple(_FIXTURES)


def fixture_exact(name: str) -> tuple[str, list[list[tuple[Fraction, Fraction]]]]:
    """``(rep, rows)`` with every entry an exact ``(re, im)`` pair of Fractions."""
    try:
        return _FIXTURES[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}") from None


def fixture_matrix(name: str) -> np.ndarray:
    _, rows = fixture_exact(name)
    return np.array([[float(re) + 1j * float(im) for re, im in row] for row in rows])


def fixture(name: str) -> ChannelRep:
    rep, _ = fixture_exact(name)
    M = fixture_matrix(name)
    if rep == "choi":
        return ChannelRep.from_choi(M, 2, 2)
    return ChannelRep.from_natural(M, 2, 2)


# ---------------------------------------------------------------------------
# random draws
# ---------------------------------------------------------------------------


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    Qm, R = np.linalg.qr(_ginibre(rng, rows, cols))
    phases = np.diag(R) / np.abs(np.diag(R))
    return Qm * phases


def haar_unitary(d: int, seed=None) -> np.ndarray:
    return haar_isometry(d, d, seed)


def random_channel(d: int, rank: int = 2, seed=None) -> ChannelRep:
    """CPTP map with ``rank`` Kraus operators cut from a Haar isometry."""
    if d < 2 or rank < 1:
        raise ParamOutOfRange("need d >= 2 and rank >= 1")
    V = haar_isometry(d * rank, d, seed)
    return ChannelRep.from_kraus([V[i * d:(i + 1) * d] for i in range(rank)], channel=True)


def random_state(d: int, kind: str = "mixed-trace-induced", seed=None) -> np.ndarray:
    """Pure (Haar) or trace-induced mixed state with environment dimension ``d``."""
    rng = np.random.default_rng(seed)
    if kind == "pure-uniform":
        psi = _ginibre(rng, d, 1)[:, 0]
        psi /= np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    if kind == "mixed-trace-induced":
        G = _ginibre(rng, d, d)
        rho = G @ G.conj().T
        return rho / np.trace(rho).real
    raise ValueError(f"unknown state kind {kind!r}")


def random_hermitian(d: int, seed=None, *, frobenius: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    G = _ginibre(rng, d, d)
    H = (G + G.conj().T) / 2
    return frobenius * H / np.linalg.norm(H)


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return np.array([np.trace(P @ rho).real for P in (X, Y, Z)])


def state_from_bloch(r) -> np.ndarray:
    x, y, z = r
    return (I2 + x * X + y * Y + z * Z) / 2


# ---------------------------------------------------------------------------
# random trace-preserving maps with prescribed Jordan structure
# ---------------------------------------------------------------------------

TP_MAP_KINDS = ("channel", "mixture", "projected", "jordan")


def _trace_adapted_basis(rng, d: int, trace_one: set[int]) -> np.ndarray:
    """Random basis of vectorized operators; columns in ``trace_one`` have trace 1, the rest 0."""
    n = d * d
    t = np.eye(d, dtype=complex).reshape(-1, order="F")
    Q = haar_unitary(n, rng) @ (np.eye(n) + 0.3 * _ginibre(rng, n, n) / np.sqrt(n))
    Q -= np.outer(t, t @ Q) / d
    for j in trace_one:
        Q[:, j] += t / d
    return Q


def tp_map_from_jordan(blocks, d: int, seed=None) -> ChannelRep:
    """TP map ``Q J Q^-1`` with Jordan ``blocks`` given as ``(eigenvalue, size)``.

    At least one block must have eigenvalue 1. The top vector of the first
    such chain carries trace one and every other basis vector is traceless,
    which makes the trace functional a left eigenvector with eigenvalue 1.
    """
    rng = np.random.default_rng(seed)
    n = d * d
    if sum(k for _, k in blocks) != n:
        raise ShapeMismatch(f"block sizes must add up to {n}")
    ones = [i for i, (lam, _) in enumerate(blocks) if lam == 1]
    if not ones:
        raise ParamOutOfRange("a block with eigenvalue 1 is required")
    top = sum(k for _, k in blocks[: ones[0] + 1]) - 1
    Q = _trace_adapted_basis(rng, d, {top})
    J = np.zeros((n, n), dtype=complex)
    i = 0
    for lam, k in blocks:
        J[i:i + k, i:i + k] = lam * np.eye(k) + np.eye(k, k=1)
        i += k
    return ChannelRep.from_natural(Q @ J @ np.linalg.inv(Q), d, d)


def _random_blocks(rng, n: int) -> list[tuple[complex, int]]:
    blocks: list[tuple[complex, int]] = [(1, int(rng.integers(1, 3)))]
    left = n - blocks[0][1]
    while left:
        k = int(min(left, rng.integers(1, 3)))
        u = rng.random()
        if u < 0.3:
            lam = 0
        else:
            lam = rng.uniform(0.2, 1.0) * np.exp(2j * np.pi * rng.random())
            if rng.random() < 0.3:
                lam = abs(lam) * rng.choice([-1.0, 1.0])
        blocks.append((lam, k))
        left -= k
    return blocks


def random_tp_map(d: int, kind: str = "jordan", seed=None) -> ChannelRep:
    """Random trace-preserving map of one of :data:`TP_MAP_KINDS`.

    ``channel`` is a random CPTP channel, ``mixture`` a convex mixture of a
    channel and a Jordan-structured map, ``projected`` a rank-deficient TP
    projector composed with a channel, ``jordan`` a map with random zero,
    defective and rotating blocks.
    """
    rng = np.random.default_rng(seed)
    n = d * d
    if kind == "channel":
        return random_channel(d, int(rng.integers(1, d + 2)), rng)
    if kind == "jordan":
        return tp_map_from_jordan(_random_blocks(rng, n), d, rng)
    if kind == "mixture":
        w = rng.random()
        a = random_channel(d, int(rng.integers(1, d + 2)), rng).natural
        b = tp_map_from_jordan(_random_blocks(rng, n), d, rng).natural
        return ChannelRep.from_natural(w * a + (1 - w) * b, d, d)
    if kind == "projected":
        r = int(rng.integers(1, n))
        P = tp_map_from_jordan([(1, 1)] + [(1 if i < r - 1 else 0, 1) for i in range(n - 1)], d, rng)
        ch = random_channel(d, int(rng.integers(1, d + 2)), rng)
        return ChannelRep.from_natural(P.natural @ ch.natural, d, d)
    raise ValueError(f"unknown TP map kind {kind!r}")
