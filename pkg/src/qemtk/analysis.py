"""Error analysis for inverse-based mitigation under imperfect noise estimates.

Notation: ``R`` is the reversal built from the true noise, ``R~`` the one built
from the estimates, ``dN = R~ - R`` and ``dN1`` its first-order part (one
inverse error per term). ``U`` is the ideal circuit ``U_n...1``.

Matrix norms are spectral (induced 2-norm), vector norms Euclidean, so
``||v(rho)||`` is the Frobenius norm of ``rho``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import tolerances as tol
from .circuits import (
    CircuitLayer,
    LayeredCircuit,
    em_output,
    ideal_output,
    ideal_unitary,
    noisy_output,
    reversal,
)
from .errors import (
    InvalidFirstOrderState,
    NonInvertibleChannel,
    NonInvertibleNoise,
    PostconditionFailed,
)
from .inverses import exact_inverse
from .matrep import (
    ChannelRep,
    fidelity,
    frobenius_norm,
    is_hermitian,
    sigma_min,
    spectral_norm,
    squared_fidelity,
    trace_distance,
    unitary_channel,
    unvectorize,
    vectorize,
)
from .noisemodels import PAULIS, PauliChannelParams, amplitude_damping, depolarizing, haar_unitary, pauli_channel
from .noisemodels import random_channel, random_hermitian, random_state

# ---------------------------------------------------------------------------
# deltas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaReport:
    """Natural-form differences between estimated and true quantities."""

    delta_inverse: tuple[np.ndarray, ...]  # N~_i^-1 - N_i^-1
    delta_noise: tuple[np.ndarray, ...]  # N~_i - N_i
    estimated_inverse: tuple[np.ndarray, ...]  # N~_i^-1
    identity_residuals: tuple[float, ...]
    reversal_true: np.ndarray
    reversal_estimated: np.ndarray
    total: np.ndarray  # v(R~) - v(R)
    first_order: np.ndarray

    @property
    def second_order_residual(self) -> float:
        return spectral_norm(self.total - self.first_order)


def _inverse_or_raise(ch: ChannelRep, what: str) -> np.ndarray:
    try:
        return np.asarray(exact_inverse(ch).natural)
    except NonInvertibleChannel as exc:
        raise NonInvertibleNoise(f"{what} noise is not invertible") from exc


def delta_report(c: LayeredCircuit, *, tol_identity: float = 1e-9) -> DeltaReport:
    true_inv = [_inverse_or_raise(layer.true_noise, "true") for layer in c.layers]
    est_inv = [_inverse_or_raise(layer.estimated_noise, "estimated") for layer in c.layers]
    d_inv = [e - t for e, t in zip(est_inv, true_inv)]
    d_noise = [np.asarray(layer.estimated_noise.natural - layer.true_noise.natural) for layer in c.layers]
    resid = []
    for layer, dn, ei, di in zip(c.layers, d_noise, est_inv, d_inv):
        r = spectral_norm(dn @ ei + layer.true_noise.natural @ di)
        if r > tol_identity * max(1.0, spectral_norm(ei), spectral_norm(di)):
            raise PostconditionFailed(f"delta identity violated by {r:.3g}")
        resid.append(r)
    adj = [np.asarray(layer.ideal.adjoint().natural) for layer in c.layers]

    def chain(factors):
        # v(U_1^dag) v(F_1) v(U_2^dag) v(F_2) ... v(U_n^dag) v(F_n)
        M = np.eye(adj[0].shape[0], dtype=complex)
        for a, f in zip(adj, factors):
            M = M @ a @ f
        return M

    R = chain(true_inv)
    Rt = chain(est_inv)
    first = sum(chain(est_inv[:i] + [d_inv[i]] + est_inv[i + 1:]) for i in range(len(c.layers)))
    return DeltaReport(tuple(d_inv), tuple(d_noise), tuple(est_inv), tuple(resid), R, Rt, Rt - R, first)


def layerwise_bound(c: LayeredCircuit, report: DeltaReport) -> float:
    """Product-of-norms bound on ``||v(dN1)||``."""
    adj = np.prod([spectral_norm(layer.ideal.adjoint().natural) for layer in c.layers])
    est = [spectral_norm(e) for e in report.estimated_inverse]
    total = 0.0
    for i, di in enumerate(report.delta_inverse):
        total += spectral_norm(di) * float(np.prod(est[:i] + est[i + 1:]))
    return float(adj * total)


# ---------------------------------------------------------------------------
# fidelity sandwich
# ---------------------------------------------------------------------------


class FvdGCheck(NamedTuple):
    lower: float
    fidelity: float
    upper: float
    holds: bool


def fuchs_van_de_graaf(rho1, rho2, atol: float = 1e-9) -> FvdGCheck:
    """``(1-D)^2 <= F <= 1 - D^2`` for the squared fidelity ``F``."""
    D = trace_distance(rho1, rho2)
    F = squared_fidelity(rho1, rho2).value
    lo, hi = (1 - D) ** 2, 1 - D**2
    return FvdGCheck(lo, F, hi, lo - atol <= F <= hi + atol)


@dataclass(frozen=True)
class AnalysisReport:
    F_first_order: float  # squared fidelity F(rho_ideal + drho1, rho_ideal)
    F_first_order_root: float
    first_order_valid: bool
    F_main_text: float  # squared F(rho_EM, rho_EM + drho1), diagnostic only
    lower_bound: float
    lower_bound_raw: float
    lower_bound_base: float
    upper_bound: float
    C_exp: float
    l_U: float
    l_ideal_exp: float
    delta_norm: float
    delta_first_order_norm: float
    layerwise_bound: float
    suff_condition_holds: bool
    delta_obs: tuple[float, ...] = field(default=())
    delta_obs_bound: tuple[float, ...] = field(default=())
    improvement_verdicts: tuple[bool, ...] = field(default=())

    @property
    def sandwich_holds(self) -> bool:
        return self.lower_bound - 1e-9 <= self.F_first_order <= self.upper_bound + 1e-9

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = list(v) if isinstance(v, tuple) else v
        out["sandwich_holds"] = self.sandwich_holds
        return out


def first_order_state_error(c: LayeredCircuit, report: DeltaReport | None = None) -> np.ndarray:
    """``U(dN1(rho_exp))``."""
    report = report or delta_report(c)
    U = ideal_unitary(c)
    return U(unvectorize(report.first_order @ vectorize(noisy_output(c)), c.dim))


def first_order_report(
    c: LayeredCircuit,
    observables: Sequence[np.ndarray] = (),
    *,
    tol_herm: float = tol.TOL_HERM,
) -> AnalysisReport:
    rep = delta_report(c)
    U = ideal_unitary(c)
    vU = np.asarray(U.natural)
    rho_exp = noisy_output(c)
    v_exp = vectorize(rho_exp)
    rho_ideal = ideal_output(c)
    drho = U(unvectorize(rep.first_order @ v_exp, c.dim))
    approx = rho_ideal + drho
    if not is_hermitian(approx, tol_herm):
        raise InvalidFirstOrderState("first-order state is not Hermitian")
    approx = (approx + approx.conj().T) / 2
    F = squared_fidelity(approx, rho_ideal)
    F_root = fidelity(approx, rho_ideal).value
    rho_em = em_output(c).matrix
    F_main = squared_fidelity((rho_em + rho_em.conj().T) / 2, (rho_em + drho + (rho_em + drho).conj().T) / 2).value

    d1 = spectral_norm(rep.first_order)
    C_exp = spectral_norm(vU) * float(np.linalg.norm(v_exp))
    l_U = sigma_min(vU)
    base = 1 - 0.5 * np.sqrt(c.dim) * C_exp * d1
    upper = 1 - 0.25 * (l_U * float(np.linalg.norm(rep.first_order @ v_exp))) ** 2
    lw = layerwise_bound(c, rep)
    if lw < d1 * (1 - 1e-12):
        raise PostconditionFailed(f"layerwise bound {lw:.6g} below ||v(dN1)|| = {d1:.6g}")

    suff = sufficient_condition(c, observables=(), n_random=0)
    obs_delta, obs_bound, improved = [], [], []
    for A in observables:
        dv, bd = observable_error_bound(c, A)
        obs_delta.append(dv)
        obs_bound.append(bd)
        improved.append(_improves(c, A, rho_em))

    return AnalysisReport(
        F_first_order=F.value,
        F_first_order_root=F_root,
        first_order_valid=F.valid,
        F_main_text=F_main,
        lower_bound=max(base, 0.0) ** 2,
        lower_bound_raw=base**2,
        lower_bound_base=base,
        upper_bound=upper,
        C_exp=C_exp,
        l_U=l_U,
        l_ideal_exp=suff.rhs,
        delta_norm=suff.lhs,
        delta_first_order_norm=d1,
        layerwise_bound=lw,
        suff_condition_holds=suff.holds,
        delta_obs=tuple(obs_delta),
        delta_obs_bound=tuple(obs_bound),
        improvement_verdicts=tuple(improved),
    )


# ---------------------------------------------------------------------------
# sufficient condition and the observable bound
# ---------------------------------------------------------------------------


class SufficientCondition(NamedTuple):
    holds: bool
    lhs: float  # ||v(R~ - R)||
    rhs: float  # sigma_min(v(R) - v(U^dag))
    n_checked: int
    counterexamples: int


def _improves(c: LayeredCircuit, A, rho_em=None, atol: float = 1e-12) -> bool:
    if rho_em is None:
        rho_em = em_output(c).matrix
    A = np.asarray(A)
    ideal = np.trace(A @ ideal_output(c))
    got = abs(np.trace(A @ rho_em) - ideal)
    ref = abs(ideal - np.trace(A @ noisy_output(c)))
    return bool(got <= ref + atol)


def sample_observables(d: int, n_random: int, seed=None) -> list[np.ndarray]:
    """Unit-Frobenius random Hermitian matrices followed by the Pauli basis (qubit case)."""
    rng = np.random.default_rng(seed)
    obs = [random_hermitian(d, rng) for _ in range(n_random)]
    if d == 2:
        obs += list(PAULIS.values())
    return obs


def sufficient_condition(
    c: LayeredCircuit, *, observables: Sequence[np.ndarray] | None = None, n_random: int = 100, seed=None
) -> SufficientCondition:
    """Check ``||v(dN)|| <= sigma_min(v(R) - v(U^dag))``.

    When the inequality holds the improvement of every observable in
    ``observables`` (default: ``n_random`` random ones) is verified and
    failures are counted.
    """
    R = reversal(c, "ideal")
    Rt = reversal(c, "estimated")
    Udag = ideal_unitary(c).adjoint()
    lhs = spectral_norm(Rt.natural - R.natural)
    rhs = sigma_min(R.natural - Udag.natural)
    holds = lhs <= rhs
    checked = bad = 0
    if holds:
        if observables is None:
            observables = sample_observables(c.dim, n_random, seed)
        rho_em = em_output(c).matrix
        for A in observables:
            checked += 1
            bad += not _improves(c, A, rho_em)
    return SufficientCondition(bool(holds), lhs, rhs, checked, bad)


def observable_error_bound(c: LayeredCircuit, A) -> tuple[float, float]:
    """``(|tr A (rho_EM - rho_ideal)|, ||A||_F * ||R~(rho_exp) - rho_in||_F)``."""
    A = np.asarray(A)
    rho_em = em_output(c).matrix
    delta = abs(np.trace(A @ (rho_em - ideal_output(c))))
    d_rho = frobenius_norm(reversal(c, "estimated")(noisy_output(c)) - c.input)
    return float(delta), frobenius_norm(A) * d_rho


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def perturbed_estimate(noise: ChannelRep, eps: float, seed=None) -> ChannelRep:
    """``(1 - eps) N + eps M`` with ``M`` a random channel, so the estimate stays physical."""
    M = random_channel(noise.dim_in, 2, seed)
    return ChannelRep.from_natural((1 - eps) * noise.natural + eps * M.natural, noise.dim_in, noise.dim_out)


def random_circuit(n_layers: int, d: int, eps: float, seed=None, *, input_kind: str = "mixed-trace-induced"):
    """Random unitaries, random true noise and estimates perturbed at scale ``eps``."""
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(n_layers):
        noise = random_channel(d, 2, rng)
        layers.append(CircuitLayer(unitary_channel(haar_unitary(d, rng)), noise, perturbed_estimate(noise, eps, rng)))
    return LayeredCircuit(tuple(layers), random_state(d, input_kind, rng))


def rescale_estimates(c: LayeredCircuit, factor: float) -> LayeredCircuit:
    """Scale every estimation error ``N~_i - N_i`` by ``factor``."""
    layers = []
    for layer in c.layers:
        est = layer.true_noise.natural + factor * (layer.estimated_noise.natural - layer.true_noise.natural)
        layers.append(CircuitLayer(layer.ideal, layer.true_noise, ChannelRep.from_natural(est)))
    return LayeredCircuit(tuple(layers), c.input)


class SufficientSearch(NamedTuple):
    circuit: LayeredCircuit | None
    condition: SufficientCondition | None
    tries: int
    best_ratio: float  # smallest lhs / rhs seen among nonzero-delta draws


def search_sufficient_instance(
    max_tries: int = 2000, seed=None, *, gamma: float = 0.8, min_delta: float = 1e-12
) -> SufficientSearch:
    """Rejection-sample single-qubit, single-layer circuits with a nonzero estimation error
    that satisfy the sufficient condition.

    True noise is amplitude damping, the estimate a perturbation at a random
    scale in ``[1e-8, 1e-2]``. Returns the first accepted instance, or
    ``circuit=None`` when none was found.
    """
    rng = np.random.default_rng(seed)
    noise = amplitude_damping(gamma)
    best = np.inf
    for k in range(1, max_tries + 1):
        eps = 10 ** rng.uniform(-8, -2)
        layer = CircuitLayer(unitary_channel(haar_unitary(2, rng)), noise, perturbed_estimate(noise, eps, rng))
        c = LayeredCircuit((layer,), random_state(2, "mixed-trace-induced", rng))
        cond = sufficient_condition(c, n_random=100, seed=rng)
        if cond.lhs <= min_delta:
            continue
        best = min(best, cond.lhs / cond.rhs if cond.rhs > 0 else np.inf)
        if cond.holds:
            return SufficientSearch(c, cond, k, best)
    return SufficientSearch(None, None, max_tries, best)


def reversal_trace_defect(c: LayeredCircuit) -> float:
    """``||vec(I)^T v(R - U^dag)||``: zero means ``sigma_min(v(R - U^dag)) = 0``."""
    R = reversal(c, "ideal").natural
    Udag = ideal_unitary(c).adjoint().natural
    t = vectorize(np.eye(c.dim)).real
    return float(np.linalg.norm(t @ (R - Udag)))


# ---------------------------------------------------------------------------
# Pauli vs depolarizing mismatch
# ---------------------------------------------------------------------------


def _params(p) -> PauliChannelParams:
    return p if isinstance(p, PauliChannelParams) else PauliChannelParams(*p)


def _offdiag_root_sum(p: PauliChannelParams) -> float:
    return float(sum(np.sqrt(max(w, 0.0)) for w in p.weights[1:]))


def mismatch_overlap(p, lam: float) -> float:
    """Overlap of the square-root Kraus weight vectors of the Pauli channel and ``depolarizing(lam)``."""
    p = _params(p)
    s = _offdiag_root_sum(p)
    return float(np.sqrt(max(p.p1, 0.0) * (1 - 0.75 * lam)) + s * np.sqrt(lam / 4))


def mismatch_lambda_max(p) -> float:
    """Depolarizing strength closest to the Pauli channel ``p`` in Kraus-weight overlap.

    The stationary point ``4 s^2 / (9 p1 + 3 s^2)`` (``s`` the sum of the
    non-identity square-root weights) competes with the endpoints 0 and 1.
    """
    p = _params(p)
    # expanded square: exact whenever the cross terms vanish
    w = [max(x, 0.0) for x in p.weights[1:]]
    s2 = sum(w) + 2 * (np.sqrt(w[0] * w[1]) + np.sqrt(w[0] * w[2]) + np.sqrt(w[1] * w[2]))
    cands = [0.0, 1.0]
    if p.p1 > 0:
        cands.append(float(np.clip(4 * s2 / (9 * p.p1 + 3 * s2), 0.0, 1.0)))
    # ties go to the stationary point, then to the smaller endpoint
    return max(reversed(cands), key=lambda lam: mismatch_overlap(p, lam))


MISMATCH_COLUMNS = (
    "state_id", "z_in", "z_noisy", "z_mitigated", "y_in", "y_noisy", "y_mitigated",
    "f_noisy", "f_mitigated", "f_mitigated_valid",
)


@dataclass(frozen=True)
class MismatchResult:
    params: PauliChannelParams
    lambda_max: float
    verdict: str
    recovered_eigenvalues: np.ndarray | None
    rows: tuple[dict, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=MISMATCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()


VERDICT_OK = "estimate invertible"
VERDICT_ESTIMATE_SINGULAR = "estimated depolarizing channel is non-invertible while the true noise is invertible"
VERDICT_BOTH_SINGULAR = "estimated depolarizing channel and true noise are both non-invertible"


def mismatch_experiment(
    p, n_states: int = 50, seed=0, *, state_kind: str = "mixed-trace-induced"
) -> MismatchResult:
    """Mitigate a Pauli channel with its best depolarizing approximation on random states.

    State ``i`` is drawn from the stream ``SeedSequence([seed, i])``.
    """
    p = _params(p)
    lam = mismatch_lambda_max(p)
    N = pauli_channel(p.p1, p.p2, p.p3)
    D = depolarizing(lam)
    try:
        Dinv = exact_inverse(D)
    except NonInvertibleChannel:
        try:
            exact_inverse(N)
            verdict = VERDICT_ESTIMATE_SINGULAR
        except NonInvertibleChannel:
            verdict = VERDICT_BOTH_SINGULAR
        return MismatchResult(p, lam, verdict, None, ())
    rec = Dinv.compose(N)
    eig = np.linalg.eigvals(rec.natural)
    Z, Y = PAULIS["Z"], PAULIS["Y"]
    rows = []
    for i in range(n_states):
        rho = random_state(2, state_kind, np.random.SeedSequence([seed, i]))
        noisy = N(rho)
        mit = rec(rho)
        f_noisy = fidelity(noisy, rho)
        f_mit = fidelity(mit, rho)
        ev = lambda A, r: float(np.trace(A @ r).real)  # noqa: E731
        rows.append({
            "state_id": i,
            "z_in": ev(Z, rho), "z_noisy": ev(Z, noisy), "z_mitigated": ev(Z, mit),
            "y_in": ev(Y, rho), "y_noisy": ev(Y, noisy), "y_mitigated": ev(Y, mit),
            "f_noisy": f_noisy.value, "f_mitigated": f_mit.value, "f_mitigated_valid": f_mit.valid,
        })
    return MismatchResult(p, lam, VERDICT_OK, eig, tuple(rows))
