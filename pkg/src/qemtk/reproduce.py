"""Golden checks behind ``qemtk reproduce``.

Each runner returns a :class:`Reproduction` listing every assertion with the
value found, the value expected and the tolerance used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import analysis as an
from . import classical as cl
from . import inverses as inv
from . import matrep as mr
from . import noisemodels as nm
from .circuits import CircuitLayer, LayeredCircuit
from .errors import SingularChannel, UnknownExample


@dataclass
class Reproduction:
    example: str
    checks: list[dict] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)
    info: dict[str, Any] = field(default_factory=dict)

    def check(self, name: str, passed: bool, value=None, expected=None, tolerance=None) -> bool:
        self.checks.append(
            {"name": name, "passed": bool(passed), "value": _plain(value), "expected": _plain(expected), "tolerance": tolerance}
        )
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def as_dict(self) -> dict:
        return {"example": self.example, "passed": self.passed, "checks": self.checks, "info": self.info}


def _plain(x):
    if isinstance(x, np.ndarray):
        x = x.tolist()
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)] if x.imag else float(x.real)
    if isinstance(x, np.generic):
        return x.item()
    return x


def _maxdiff(a, b) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def _match_set(found, expected) -> float:
    """Largest distance after greedily pairing each expected value with a found one."""
    left = list(np.asarray(found, dtype=complex))
    worst = 0.0
    for e in expected:
        i = int(np.argmin([abs(f - e) for f in left]))
        worst = max(worst, abs(left.pop(i) - e))
    return worst


def example1(**_) -> Reproduction:
    rep = Reproduction("example1")
    ch = nm.fixture("example1")
    d = _maxdiff(ch.natural, nm.fixture_matrix("example1_natural"))
    rep.check("choi to natural matches printed matrix", d <= 1e-12, d, 0.0, 1e-12)
    Ninv = inv.exact_inverse(ch)
    d = _maxdiff(Ninv.natural, nm.fixture_matrix("example1_inverse"))
    rep.check("exact inverse matches printed matrix", d <= 1e-12, d, 0.0, 1e-12)
    v = mr.check_properties(Ninv)
    rep.check("inverse Choi has a negative eigenvalue", v.min_choi_eigenvalue < -1e-3, v.min_choi_eigenvalue, "< -1e-3")
    rep.check("inverse is HP and TP but not CP", v.is_hp and v.is_tp and not v.is_cp, v.as_dict())
    return rep


def example2(**_) -> Reproduction:
    rep = Reproduction("example2")
    ch = nm.fixture("example2")
    v = mr.check_properties(ch)
    rep.check("channel is CPTP", v.is_cp and v.is_tp and v.is_hp, v.as_dict())
    ev = np.linalg.eigvals(ch.natural)
    d = _match_set(ev, [0, 1, 0.4, 0.2])
    rep.check("eigenvalues are {0, 1, 2/5, 1/5}", d <= 1e-9, ev, [0, 1, 0.4, 0.2], 1e-9)
    D = inv.drazin_inverse(ch)
    d = _maxdiff(D.natural, nm.fixture_matrix("example2_drazin"))
    rep.check("Drazin inverse matches printed matrix", d <= 1e-9, d, 0.0, 1e-9)
    vd = mr.check_properties(D)
    rep.check("Drazin inverse is TP and HP but not CP", vd.is_tp and vd.is_hp and not vd.is_cp, vd.as_dict())
    P = inv.moore_penrose(ch)
    d = _maxdiff(P.natural, nm.fixture_matrix("example2_moore_penrose"))
    rep.check("Moore-Penrose inverse matches printed matrix", d <= 1e-9, d, 0.0, 1e-9)
    vp = mr.check_properties(P)
    rep.check("Moore-Penrose inverse is HP but not TP", vp.is_hp and vp.tp_residual > 0.1, vp.as_dict(), "tp_residual > 0.1")
    return rep


def cnot(seed=0, **_) -> Reproduction:
    rep = Reproduction("cnot")
    ch = nm.cnot_dephasing_channel()
    target = np.diag([1, 0, 0, 1]).astype(complex)
    d = _maxdiff(ch.natural, target)
    rep.check("reduced channel is full dephasing", d <= 1e-12, d, 0.0, 1e-12)
    cls = inv.classify(ch)
    rep.check("reduced channel is non-invertible", cls.kind == inv.NON_INVERTIBLE, cls.kind, inv.NON_INVERTIBLE)
    D = inv.drazin_inverse(ch)
    d = _maxdiff(D.natural, ch.natural)
    rep.check("Drazin inverse equals the channel", d <= 1e-12, d, 0.0, 1e-12)
    rho = nm.random_state(2, "mixed-trace-induced", seed)
    ket0 = np.diag([1, 0]).astype(complex)
    joint = np.kron(rho, ket0)
    back = nm.CNOT @ nm.CNOT @ joint @ nm.CNOT.conj().T @ nm.CNOT.conj().T
    d = _maxdiff(back, joint)
    rep.check("two CNOTs on the joint state restore the input", d <= 1e-12, d, 0.0, 1e-12)
    d = _maxdiff(D(ch(rho)), rho)
    rep.check("reduced Drazin recovery loses the coherences", d > 1e-6, d, "> 1e-6")
    return rep


def mismatch(seed=7, n_states=50, **_) -> Reproduction:
    rep = Reproduction("mismatch")
    res = an.mismatch_experiment((0.5, 0, 0), n_states, seed)
    rep.check("lambda_max is 1/3", abs(res.lambda_max - 1 / 3) <= 1e-15, res.lambda_max, 1 / 3, 1e-15)
    d = _match_set(res.recovered_eigenvalues, [1.5, 1, 0, 0])
    rep.check("recovered map eigenvalues are {3/2, 1, 0, 0}", d <= 1e-9, res.recovered_eigenvalues, [1.5, 1, 0, 0], 1e-9)
    rows = res.rows
    dz = max(abs(r["z_mitigated"] - 1.5 * r["z_in"]) for r in rows)
    rep.check("mitigated <Z> is 3/2 of the input", dz <= 1e-9, dz, 0.0, 1e-9)
    dz = max(abs(r["z_noisy"] - r["z_in"]) for r in rows)
    rep.check("noisy <Z> equals the input", dz <= 1e-9, dz, 0.0, 1e-9)
    worse = all(abs(r["z_mitigated"] - r["z_in"]) > abs(r["z_noisy"] - r["z_in"]) for r in rows if abs(r["z_in"]) > 1e-9)
    rep.check("mitigation is worse whenever <Z> is nonzero", worse, worse, True)
    dy = max(max(abs(r["y_noisy"]), abs(r["y_mitigated"])) for r in rows)
    rep.check("noisy and mitigated <Y> vanish", dy <= 1e-9, dy, 0.0, 1e-9)
    bad = sum((not r["f_mitigated_valid"]) or r["f_mitigated"] > 1 - 1e-9 for r in rows)
    rep.check("some mitigated outputs are not states", bad >= 1, bad, ">= 1")
    rep.artifacts["mismatch.csv"] = res.to_csv()
    other = an.mismatch_experiment((0, 1, 0), n_states, seed)
    rep.check("p = (0, 1, 0) gives lambda_max = 1", other.lambda_max == 1.0, other.lambda_max, 1.0)
    rep.check(
        "p = (0, 1, 0) reports a non-invertible estimate",
        other.verdict == an.VERDICT_ESTIMATE_SINGULAR,
        other.verdict,
        an.VERDICT_ESTIMATE_SINGULAR,
    )
    return rep


def repetition(seed=0, p=None, n_trials=1_000_000, **_) -> Reproduction:
    rep = Reproduction("repetition")
    ps = [p] if p is not None else [0.05, 0.1, 0.2]
    for i, q in enumerate(ps):
        r = cl.repetition_error_rate(q, n_trials, np.random.SeedSequence([seed, i]))
        z = abs(r.empirical - r.exact) / r.stderr if r.stderr else 0.0
        rep.check(f"p={q}: Monte Carlo within 5 sigma of exact", z <= 5, r.empirical, r.exact, "5 sigma")
        rep.info[f"p={q}"] = {"exact": r.exact, "paper_value": r.paper_value, "empirical": r.empirical}
    if p is None or abs(p - 0.1) < 1e-15:
        ex = cl.repetition_exact_error(0.1)
        rep.check("p=0.1 exact value is 0.028", abs(ex - 0.028) <= 1e-12, ex, 0.028, 1e-12)
    N = cl.bsc(0.1)
    v = np.array([0.3, 0.7])
    back = cl.invert_distribution(N, N @ v).distribution
    rep.check("distribution inversion round trip", _maxdiff(back, v) <= 1e-12, _maxdiff(back, v), 0.0, 1e-12)
    try:
        cl.invert_distribution(cl.bsc(0.5), [0.5, 0.5])
        raised = False
    except SingularChannel:
        raised = True
    rep.check("p = 1/2 is not invertible", raised, raised, True)
    return rep


def prop2(seed=0, n_instances=200, **_) -> Reproduction:
    rep = Reproduction("prop2")
    violations = dominance = used = 0
    for i in range(n_instances):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        c = an.random_circuit(int(rng.integers(1, 4)), [2, 4][i % 2], 10 ** rng.uniform(-4, -2), rng)
        r = an.first_order_report(c)
        dominance += r.layerwise_bound < r.delta_first_order_norm * (1 - 1e-12)
        if not r.first_order_valid:
            continue
        used += 1
        violations += not r.sandwich_holds
    rep.info["valid_instances"] = used
    rep.check("fidelity sandwich holds", violations == 0, violations, 0, 1e-9)
    rep.check("layerwise bound dominates", dominance == 0, dominance, 0, "1e-12 relative")
    slope = first_order_slope(seed)
    rep.check("first-order residual scales as eps^2", abs(slope - 2) <= 0.2, slope, 2.0, 0.2)
    return rep


def first_order_slope(seed=0, n_layers: int = 2, d: int = 2) -> float:
    c = an.random_circuit(n_layers, d, 1e-2, seed)
    eps = np.logspace(-2, -4, 5)
    res = [an.delta_report(an.rescale_estimates(c, e / 1e-2)).second_order_residual for e in eps]
    return float(np.polyfit(np.log(eps), np.log(res), 1)[0])


def prop3(seed=0, max_tries=2000, **_) -> Reproduction:
    rep = Reproduction("prop3")
    rng = np.random.default_rng(seed)
    noise = nm.amplitude_damping(0.8)
    U = mr.unitary_channel(nm.haar_unitary(2, rng))
    rho = nm.random_state(2, "mixed-trace-induced", rng)
    ident = mr.identity_channel(2)
    noiseless = LayeredCircuit((CircuitLayer(U, ident, ident),), rho)
    s = an.sufficient_condition(noiseless)
    rep.check("noiseless circuit reports rhs = 0", s.rhs <= 1e-12, s.rhs, 0.0, 1e-12)
    perfect = LayeredCircuit((CircuitLayer(U, noise, noise),), rho)
    s = an.sufficient_condition(perfect)
    rep.check("perfect characterization: lhs = 0 and condition holds", s.lhs <= 1e-12 and s.holds, s.lhs, 0.0, 1e-12)
    found = an.search_sufficient_instance(max_tries, rng)
    rep.info["search_tries"] = found.tries
    rep.check("instance with nonzero delta satisfying the condition found", found.circuit is not None, found.tries, "found")
    if found.circuit is not None:
        rep.check("no counterexample among sampled observables", found.condition.counterexamples == 0,
                  found.condition.counterexamples, 0)
    return rep


EXAMPLES: dict[str, Callable[..., Reproduction]] = {
    "example1": example1,
    "example2": example2,
    "cnot": cnot,
    "mismatch": mismatch,
    "repetition": repetition,
    "prop2": prop2,
    "prop3": prop3,
}


def reproduce(name: str, **kw) -> Reproduction:
    try:
        runner = EXAMPLES[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None
    return runner(**kw)
