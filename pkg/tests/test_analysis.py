import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qemtk import analysis as an
from qemtk import circuits as cc
from qemtk import matrep as mr
from qemtk import noisemodels as nm
from qemtk.errors import NonInvertibleNoise, ParamOutOfRange


# ---------------------------------------------------------------------------
# deltas
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_delta_identity_and_total(seed):
    c = an.random_circuit(3, 2, 1e-2, seed)
    rep = an.delta_report(c)
    assert max(rep.identity_residuals) <= 1e-12
    np.testing.assert_allclose(rep.reversal_true, cc.reversal(c, "ideal").natural, atol=1e-12)
    np.testing.assert_allclose(rep.reversal_estimated, cc.reversal(c, "estimated").natural, atol=1e-12)
    np.testing.assert_allclose(rep.total, rep.reversal_estimated - rep.reversal_true, atol=1e-15)


def test_first_order_is_exact_for_one_layer():
    c = an.random_circuit(1, 2, 1e-2, 3)
    rep = an.delta_report(c)
    np.testing.assert_allclose(rep.first_order, rep.total, atol=1e-13)


def test_first_order_residual_is_quadratic():
    c = an.random_circuit(2, 2, 1e-2, 0)
    small = an.delta_report(an.rescale_estimates(c, 0.1))
    big = an.delta_report(c)
    ratio = big.second_order_residual / small.second_order_residual
    assert ratio == pytest.approx(100, rel=0.1)


def test_zero_error_gives_zero_delta():
    c = an.rescale_estimates(an.random_circuit(2, 2, 1e-2, 1), 0.0)
    rep = an.delta_report(c)
    assert np.abs(rep.total).max() <= 1e-12
    assert an.layerwise_bound(c, rep) <= 1e-12


def test_delta_report_needs_invertible_noise():
    c = cc.single_layer(mr.identity_channel(2), nm.pauli_channel(0.5, 0, 0))
    with pytest.raises(NonInvertibleNoise):
        an.delta_report(c)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 3), d=st.sampled_from([2, 4]))
def test_layerwise_bound_dominates(seed, n, d):
    c = an.random_circuit(n, d, 1e-2, seed)
    rep = an.delta_report(c)
    assert an.layerwise_bound(c, rep) >= mr.spectral_norm(rep.first_order) * (1 - 1e-12)


# ---------------------------------------------------------------------------
# fidelity sandwich
# ---------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.sampled_from([2, 3, 4]))
def test_fuchs_van_de_graaf_on_states(seed, d):
    a = nm.random_state(d, seed=seed)
    b = nm.random_state(d, seed=seed + 1)
    assert an.fuchs_van_de_graaf(a, b).holds


def test_fuchs_van_de_graaf_on_identical_states():
    rho = nm.random_state(2, seed=0)
    chk = an.fuchs_van_de_graaf(rho, rho)
    assert chk.fidelity == pytest.approx(1.0)
    assert chk.lower == pytest.approx(1.0) and chk.upper == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(8))
def test_first_order_report_sandwich(seed):
    rng = np.random.default_rng(seed)
    c = an.random_circuit(int(rng.integers(1, 4)), [2, 4][seed % 2], 10 ** rng.uniform(-4, -2), rng)
    r = an.first_order_report(c)
    if r.first_order_valid:
        assert r.sandwich_holds
    assert r.lower_bound == max(r.lower_bound_base, 0) ** 2
    assert r.F_first_order == pytest.approx(r.F_first_order_root**2, abs=1e-12)
    assert r.layerwise_bound >= r.delta_first_order_norm * (1 - 1e-12)


def test_first_order_report_perfect_estimate():
    c = an.rescale_estimates(an.random_circuit(2, 2, 1e-2, 5), 0.0)
    r = an.first_order_report(c)
    assert r.F_first_order == pytest.approx(1.0, abs=1e-9)
    assert r.upper_bound == pytest.approx(1.0)
    assert r.lower_bound == pytest.approx(1.0)


def test_report_observables_and_dict():
    c = an.random_circuit(2, 2, 1e-3, 2)
    r = an.first_order_report(c, observables=[nm.Z, nm.X])
    assert len(r.delta_obs) == len(r.delta_obs_bound) == len(r.improvement_verdicts) == 2
    out = r.as_dict()
    assert isinstance(out["delta_obs"], list)
    assert out["sandwich_holds"] == r.sandwich_holds


# ---------------------------------------------------------------------------
# sufficient condition and the observable bound
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_observable_bound(seed):
    c = an.random_circuit(2, 2, 1e-2, seed)
    for A in an.sample_observables(2, 5, seed):
        delta, bound = an.observable_error_bound(c, A)
        assert delta <= bound + 1e-10


def test_noiseless_circuit_reports_zero_rhs():
    U = mr.unitary_channel(nm.haar_unitary(2, 1))
    ident = mr.identity_channel(2)
    c = cc.LayeredCircuit((cc.CircuitLayer(U, ident, ident),), np.eye(2) / 2)
    s = an.sufficient_condition(c)
    assert s.rhs <= 1e-12
    assert s.lhs <= 1e-12
    assert s.holds and s.counterexamples == 0 and s.n_checked == 104


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 3), d=st.sampled_from([2, 3]))
def test_trace_functional_annihilates_reversal_difference(seed, n, d):
    # R and U^dag are both trace preserving, so vec(I) is a left null vector of their difference
    c = an.random_circuit(n, d, 1e-2, seed)
    assert an.reversal_trace_defect(c) <= 1e-10 * max(1.0, mr.spectral_norm(cc.reversal(c, "ideal").natural))
    assert an.sufficient_condition(c, n_random=0).rhs <= 1e-9


def test_sample_observables():
    obs = an.sample_observables(2, 3, 0)
    assert len(obs) == 7
    for A in obs[:3]:
        assert np.linalg.norm(A) == pytest.approx(1.0)
    assert len(an.sample_observables(3, 3, 0)) == 3


def test_perturbed_estimate_stays_a_channel():
    est = an.perturbed_estimate(nm.depolarizing(0.2), 0.05, 0)
    v = mr.check_properties(est)
    assert v.is_cp and v.is_tp


# ---------------------------------------------------------------------------
# Pauli vs depolarizing mismatch
# ---------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(p=st.lists(st.floats(0, 1), min_size=3, max_size=3).filter(lambda p: sum(p) <= 1))
def test_lambda_max_matches_grid_oracle(p):
    lam = an.mismatch_lambda_max(p)
    _, best = oracles.lambda_grid_max(p)
    assert an.mismatch_overlap(p, lam) >= best - 1e-9
    assert 0 <= lam <= 1


@pytest.mark.parametrize("p,expected", [((0.5, 0, 0), 1 / 3), ((0, 1, 0), 1.0), ((1, 0, 0), 0.0)])
def test_lambda_max_values(p, expected):
    assert an.mismatch_lambda_max(p) == expected


def test_mismatch_half_identity():
    res = an.mismatch_experiment((0.5, 0, 0), 50, seed=3)
    assert res.verdict == an.VERDICT_OK
    np.testing.assert_allclose(np.sort(res.recovered_eigenvalues.real), [0, 0, 1, 1.5], atol=1e-9)
    for r in res.rows:
        assert r["z_mitigated"] == pytest.approx(1.5 * r["z_in"], abs=1e-9)
        assert r["z_noisy"] == pytest.approx(r["z_in"], abs=1e-9)
        assert abs(r["y_noisy"]) <= 1e-9 and abs(r["y_mitigated"]) <= 1e-9
    assert any(not r["f_mitigated_valid"] for r in res.rows)


def test_mismatch_csv():
    res = an.mismatch_experiment((0.5, 0, 0), 3, seed=0)
    lines = res.to_csv().strip().split("\n")
    assert lines[0].split(",") == list(an.MISMATCH_COLUMNS)
    assert len(lines) == 4


def test_mismatch_rows_are_seeded_per_state():
    a = an.mismatch_experiment((0.5, 0, 0), 5, seed=1)
    b = an.mismatch_experiment((0.5, 0, 0), 3, seed=1)
    assert a.rows[:3] == b.rows


@pytest.mark.parametrize(
    "p,verdict",
    [((0, 1, 0), an.VERDICT_ESTIMATE_SINGULAR), ((0, 0.5, 0), an.VERDICT_BOTH_SINGULAR)],
)
def test_mismatch_singular_verdicts(p, verdict):
    res = an.mismatch_experiment(p, 5)
    assert res.verdict == verdict
    assert res.rows == () and res.recovered_eigenvalues is None


def test_mismatch_rejects_bad_weights():
    with pytest.raises(ParamOutOfRange):
        an.mismatch_experiment((0.7, 0.7, 0), 1)
