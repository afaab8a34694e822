from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

import oracles
from qemtk import inverses as inv
from qemtk import matrep as mr
from qemtk import noisemodels as nm
from qemtk import protocols as pr
from qemtk.errors import DegenerateScales, ParamOutOfRange, SingularReadoutMatrix, TargetOutsideSpan

PAULI_CONJUGATIONS = [mr.unitary_channel(P) for P in nm.PAULIS.values()]


# ---------------------------------------------------------------------------
# extrapolation
# ---------------------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(coeffs=st.lists(st.floats(-5, 5), min_size=1, max_size=5))
def test_richardson_exact_on_polynomials(coeffs):
    k = len(coeffs) - 1
    scales = np.arange(1, k + 2, dtype=float)
    values = np.polyval(coeffs[::-1], scales)
    est, w = pr.richardson_extrapolate(scales, values)
    assert est == pytest.approx(coeffs[0], abs=1e-10 * max(1, np.abs(values).max()))
    assert w.sum() == pytest.approx(1.0)


def test_richardson_two_points():
    # 2 f(1) - f(2)
    np.testing.assert_allclose(pr.richardson_weights([1, 2]), [2, -1])


@pytest.mark.parametrize("scales", [[1, 1, 2], [0, 1], [-1, 2], []])
def test_richardson_degenerate(scales):
    with pytest.raises(DegenerateScales):
        pr.richardson_weights(scales)


def test_linear_and_exp_fits():
    s = np.array([1.0, 2.0, 3.0])
    est, _ = pr.richardson_extrapolate(s, 0.5 - 0.1 * s, fit="linear")
    assert est == pytest.approx(0.5)
    est, _ = pr.richardson_extrapolate(s, 0.8 * np.exp(-0.3 * s), fit="exp")
    assert est == pytest.approx(0.8)
    est, _ = pr.richardson_extrapolate(s, -0.8 * np.exp(-0.3 * s), fit="exp")
    assert est == pytest.approx(-0.8)
    with pytest.raises(ValueError):
        pr.richardson_extrapolate(s, [1.0, -1.0, 1.0], fit="exp")
    with pytest.raises(ValueError):
        pr.richardson_extrapolate(s, s, fit="cubic")
    with pytest.raises(ValueError):
        pr.richardson_extrapolate(s, s[:2])


# ---------------------------------------------------------------------------
# quasiprobability
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("lam", [Fraction(1, 10), Fraction(1, 3), Fraction(1, 2)])
def test_depolarizing_inverse_coefficients_match_symbolic(lam):
    sym, exprs = oracles.depolarizing_quasiprob_symbolic()
    expected = [float(e.subs(sym, sp.Rational(lam.numerator, lam.denominator))) for e in exprs]
    target = inv.exact_inverse(nm.depolarizing(float(lam)))
    dec = pr.quasiprob_decompose(target, PAULI_CONJUGATIONS)
    np.testing.assert_allclose(dec.coefficients, expected, atol=1e-12)
    assert dec.coefficients.sum() == pytest.approx(1.0, abs=1e-9)
    lamf = float(lam)
    assert dec.cost == pytest.approx((2 + lamf) / (2 - 2 * lamf), abs=1e-12)


def test_quasiprob_cost_of_channel_is_one():
    dec = pr.quasiprob_decompose(nm.depolarizing(0.3), PAULI_CONJUGATIONS)
    assert dec.cost == pytest.approx(1.0)
    assert np.all(dec.signs >= 0)
    assert dec.probabilities.sum() == pytest.approx(1.0)


def test_quasiprob_outside_span():
    with pytest.raises(TargetOutsideSpan):
        pr.quasiprob_decompose(nm.amplitude_damping(0.3), PAULI_CONJUGATIONS)


def test_quasiprob_estimate_unbiased():
    dec = pr.quasiprob_decompose(inv.exact_inverse(nm.depolarizing(1 / 3)), PAULI_CONJUGATIONS)
    e = np.array([0.2, -0.1, 0.05, 0.4])
    est = pr.quasiprob_estimate(dec, e, 200_000, seed=0)
    assert abs(est.estimate - dec.coefficients @ e) <= 5 * est.stderr
    assert np.all(np.abs(est.samples) == pytest.approx(dec.cost))


def test_quasiprob_estimate_checks():
    dec = pr.quasiprob_decompose(nm.depolarizing(0.3), PAULI_CONJUGATIONS)
    with pytest.raises(ValueError):
        pr.quasiprob_estimate(dec, [0.1, 0.2], 10)
    with pytest.raises(ParamOutOfRange):
        pr.quasiprob_estimate(dec, [2, 0, 0, 0], 10)


# ---------------------------------------------------------------------------
# readout
# ---------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), K=st.integers(2, 5), q=st.floats(0, 0.4))
def test_readout_round_trip(seed, K, q):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(K))
    T = pr.symmetric_confusion(q, K)
    res = pr.readout_mitigate(T, T @ p)
    np.testing.assert_allclose(res.distribution, p, atol=1e-10)


def test_readout_negative_and_projection():
    T = pr.symmetric_confusion(0.2)
    res = pr.readout_mitigate(T, [0.1, 0.9])
    assert res.has_negative and not res.projected
    fixed = pr.readout_mitigate(T, [0.1, 0.9], project=True)
    assert fixed.projected
    np.testing.assert_allclose(fixed.distribution, [0, 1])


def test_readout_singular_and_invalid():
    with pytest.raises(SingularReadoutMatrix):
        pr.readout_mitigate(pr.symmetric_confusion(0.5), [0.5, 0.5])
    with pytest.raises(ValueError):
        pr.readout_mitigate([[0.9, 0.2], [0.2, 0.9]], [0.5, 0.5])


@pytest.mark.parametrize(
    "v,expected",
    [([0.5, 0.5], [0.5, 0.5]), ([2.0, 0.0], [1.0, 0.0]), ([-0.2, 0.6, 0.6], [0.0, 0.5, 0.5])],
)
def test_project_to_simplex(v, expected):
    np.testing.assert_allclose(pr.project_to_simplex(v), expected, atol=1e-15)


# ---------------------------------------------------------------------------
# virtual distillation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_virtual_distill_matches_exact_diagonal(m):
    w = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
    out = pr.virtual_distill(np.diag([float(x) for x in w]), m)
    np.testing.assert_allclose(np.diag(out).real, [float(x) for x in oracles.vd_diag(w, m)], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.sampled_from([2, 3, 4]))
def test_virtual_distill_purity_monotone(seed, d):
    rho = nm.random_state(d, seed=seed)
    pur = [pr.purity(pr.virtual_distill(rho, m)) for m in (1, 2, 3, 4)]
    assert all(b >= a - 1e-12 for a, b in zip(pur, pur[1:]))


def test_virtual_distill_fixed_points_and_checks():
    np.testing.assert_allclose(pr.virtual_distill(np.eye(3) / 3, 5), np.eye(3) / 3)
    with pytest.raises(ParamOutOfRange):
        pr.virtual_distill(np.eye(2) / 2, 0)
