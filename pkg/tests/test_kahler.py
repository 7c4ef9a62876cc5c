import numpy as np
import pytest

from sasakilift import geometry as geo
from sasakilift import jets
from sasakilift.catalog import fubini_study_metric
from sasakilift.geometry import Field
from sasakilift.kahler import (KahlerError, SolitonDatum, from_metric, from_potential, holomorphic_sectional,
                               kr_soliton_residual, radial_potential, ricci_form, standard_complex_structure,
                               tau_primitive, validate_kahler)

from conftest import ALL_BASES


def test_complex_structure():
    J = standard_complex_structure(4)
    np.testing.assert_array_equal(J @ J, -np.eye(4))
    assert J[1, 0] == 1 and J[0, 1] == -1
    with pytest.raises(KahlerError):
        standard_complex_structure(3)


def test_flat_potential_gives_identity():
    ks = from_potential(lambda c: 0.5 * (c[0] ** 2 + c[1] ** 2), 2)
    P = ks.base.sample_points(5)
    np.testing.assert_allclose(ks.metric(P), np.broadcast_to(np.eye(2), (5, 2, 2)), atol=1e-15)
    om = ks.omega(P)
    np.testing.assert_allclose(om, np.broadcast_to(ks.J, (5, 2, 2)), atol=1e-15)
    # τ linear, dτ = ω
    tau = ks.tau(P)
    np.testing.assert_allclose(tau, P @ ks.J, atol=1e-14)
    d = geo.d_half_jet(ks.tau.jet(P, 1)).value
    np.testing.assert_allclose(d, om, atol=1e-14)


def test_potential_metric_matches_explicit_fubini_study():
    fs = from_potential(lambda c: 0.5 * jets.log(1 + sum(ci * ci for ci in c)), 4)
    ex = from_metric(fubini_study_metric(2), dim=4)
    P = fs.base.sample_points(10, 2)
    np.testing.assert_allclose(fs.metric(P), ex.metric(P), atol=1e-14)


def test_potential_metric_order_limit():
    ks = from_potential(lambda c: 0.5 * (c[0] ** 2 + c[1] ** 2), 2)
    with pytest.raises(jets.JetError):
        ks.metric.jet(np.zeros((1, 2)), 3)


def test_non_hermitian_metric_rejected():
    with pytest.raises(KahlerError):
        from_metric(lambda c: [[1.0, 0.0], [0.0, 2.0]], dim=2)


def test_non_kahler_rejected():
    # conformally flat Hermitian metric in complex dimension 2 with non-closed ω
    def g(c):
        w = 1.0 + 0.3 * c[0]
        return [[w if i == j else 0.0 for j in range(4)] for i in range(4)]

    with pytest.raises(KahlerError):
        from_metric(g, dim=4)


@pytest.mark.parametrize("name,n,lam", ALL_BASES)
def test_catalog_kahler_invariants(entry, name, n, lam):
    ks = entry(name, n, lam).ks
    r = validate_kahler(ks, ks.base.sample_points(10, 9))
    assert r["dtau_omega"] < 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_tau_primitive_fubini_study_analytic(n):
    ks = from_metric(fubini_study_metric(n), dim=2 * n)
    P = ks.base.sample_points(8, 4)
    # τ_b = x^a J_ab / (1 + |x|²)
    r2 = np.sum(P * P, axis=1)
    expect = (P @ ks.J) / (1 + r2)[:, None]
    np.testing.assert_allclose(tau_primitive(ks.omega, P), expect, atol=1e-13)


def test_radial_potential_recovers_gradient():
    f = lambda c: (c[0] * c[1]).sin() + c[0] ** 3
    F = Field.formula(f, (), 2)
    beta = Field(lambda P, k: F.jet(P, k + 1).grad(), (2,), 2)
    H = radial_potential(beta)
    P = np.random.default_rng(0).uniform(-1, 1, (6, 2))
    np.testing.assert_allclose(H(P), F(P) - F(np.zeros((1, 2)))[0], atol=1e-13)


@pytest.mark.parametrize("name,n,c", [("flat", 2, 0.0), ("fubini-study", 1, 4.0), ("fubini-study", 2, 4.0),
                                      ("complex-hyperbolic", 1, -4.0), ("complex-hyperbolic", 2, -4.0)])
def test_holomorphic_sectional_constant(entry, name, n, c):
    ks = entry(name, n).ks
    P = ks.base.sample_points(20, 1)
    v = np.random.default_rng(3).normal(size=P.shape)
    v /= np.sqrt(np.einsum("...a,...ab,...b->...", v, ks.metric(P), v))[:, None]
    np.testing.assert_allclose(holomorphic_sectional(ks, P, v), c, atol=1e-10)


def test_holomorphic_sectional_needs_unit():
    ks = from_metric(fubini_study_metric(1), dim=2)
    with pytest.raises(ValueError):
        holomorphic_sectional(ks, [0.1, 0.2], [2.0, 0.0])


def test_ricci_form_fubini_study_einstein():
    ks = from_metric(fubini_study_metric(1), dim=2)
    P = ks.base.sample_points(5)
    np.testing.assert_allclose(ricci_form(ks, P), 4.0 * ks.omega(P), atol=1e-12)


@pytest.mark.parametrize("name,n,lam", ALL_BASES)
def test_catalog_solitons(entry, name, n, lam):
    e = entry(name, n, lam)
    r = kr_soliton_residual(e.ks, e.soliton, e.ks.base.sample_points(10, 2))
    assert r["metric"] < 1e-10 and r["lie_J"] < 1e-12


def test_wrong_soliton_constant_fails(entry):
    e = entry("gaussian", 1, 1.0)
    r = kr_soliton_residual(e.ks, SolitonDatum(e.soliton.X, 2.0), e.ks.base.sample_points(5))
    assert r["metric"] > 0.5
