import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sasakilift import geometry as geo
from sasakilift import lift as L
from sasakilift.deform import HomothetyParams, apply_homothety
from sasakilift.geometry import Field, PreconditionError

from sasakilift.catalog import lookup

from conftest import ALL_BASES

_FS2 = L.build_lift(lookup("fubini-study", n=2).ks)


@pytest.mark.parametrize("name,n,lam", ALL_BASES)
def test_lift_invariants(lifted, name, n, lam):
    ls = lifted(name, n, lam)
    Q = ls.chart.sample_points(10, 3)
    r = L.lift_invariants(ls, Q)
    assert max(r.values()) < 1e-12
    assert max(L.validate_almost_contact(ls.contact, Q).values()) < 1e-12


@pytest.mark.parametrize("name,n,lam", ALL_BASES)
def test_sasakian_identities(lifted, name, n, lam):
    ls = lifted(name, n, lam)
    rep = L.validate_sasakian(ls, ls.chart.sample_points(20, 4), tol=1e-9)
    assert rep.ok, rep.failures()
    assert {e.label for e in rep.entries} == {f"sasakian.{k}" for k in L.SASAKIAN_ANCHORS}


def test_non_sasakian_control(lifted):
    ls = lifted("fubini-study", 1)
    ds = apply_homothety(ls.contact, HomothetyParams(2.0, 1.0))
    rep = L.validate_sasakian(ds.contact, ls.chart.sample_points(10), tol=1e-8)
    assert not rep.ok
    assert not rep["sasakian.nabla_phi"].passed


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_lift_vector_is_horizontal_and_isometric(seed):
    ls = _FS2
    rng = np.random.default_rng(seed)
    Q = ls.chart.sample_points(4, seed)
    X, Y = rng.normal(size=(2, 4, 4))
    XL, YL = L.lift_vector(ls, X, Q), L.lift_vector(ls, Y, Q)
    eta = ls.contact.eta(Q)
    g = ls.chart.metric(Q)
    gb = ls.base.metric(Q[:, 1:])
    assert np.max(np.abs(np.einsum("...a,...a->...", eta, XL))) < 1e-12
    np.testing.assert_allclose(np.einsum("...a,...ab,...b->...", XL, g, YL),
                               np.einsum("...a,...ab,...b->...", X, gb, Y), atol=1e-12)


def test_lifted_frame_orthonormal(lifted):
    ls = lifted("complex-hyperbolic", 2)
    Q = ls.chart.sample_points(6)
    F, _ = L.lifted_frame(ls, Q)
    np.testing.assert_allclose(geo.frame_components(ls.chart.metric(Q), F), np.broadcast_to(np.eye(5), (6, 5, 5)),
                               atol=1e-12)


def test_normality_nijenhuis_example(lifted):
    ls = lifted("fubini-study", 1)
    Q = ls.chart.sample_points(5)
    X = L.lift_field(ls, [1.0, 0.0])
    Y = L.lift_field(ls, Field.formula(lambda c: [c[1], c[0] * c[0]], (2,), 2))
    N = geo.nijenhuis(ls.chart, ls.contact.phi, X, Y, Q)
    deta = geo.exterior_derivative_half(ls.chart, ls.contact.eta, Q)
    expect = -2.0 * np.einsum("...a,...ab,...b->...", X(Q), deta, Y(Q))[:, None] * ls.contact.xi(Q)
    np.testing.assert_allclose(N, expect, atol=1e-12)
    assert np.max(np.abs(expect)) > 1e-3


@pytest.mark.parametrize("name,n,lam", ALL_BASES)
def test_structure_equations(lifted, entry, name, n, lam):
    ls = lifted(name, n, lam)
    Q = ls.chart.sample_points(10, 8)
    fields = [np.eye(ls.dim - 1)[0], Field.formula(lambda c: [ci * ci for ci in c], (ls.dim - 1,), ls.dim - 1)]
    fields += list(entry(name, n, lam).symmetries.values())
    for X in fields:
        for Y in fields:
            r = L.structure_eq_residuals(ls, X, Y, Q)
            assert max(r.values()) < 1e-10


def test_commutator_has_vertical_part(lifted):
    ls = lifted("flat", 1)
    Q = ls.chart.sample_points(3)
    # [∂x^L, ∂y^L] = -2Φ(∂x^L, ∂y^L) ξ, nonzero
    XL = L.lift_field(ls, [1.0, 0.0])
    YL = L.lift_field(ls, [0.0, 1.0])
    br = geo.lie_bracket(ls.chart, XL, YL, Q)
    assert np.max(np.abs(br[:, 0])) > 0.5 and np.max(np.abs(br[:, 1:])) < 1e-14


@pytest.mark.parametrize("name,n,lam", ALL_BASES)
def test_curvature_relation(lifted, name, n, lam):
    ls = lifted(name, n, lam)
    Q = ls.chart.sample_points(10, 11)
    rng = np.random.default_rng(0)
    X, Y, Z = rng.normal(size=(3, 10, ls.dim - 1))
    assert L.curvature_relation_residual(ls, X, Y, Z, Q)["relative"] < 1e-10


@pytest.mark.parametrize("name,n,lam", ALL_BASES)
def test_ricci_relations(lifted, name, n, lam):
    ls = lifted(name, n, lam)
    Q = ls.chart.sample_points(10, 12)
    r = L.ricci_relation_residual(ls, Q)
    assert r["ricci_lifted"] < 1e-10 and r["scalar"] < 1e-10
    f = L.ricci_form_relation(ls, Q)
    assert max(f.values()) < 1e-10


@pytest.mark.parametrize("name,n,target", [("flat", 1, -3.0), ("flat", 2, -3.0), ("fubini-study", 1, 1.0),
                                           ("fubini-study", 2, 1.0), ("complex-hyperbolic", 1, -7.0),
                                           ("complex-hyperbolic", 2, -7.0)])
def test_phi_sectional_constants(lifted, name, n, target):
    ls = lifted(name, n)
    Q = ls.chart.sample_points(30, 2)
    v = L.random_contact_vectors(ls, Q, 5)
    np.testing.assert_allclose(L.phi_sectional(ls, Q, v), target, atol=1e-9)


def test_phi_sectional_rejects_vertical(lifted):
    ls = lifted("flat", 1)
    with pytest.raises(ValueError):
        L.phi_sectional(ls, [0.0, 0.1, 0.2], [1.0, 0.0, 0.0])


def test_cp1_lift_is_round_sphere(lifted):
    ls = lifted("fubini-study", 1)
    Q = ls.chart.sample_points(40, 6)
    u, v = np.random.default_rng(2).normal(size=(2, 40, 3))
    np.testing.assert_allclose(geo.sectional(ls.chart, Q, u, v), 1.0, atol=1e-10)


@pytest.mark.parametrize("name,n,c", [("fubini-study", 1, 4.0), ("fubini-study", 2, 6.0),
                                      ("complex-hyperbolic", 2, -6.0), ("flat", 2, 0.0)])
def test_eta_einstein(lifted, name, n, c):
    ls = lifted(name, n)
    r = L.eta_einstein_check(ls, c, ls.chart.sample_points(10, 1))
    assert r["eta_einstein"] < 1e-10
    assert np.allclose(r["a"], c - 2) and np.allclose(r["b"], 2 * n - c + 2)


def test_eta_einstein_fs1_coefficients(lifted):
    r = L.eta_einstein_check(lifted("fubini-study", 1), 4.0, lifted("fubini-study", 1).chart.sample_points(5))
    assert np.allclose(r["a"], 2.0) and np.allclose(r["b"], 0.0)


def test_eta_einstein_auto_on_surface(lifted):
    ls = lifted("cigar")
    assert L.eta_einstein_check(ls, "auto", ls.chart.sample_points(8))["eta_einstein"] < 1e-10


def test_eta_einstein_precondition(lifted):
    ls = lifted("fubini-study", 2)
    with pytest.raises(PreconditionError):
        L.eta_einstein_check(ls, 4.0, ls.chart.sample_points(4))
