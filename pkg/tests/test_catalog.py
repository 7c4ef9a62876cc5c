import numpy as np
import pytest

from sasakilift import jets
from sasakilift.catalog import CatalogError, catalog, lookup
from sasakilift.kahler import holomorphic_sectional, kr_soliton_residual, validate_kahler


def test_catalog_contents():
    names = {e.name for e in catalog()}
    assert {"flat", "fubini-study", "complex-hyperbolic", "gaussian", "cigar"} <= names


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_flat_any_n(n):
    e = lookup("flat", n=n)
    assert e.n == n and {"rotation", "euler"} <= set(e.symmetries)


def test_fubini_study_hsc_four():
    ks = lookup("fubini-study", n=1).ks
    P = ks.base.sample_points(10)
    g = ks.metric(P)
    v = np.array([1.0, 0.0]) / np.sqrt(g[:, 0, 0])[:, None]
    np.testing.assert_allclose(holomorphic_sectional(ks, P, v), 4.0, atol=1e-10)


def test_gaussian_is_exact_soliton():
    e = lookup("gaussian", lam=1.0, n=2)
    r = kr_soliton_residual(e.ks, e.soliton, e.ks.base.sample_points(20))
    assert r["metric"] < 1e-10 and r["lie_J"] < 1e-10


def test_cigar_is_steady():
    e = lookup("cigar")
    assert e.soliton.lam == 0.0
    assert kr_soliton_residual(e.ks, e.soliton, e.ks.base.sample_points(20))["metric"] < 1e-10


def test_errors():
    with pytest.raises(CatalogError):
        lookup("torus")
    with pytest.raises(CatalogError):
        lookup("flat", n=5)
    with pytest.raises(CatalogError):
        lookup("flat", n=1.5)
    with pytest.raises(CatalogError):
        lookup("cigar", n=2)
    with pytest.raises(CatalogError):
        lookup("flat", lam=1.0)


@pytest.mark.parametrize("name,n", [("flat", 2), ("fubini-study", 1), ("fubini-study", 3),
                                    ("complex-hyperbolic", 2), ("gaussian", 2)])
def test_potentials_reproduce_metrics(name, n):
    e = lookup(name, n=n)
    ks = e.ks
    P = ks.base.sample_points(10, 3)
    H = e.potential.jet(P, 2).grad().grad().value
    J = ks.J
    g = 0.5 * (H + np.einsum("ca,...cd,db->...ab", J, H, J))
    np.testing.assert_allclose(g, ks.metric(P), atol=1e-13)


def test_complex_hyperbolic_box_inside_ball():
    e = lookup("complex-hyperbolic", n=3)
    box = e.ks.base.sample_box
    assert np.sum(np.max(np.abs(box), axis=1) ** 2) < 1.0
    validate_kahler(e.ks, e.ks.base.sample_points(10))


def test_labels():
    assert lookup("gaussian", n=2, lam=-1.0).label == "gaussian(lam=-1,n=2)"
    assert jets.MAX_ORDER == 4
