import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sasakilift import _kernels, jets
from sasakilift.jets import Jet, JetDomainError, JetError, seed_variable

from oracles import fd_partials

finite = st.floats(-2.0, 2.0, allow_nan=False)


def test_seed_variable_examples():
    j = seed_variable(0, 3.0, 2, 2)
    assert j.coeff((0, 0)) == 3.0
    assert j.coeff((1, 0)) == 1.0
    assert j.coeff((0, 1)) == 0.0 and j.coeff((2, 0)) == 0.0 and j.coeff((1, 1)) == 0.0
    j = seed_variable(1, 0.0, 1, 3)
    assert j.value == 0.0 and j.coeff((0, 1, 0)) == 1.0


def test_square_at_two():
    x = seed_variable(0, 2.0, 2, 1)
    np.testing.assert_allclose((x * x).coeffs, [4.0, 4.0, 1.0])


def test_order_zero_product():
    a = Jet.constant(2.0, 0, 1)
    b = Jet.constant(3.0, 0, 1)
    assert (a * b).value == 6.0


def test_log_series_at_origin():
    x, y = jets.variables(np.zeros(2), 4)
    r2 = x * x + y * y
    L = (1.0 + r2).log()
    for m in [(2, 0), (0, 2)]:
        assert L.coeff(m) == pytest.approx(1.0)
    assert L.coeff((1, 1)) == pytest.approx(0.0)
    # -(x²+y²)²/2 = -x⁴/2 - x²y² - y⁴/2
    assert L.coeff((4, 0)) == pytest.approx(-0.5)
    assert L.coeff((2, 2)) == pytest.approx(-1.0)
    assert L.coeff((0, 4)) == pytest.approx(-0.5)
    assert L.coeff((3, 1)) == pytest.approx(0.0)


def test_exp_derivative():
    x = seed_variable(0, 1.0, 1, 1)
    assert x.exp().partial((1,)) == pytest.approx(math.e, abs=1e-12)


def test_extract_partial_examples():
    assert jets.extract_partial(seed_variable(0, 5.0, 2, 1), (1,)) == 1.0
    x, y = jets.variables(np.array([1.0, 1.0]), 2)
    assert jets.extract_partial(x * x * y, (1, 1)) == pytest.approx(2.0)
    assert jets.extract_partial(x * x * y, (0, 0)) == pytest.approx(1.0)


def test_derivative_tensor_examples():
    D = jets.derivative_tensor(lambda c: c, np.array([0.3, -0.2]), 1)
    np.testing.assert_allclose(D[:, 1:], np.eye(2))
    D = jets.derivative_tensor(lambda c: [c[0] ** 2, c[0] ** 3], np.array([2.0]), 2)
    np.testing.assert_allclose(D, [[4, 4, 2], [8, 12, 12]])
    flat = jets.derivative_tensor(lambda c: [[1.0, 0.0], [0.0, 1.0]], np.array([0.1, 0.4]), 2)
    assert np.all(flat[..., 1:] == 0)


def test_domain_errors():
    x = seed_variable(0, 0.0, 2, 1)
    with pytest.raises(JetDomainError):
        x.log()
    with pytest.raises(JetDomainError):
        1.0 / x
    with pytest.raises(JetError):
        seed_variable(0, 0.0, 5, 1)
    with pytest.raises(JetError):
        x.coeff((3,))


def _poly(c):
    x, y = c
    return (1 + x * x + 0.5 * y).log() + (x * y).exp() / (2 + y * y) + (1 + x * x) ** 1.5 + x.sin() * y.cos()


def _poly_np(p):
    x, y = p
    return np.log(1 + x * x + 0.5 * y) + np.exp(x * y) / (2 + y * y) + (1 + x * x) ** 1.5 + np.sin(x) * np.cos(y)


@settings(max_examples=40, deadline=None)
@given(finite.map(lambda v: v / 2), finite.map(lambda v: v / 2))
def test_elementary_functions_match_finite_differences(x, y):
    p = np.array([x, y])
    j = _poly(jets.variables(p, 2))
    ref = fd_partials(_poly_np, p, 2, 1e-4)
    for m, v in ref.items():
        assert abs(j.partial(m) - v) / (1 + abs(v)) < 1e-5


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3))
def test_product_rule_and_commutativity(a, b):
    order, nvars = 3, 2
    n = jets.n_coeffs(order, nvars)
    rng = np.random.default_rng(abs(hash((tuple(a), tuple(b)))) % 2**32)
    A = Jet(rng.normal(size=n), order, nvars)
    B = Jet(rng.normal(size=n), order, nvars)
    np.testing.assert_allclose((A * B).coeffs, (B * A).coeffs, atol=1e-12)
    lhs = (A * B).diff(0)
    rhs = A.diff(0) * B.truncate(2) + A.truncate(2) * B.diff(0)
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-1.0, 1.0))
def test_exp_log_inverse(c, d):
    x, y = jets.variables(np.array([c, d]), 4)
    f = x + 0.3 * y * y
    np.testing.assert_allclose(f.log().exp().coeffs, f.coeffs, atol=1e-11)
    np.testing.assert_allclose((f.sqrt() * f.sqrt()).coeffs,
                               f.coeffs, atol=1e-11)
    np.testing.assert_allclose((f * f.reciprocal()).coeffs, Jet.constant(1.0, 4, 2).coeffs, atol=1e-11)


def test_embed_and_truncate_prefix():
    x, y = jets.variables(np.array([0.2, 0.3]), 3)
    f = x * x * y
    g = f.embed(3, (1, 2))
    assert g.coeff((0, 1, 1)) == pytest.approx(f.coeff((1, 1)))
    assert g.coeff((1, 0, 0)) == 0.0
    np.testing.assert_array_equal(f.truncate(1).coeffs, f.coeffs[: jets.n_coeffs(1, 2)])


def test_einsum_matches_componentwise():
    P = np.array([[0.1, 0.2], [0.3, -0.4]])
    x, y = jets.variables(P, 2)
    A = jets.stack([[x, y], [y * x, 1.0]], 2, 2)
    v = jets.stack([x * x, y], 2, 2)
    out = jets.einsum("...ab,...b->...a", A, v)
    ref0 = x * x * x + y * y
    np.testing.assert_allclose(out[:, 0].coeffs, ref0.coeffs, atol=1e-14)


def test_inverse_jet():
    P = np.array([[0.2, -0.1]])
    x, y = jets.variables(P, 2)
    G = jets.stack([[2.0 + x * x, x * y], [x * y, 1.0 + y * y]], 2, 2)
    I = jets.einsum("...ab,...bc->...ac", G, jets.inv(G))
    np.testing.assert_allclose(I.value, np.eye(2)[None], atol=1e-13)
    assert np.max(np.abs(I.coeffs[..., 1:])) < 1e-12


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
def test_kernels_agree():
    rng = np.random.default_rng(0)
    for order, nvars in [(2, 3), (4, 5), (3, 2)]:
        table = jets.index_table(order, nvars)
        a = rng.normal(size=(7, table.size))
        b = rng.normal(size=(7, table.size))
        np.testing.assert_allclose(_kernels.truncated_product(a, b, table, use_numba=True),
                                   _kernels.truncated_product(a, b, table, use_numba=False), atol=1e-13)
        coeffs = rng.normal(size=(7, order + 1))
        h = a.copy()
        h[..., 0] = 0
        np.testing.assert_allclose(_kernels.power_series(h, coeffs, table, use_numba=True),
                                   _kernels.power_series(h, coeffs, table, use_numba=False), atol=1e-12)


def test_env_flag_selects_numpy_fallback():
    import os
    import subprocess
    import sys

    code = ("from sasakilift import _kernels; from sasakilift.catalog import lookup; "
            "from sasakilift.lift import build_lift; from sasakilift import geometry as geo; "
            "ls = build_lift(lookup('fubini-study', n=1).ks); "
            "print(_kernels.USE_NUMBA, repr(float(geo.curvature_suite(ls.chart, [0.1, 0.2, -0.3]).scalar)))")
    outs = {}
    for flag in ("1", ""):
        env = dict(os.environ, SASAKILIFT_DISABLE_NUMBA=flag)
        outs[flag] = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                    check=True).stdout.split()
    assert outs["1"][0] == "False"
    assert outs[""][0] == str(_kernels.HAVE_NUMBA)
    assert float(outs["1"][1]) == pytest.approx(float(outs[""][1]), abs=1e-12)
    assert float(outs["1"][1]) == pytest.approx(6.0, abs=1e-10)
