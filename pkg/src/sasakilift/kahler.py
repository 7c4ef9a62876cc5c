"""Kähler charts with constant complex structure.

Real coordinates are paired as ``(x1, y1, ..., xn, yn)`` and ``J ∂x_i = ∂y_i``.
A potential ``K`` produces the metric ``g = ½(H + Jᵀ H J)`` with ``H`` the real
Hessian, so ``K = ½|x|²`` gives the identity metric.  The Kähler form is
``ω(X,Y) = g(X, JY)`` and the primitive ``τ`` (``dτ = ω`` with the ½
convention) is always produced by radial homotopy from the chart centre.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import geometry as geo
from . import jets
from .geometry import ChartManifold, Field, PreconditionError, as_points, _squeeze
from .jets import Jet

QUADRATURE_NODES = 32


class KahlerError(ValueError):
    """A structure failed one of the Kähler invariants."""


def standard_complex_structure(dim: int) -> np.ndarray:
    if dim % 2:
        raise KahlerError("a complex structure needs an even dimension")
    J = np.zeros((dim, dim))
    for i in range(0, dim, 2):
        J[i + 1, i] = 1.0
        J[i, i + 1] = -1.0
    return J


@lru_cache(maxsize=None)
def unit_interval_rule(nodes: int = QUADRATURE_NODES):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def _ray_jets(fld: Field, P: np.ndarray, center: np.ndarray, order: int, nodes: int):
    """Jets of x -> fld(c + s (x - c)) at P for every quadrature node s."""
    s, w = unit_interval_rule(nodes)
    B = P.shape[0]
    rays = center + s[:, None, None] * (P - center)[None]
    J = fld.jet(rays.reshape(-1, P.shape[1]), order)
    J = J.reshape((len(s), B) + fld.shape)
    extra = (1,) * (1 + len(fld.shape))
    return J.scale_arguments(s.reshape((-1,) + extra)), s, w


def radial_primitive(omega: Field, center=None, nodes: int = QUADRATURE_NODES, name: str = "tau") -> Field:
    """1-form τ with ``d_half τ = ω`` by the Poincaré homotopy from ``center``.

    τ_b(x) = 2 ∫₀¹ s (x - c)^a ω_ab(c + s(x - c)) ds.
    """
    dim = omega.nvars
    center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def jetfn(P, order):
        W, s, w = _ray_jets(omega, P, center, order, nodes)
        avg = jets.einsum("qBab,q->Bab", W, 2.0 * w * s)
        dx = jets.stack(jets.variables(P - center, order), order, dim)
        return jets.einsum("Ba,Bab->Bb", dx, avg)

    return Field(jetfn, (dim,), dim, name)


def radial_potential(one_form: Field, center=None, nodes: int = QUADRATURE_NODES, name: str = "H") -> Field:
    """Function H with ``dH = β`` for a closed 1-form β, ``H(center) = 0``."""
    dim = one_form.nvars
    center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def jetfn(P, order):
        W, s, w = _ray_jets(one_form, P, center, order, nodes)
        avg = jets.einsum("qBa,q->Ba", W, w)
        dx = jets.stack(jets.variables(P - center, order), order, dim)
        return jets.einsum("Ba,Ba->B", dx, avg)

    return Field(jetfn, (), dim, name)


def kahler_form(metric: Field, J: np.ndarray) -> Field:
    return Field(
        lambda P, k: jets.einsum("...ac,cb->...ab", metric.jet(P, k), J),
        metric.shape, metric.nvars, "omega",
    )


@dataclass(frozen=True, eq=False)
class KahlerStructure:
    base: ChartManifold
    J: np.ndarray
    omega: Field
    tau: Field
    potential: Field | None = None
    tau_analytic: Field | None = None
    center: np.ndarray = field(default=None)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def n(self) -> int:
        return self.base.dim // 2

    @property
    def metric(self) -> Field:
        return self.base.metric

    @property
    def J_field(self) -> Field:
        return Field.constant(self.J, self.dim, "J")


@dataclass(frozen=True, eq=False)
class SolitonDatum:
    """Soliton vector field and constant (λ > 0 expanding, λ = 0 steady, λ < 0 shrinking)."""

    X: Field
    lam: float


def _coerce_field(obj, shape, nvars, name) -> Field:
    if isinstance(obj, Field):
        return obj
    return Field.formula(obj, shape, nvars, name)


def _metric_from_potential(K: Field, J: np.ndarray) -> Field:
    def jetfn(P, order):
        if order + 2 > jets.MAX_ORDER:
            raise jets.JetError(
                f"a potential-defined metric supports jets up to order {jets.MAX_ORDER - 2}; "
                "supply the metric explicitly for higher orders"
            )
        H = K.jet(P, order + 2).grad().grad()
        return 0.5 * (H + jets.einsum("ca,...cd,db->...ab", J, H, J))

    return Field(jetfn, J.shape, J.shape[0], "g")


def validate_kahler(ks: KahlerStructure, points, tol: float = 1e-9) -> dict:
    """Residuals of the Kähler invariants at ``points``; raises on failure."""
    P, _ = as_points(points, ks.dim)
    J = ks.J
    res = {"J_squared": float(np.max(np.abs(J @ J + np.eye(ks.dim))))}
    g = ks.metric.jet(P, 1)
    gv = g.value
    scale = 1.0 + np.max(np.abs(gv))
    if np.any(np.linalg.eigvalsh(gv)[:, 0] <= 0):
        raise KahlerError("metric is not positive definite at a sample point")
    res["hermitian"] = float(np.max(np.abs(np.einsum("ca,...cd,db->...ab", J, gv, J) - gv)) / scale)
    om = ks.omega.jet(P, 1)
    res["omega_closed"] = float(np.max(np.abs(geo.d_two_form_jet(om).value)) / scale)
    res["dtau_omega"] = float(
        np.max(np.abs(geo.d_half_jet(ks.tau.jet(P, 1)).value - om.value)) / scale
    )
    limits = {"J_squared": 0.0, "hermitian": 1e-10, "omega_closed": 1e-10, "dtau_omega": tol}
    for key, lim in limits.items():
        if res[key] > lim:
            raise KahlerError(f"Kähler invariant {key!r} fails: residual {res[key]:.3e} > {lim:.0e}")
    return res


def _build(metric: Field, J, dim, sample_box, name, center, potential, tau_analytic,
           validate_points, seed) -> KahlerStructure:
    J = np.asarray(J, dtype=float) if J is not None else standard_complex_structure(dim)
    if J.shape != (dim, dim):
        raise KahlerError("J has the wrong shape")
    if np.max(np.abs(J @ J + np.eye(dim))) > 0:
        raise KahlerError("J does not square to -Id")
    base = ChartManifold(dim, metric, {}, sample_box, name)
    center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    omega = kahler_form(metric, J)
    tau = radial_primitive(omega, center)
    base.register("omega", omega)
    base.register("tau", tau)
    ks = KahlerStructure(base, J, omega, tau, potential, tau_analytic, center)
    if validate_points:
        validate_kahler(ks, base.sample_points(validate_points, seed))
    return ks


def from_potential(K, dim: int, *, J=None, sample_box=None, name: str = "kahler",
                   center=None, tau_analytic=None, validate_points: int = 8,
                   seed: int = 0) -> KahlerStructure:
    """Kähler structure whose metric is assembled from second partials of ``K``."""
    if dim % 2:
        raise KahlerError("dimension must be even")
    K = _coerce_field(K, (), dim, "K")
    J = standard_complex_structure(dim) if J is None else np.asarray(J, dtype=float)
    metric = _metric_from_potential(K, J)
    return _build(metric, J, dim, sample_box, name, center, K, tau_analytic, validate_points, seed)


def from_metric(g, J=None, dim: int | None = None, *, sample_box=None, name: str = "kahler",
                center=None, tau_analytic=None, validate_points: int = 8,
                seed: int = 0) -> KahlerStructure:
    """Kähler structure from an explicit metric; τ comes from radial homotopy."""
    if dim is None:
        if isinstance(g, Field):
            dim = g.nvars
        elif J is not None:
            dim = np.shape(J)[0]
        else:
            raise KahlerError("dimension required")
    metric = _coerce_field(g, (dim, dim), dim, "g")
    return _build(metric, J, dim, sample_box, name, center, None, tau_analytic, validate_points, seed)


def tau_primitive(omega: Field, p, center=None) -> np.ndarray:
    return radial_primitive(omega, center)(p)


def holomorphic_sectional(ks: KahlerStructure, p, v) -> np.ndarray:
    P, single = as_points(p, ks.dim)
    v = np.broadcast_to(np.asarray(v, dtype=float), P.shape)
    gv = ks.metric.jet(P, 0).value
    norm = np.einsum("...a,...ab,...b->...", v, gv, v)
    if np.any(np.abs(norm - 1.0) > 1e-10):
        raise ValueError("holomorphic_sectional expects a unit vector")
    Jv = v @ ks.J.T
    # Jv ⊥ v for a Hermitian metric, so the plane is never degenerate
    assert np.all(np.abs(np.einsum("...a,...ab,...b->...", v, gv, Jv)) < 1e-8)
    return _squeeze(geo.sectional(ks.base, P, v, Jv), single)


def ricci_form(ks: KahlerStructure, p) -> np.ndarray:
    P, single = as_points(p, ks.dim)
    ric = geo.curvature_suite(ks.base, P).ricci
    rho = ric @ ks.J
    scale = 1.0 + np.max(np.abs(rho))
    if np.max(np.abs(rho + np.swapaxes(rho, -1, -2))) > 1e-9 * scale:
        raise KahlerError("Ricci form is not antisymmetric; input is not Kähler")
    return _squeeze(rho, single)


def ricci_form_jet(ks: KahlerStructure, P, order: int = 0) -> Jet:
    _, _, riem = geo.curvature_jets(ks.base, P, order)
    return jets.einsum("...ac,cb->...ab", geo.ricci_from_riemann(riem), ks.J)


def kr_soliton_residual(ks: KahlerStructure, sd: SolitonDatum, p) -> dict:
    """Max-norm residuals of ``Ric + ½ L_X g = λ g`` and ``L_X J = 0``."""
    P, _ = as_points(p, ks.dim)
    g, _, riem = geo.curvature_jets(ks.base, P, 0)
    ric = geo.ricci_from_riemann(riem.value)
    Xj = sd.X.jet(P, 1)
    lxg = geo.lie_jet(Xj, g.truncate(1), "tensor02").value
    lxj = geo.lie_jet(Xj, ks.J_field.jet(P, 1), "tensor11").value
    return {
        "metric": float(np.max(np.abs(ric + 0.5 * lxg - sd.lam * g.value))),
        "lie_J": float(np.max(np.abs(lxj))),
    }


def check_soliton_datum(ks: KahlerStructure, sd: SolitonDatum, points, tol: float = 1e-9) -> float:
    P, _ = as_points(points, ks.dim)
    lxj = geo.lie_jet(sd.X.jet(P, 1), ks.J_field.jet(P, 1), "tensor11").value
    r = float(np.max(np.abs(lxj)))
    if r > tol:
        raise PreconditionError(f"soliton field is not holomorphic: |L_X J| = {r:.3e}")
    return r
