"""Sasakian lift of a Kähler chart to R x N.

The lift chart has coordinates ``(t, x1, y1, ..., xn, yn)`` with ``t`` first.
Structure tensors::

    eta = dt + tau            xi = d/dt
    g^L = eta (x) eta + g     phi^b_a = J^b_a,  phi^0_a = -tau_b J^b_a,  phi(d/dt) = 0

so that ``phi X^L = (JX)^L`` for the horizontal lift ``X^L = X - tau(X) xi``.
Every field is t-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import jets
from .geometry import ChartManifold, Field, PreconditionError, as_points, _squeeze
from .jets import Jet
from .kahler import KahlerStructure
from .report import VerificationReport


class LiftError(ValueError):
    """A lift or contact invariant failed."""


@dataclass(frozen=True, eq=False)
class ContactStructure:
    chart: ChartManifold
    phi: Field
    xi: Field
    eta: Field

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def n(self) -> int:
        return (self.chart.dim - 1) // 2

    @property
    def metric(self) -> Field:
        return self.chart.metric

    def fundamental_form(self) -> Field:
        """Φ(X,Y) = g(X, φY)."""
        g, phi = self.metric, self.phi
        return Field(lambda Q, k: jets.einsum("...ac,...cb->...ab", g.jet(Q, k), phi.jet(Q, k)),
                     g.shape, g.nvars, "Phi")


@dataclass(frozen=True, eq=False)
class LiftStructure:
    base: KahlerStructure
    contact: ContactStructure

    @property
    def dim(self) -> int:
        return self.contact.dim

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def chart(self) -> ChartManifold:
        return self.contact.chart


@dataclass
class ContactJets:
    """Structure and curvature jets at a batch of chart points.

    ``riem`` has the requested order ``k``; ``gamma`` and the structure
    tensors carry order ``k + 1``; ``g`` carries order ``k + 2``.
    """

    g: Jet
    gamma: Jet
    riem: Jet
    phi: Jet
    xi: Jet
    eta: Jet

    @property
    def ric(self) -> Jet:
        return geo.ricci_from_riemann(self.riem)


def contact_jets(cs: ContactStructure, Q, order: int = 0) -> ContactJets:
    g, gamma, riem = geo.curvature_jets(cs.chart, Q, order)
    k = order + 1
    return ContactJets(g, gamma, riem, cs.phi.jet(Q, k), cs.xi.jet(Q, k), cs.eta.jet(Q, k))


def _max(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


# -- construction ---------------------------------------------------------------


def _base_jet(fld: Field, Q: np.ndarray, order: int) -> Jet:
    d = Q.shape[1]
    return fld.jet(Q[:, 1:], order).embed(d, tuple(range(1, d)))


def _lift_fields(ks: KahlerStructure):
    d = ks.dim + 1
    J = ks.J

    def eta(Q, k):
        tau = _base_jet(ks.tau, Q, k)
        one = Jet.constant(np.ones(Q.shape[0]), k, d)
        return jets.stack([one] + [tau[:, a] for a in range(ks.dim)], k, d)

    def xi(Q, k):
        v = np.zeros((Q.shape[0], d))
        v[:, 0] = 1.0
        return Jet.constant(v, k, d)

    def metric(Q, k):
        e = eta(Q, k)
        gb = _base_jet(ks.metric, Q, k)
        full = Jet(np.zeros((Q.shape[0], d, d, gb.coeffs.shape[-1])), k, d)
        full.coeffs[:, 1:, 1:] = gb.coeffs
        return full + jets.einsum("...a,...b->...ab", e, e)

    def phi(Q, k):
        tau = _base_jet(ks.tau, Q, k)
        out = Jet(np.zeros((Q.shape[0], d, d, tau.coeffs.shape[-1])), k, d)
        out.coeffs[:, 1:, 1:, 0] = J
        out.coeffs[:, 0, 1:] = -jets.einsum("...b,ba->...a", tau, J).coeffs
        return out

    return (Field(eta, (d,), d, "eta"), Field(xi, (d,), d, "xi"),
            Field(metric, (d, d), d, "g_L"), Field(phi, (d, d), d, "phi"))


def validate_almost_contact(cs: ContactStructure, points, tol: float = 1e-10) -> dict:
    """Check φ² = -Id + η⊗ξ, η(ξ) = 1, compatibility and Φ antisymmetry; raise on failure."""
    Q, _ = as_points(points, cs.dim)
    d = cs.dim
    g = cs.metric.jet(Q, 0).value
    phi, xi, eta = cs.phi(Q), cs.xi(Q), cs.eta(Q)
    scale = 1.0 + _max(g)
    res = {
        "phi_squared": _max(phi @ phi + np.eye(d) - np.einsum("...b,...a->...ba", xi, eta)),
        "eta_xi": _max(np.einsum("...a,...a->...", eta, xi) - 1.0),
        "compatible": _max(
            np.einsum("...ca,...cd,...db->...ab", phi, g, phi) - g + np.einsum("...a,...b->...ab", eta, eta)
        ) / scale,
        "Phi_antisymmetric": _max((g @ phi) + np.swapaxes(g @ phi, -1, -2)) / scale,
    }
    limits = {"phi_squared": tol, "eta_xi": 1e-12, "compatible": tol, "Phi_antisymmetric": tol}
    for key, lim in limits.items():
        if not res[key] < lim:
            raise LiftError(f"almost contact invariant {key!r} fails: residual {res[key]:.3e} > {lim:.0e}")
    return res


def build_lift(ks: KahlerStructure, validate_points: int = 8, seed: int = 0) -> LiftStructure:
    d = ks.dim + 1
    eta, xi, metric, phi = _lift_fields(ks)
    box = np.vstack([[-1.0, 1.0], ks.base.sample_box])
    chart = ChartManifold(d, metric, {}, box, f"lift({ks.base.name})")
    for name, fld in (("eta", eta), ("xi", xi), ("phi", phi)):
        chart.register(name, fld)
    cs = ContactStructure(chart, phi, xi, eta)
    ls = LiftStructure(ks, cs)
    if validate_points:
        Q = chart.sample_points(validate_points, seed)
        validate_almost_contact(cs, Q)
        res = lift_invariants(ls, Q)
        for key, val in res.items():
            if not val < 1e-9:
                raise LiftError(f"lift invariant {key!r} fails: residual {val:.3e}")
    return ls


def lift_invariants(ls: LiftStructure, Q) -> dict:
    """dη = Φ, φξ = 0 and φX^L = (JX)^L on coordinate fields."""
    Q, _ = as_points(Q, ls.dim)
    cs = ls.contact
    d = ls.dim
    g1 = cs.metric.jet(Q, 1)
    phi1 = cs.phi.jet(Q, 1)
    Phi = jets.einsum("...ac,...cb->...ab", g1, phi1).value
    deta = geo.d_half_jet(cs.eta.jet(Q, 1)).value
    phi = phi1.value
    E = np.eye(d - 1)
    XL = lift_vector(ls, np.broadcast_to(E, (Q.shape[0], d - 1, d - 1)).swapaxes(0, 1), Q)
    JXL = lift_vector(ls, np.broadcast_to(E @ ls.base.J.T, (Q.shape[0], d - 1, d - 1)).swapaxes(0, 1), Q)
    return {
        "d_eta_Phi": _max(deta - Phi),
        "phi_xi": _max(np.einsum("...ab,...b->...a", phi, cs.xi(Q))),
        "phi_lift": _max(np.einsum("...ab,i...b->i...a", phi, XL) - JXL),
    }


def lift_vector(ls: LiftStructure, X, q) -> np.ndarray:
    """Components ``(-τ(X), X)`` of the horizontal lift at lift point(s) ``q``.

    ``X`` is a base vector field or an array of base components whose trailing
    axes broadcast against ``(B, 2n)``.
    """
    Q, single = as_points(q, ls.dim)
    tau = ls.base.tau(Q[:, 1:])
    if isinstance(X, Field):
        X = X(Q[:, 1:])
    X = np.asarray(X, dtype=float)
    Xb = np.broadcast_to(X, np.broadcast_shapes(X.shape, tau.shape))
    out = np.concatenate([-np.einsum("...a,...a->...", Xb, tau)[..., None], Xb], axis=-1)
    return out[0] if single and X.ndim <= 1 else out


def lift_field(ls: LiftStructure, X, name: str | None = None) -> Field:
    """Horizontal lift of a base vector field (arrays mean constant coefficients)."""
    d = ls.dim
    base_dim = d - 1
    if not isinstance(X, Field):
        X = Field.constant(np.asarray(X, dtype=float), base_dim, "const")

    def jetfn(Q, k):
        Xj = _base_jet(X, Q, k)
        tau = _base_jet(ls.base.tau, Q, k)
        t = -jets.einsum("...a,...a->...", Xj, tau)
        out = Jet(np.zeros((Q.shape[0], d, Xj.coeffs.shape[-1])), k, d)
        out.coeffs[:, 0] = t.coeffs
        out.coeffs[:, 1:] = Xj.coeffs
        return out

    return Field(jetfn, (d,), d, name or f"{X.name}^L")


def embed_base_field(ls: LiftStructure, X: Field) -> Field:
    """A base field viewed as a t-independent field on the lift chart (no τ correction)."""
    d = ls.dim
    return Field(lambda Q, k: _base_jet(X, Q, k), X.shape, d, X.name)


def lifted_frame(ls: LiftStructure, Q) -> np.ndarray:
    """Orthonormal frames ``(ξ, E_1^L, ..., E_2n^L)`` as rows, shape ``(B, d, d)``."""
    Q, _ = as_points(Q, ls.dim)
    gb = ls.base.metric(Q[:, 1:])
    E = geo.gram_schmidt(gb, np.eye(ls.dim - 1))
    L = lift_vector(ls, np.swapaxes(E, 0, 1), Q)  # (2n, B, d)
    xi = np.zeros((Q.shape[0], 1, ls.dim))
    xi[..., 0] = 1.0
    return np.concatenate([xi, np.swapaxes(L, 0, 1)], axis=1), E


def sample(ls: LiftStructure, count: int, seed: int = 0) -> np.ndarray:
    return ls.chart.sample_points(count, seed)


# -- Sasakian validation ----------------------------------------------------------


def sasakian_residuals(cs: ContactStructure, Q) -> dict:
    """Pointwise residual arrays of the Sasakian identities on a contact chart."""
    Q, _ = as_points(Q, cs.dim)
    d, n = cs.dim, cs.n
    cj = contact_jets(cs, Q, 0)
    g0 = cj.g.value
    gamma = cj.gamma.truncate(0)
    phi, xi, eta = cj.phi.value, cj.xi.value, cj.eta.value
    I = np.eye(d)
    nphi = geo.covariant_jet(cj.phi.truncate(1), gamma, "tensor11").value  # [a, b, c] = ∇_a φ^b_c
    expect = np.einsum("...ac,...b->...abc", g0, xi) - np.einsum("...c,ab->...abc", eta, I)
    nxi = geo.covariant_jet(cj.xi.truncate(1), gamma, "vector").value  # [a, b] = ∇_a ξ^b
    killing = geo.lie_jet(cj.xi.truncate(1), cj.g.truncate(1), "tensor02").value
    # normality on coordinate fields
    phi1 = cj.phi.truncate(1)
    deta = geo.d_half_jet(cj.eta.truncate(1)).value
    normal = []
    for a in range(d):
        for b in range(a + 1, d):
            ea = Jet.constant(np.broadcast_to(I[a], (Q.shape[0], d)), 1, d)
            eb = Jet.constant(np.broadcast_to(I[b], (Q.shape[0], d)), 1, d)
            N = geo.nijenhuis_jet(phi1, ea, eb).value
            normal.append(N + 2.0 * deta[:, a, b, None] * xi)
    R = cj.riem.value
    rxi = np.einsum("...lijk,...k->...lij", R, xi)
    rxi_expect = np.einsum("...j,li->...lij", eta, I) - np.einsum("...i,lj->...lij", eta, I)
    ric = geo.ricci_from_riemann(R)
    ricxi = np.einsum("...jk,...k->...j", ric, xi) - 2 * n * eta
    return {
        "nabla_phi": nphi - expect,
        "nabla_xi": nxi + np.swapaxes(phi, -1, -2),
        "killing_xi": killing,
        "normality": np.stack(normal, axis=1) if normal else np.zeros((Q.shape[0], 0)),
        "curvature_xi": rxi - rxi_expect,
        "ricci_xi": ricxi,
        "ricci_xi_xi": np.einsum("...jk,...j,...k->...", ric, xi, xi) - 2 * n,
    }


SASAKIAN_ANCHORS = {
    "nabla_phi": "(nabla_X phi)Y = g(X,Y)xi - eta(Y)X",
    "nabla_xi": "nabla_X xi = -phi X",
    "killing_xi": "L_xi g = 0",
    "normality": "N_phi + 2 d eta (x) xi = 0",
    "curvature_xi": "R(X,Y)xi = eta(Y)X - eta(X)Y",
    "ricci_xi": "Ric(X,xi) = 2n eta(X)",
    "ricci_xi_xi": "Ric(xi,xi) = 2n",
}


def validate_sasakian(ls, points, tol: float = 1e-8) -> VerificationReport:
    """Report of the Sasakian identities; accepts a LiftStructure or ContactStructure."""
    cs = ls.contact if isinstance(ls, LiftStructure) else ls
    Q, _ = as_points(points, cs.dim)
    rep = VerificationReport()
    for key, arr in sasakian_residuals(cs, Q).items():
        rep.add(f"sasakian.{key}", SASAKIAN_ANCHORS[key], _max(arr), tol, Q.shape[0])
    return rep


# -- structure equations and curvature -----------------------------------------------


def _base_vector_jet(ls: LiftStructure, X, Pb, k):
    if isinstance(X, Field):
        return X.jet(Pb, k)
    X = np.broadcast_to(np.asarray(X, dtype=float), Pb.shape)
    return Jet.constant(X, k, ls.dim - 1)


def structure_eq_residuals(ls: LiftStructure, X, Y, q) -> dict:
    """Residuals of ∇̄_{X^L}ξ = -φX^L, ∇̄_{X^L}Y^L = (∇_XY)^L - Φ(X^L,Y^L)ξ and the lift commutator."""
    Q, _ = as_points(q, ls.dim)
    cs = ls.contact
    Pb = Q[:, 1:]
    XL = lift_field(ls, X).jet(Q, 1)
    YL = lift_field(ls, Y).jet(Q, 1)
    gL = cs.metric.jet(Q, 1)
    Gam = geo.christoffel_jet(gL).value
    phi = cs.phi(Q)
    xi = cs.xi(Q)
    Phi = np.einsum("...ac,...cb->...ab", gL.value, phi)
    xl, yl = XL.value, YL.value
    # lift side
    nav_xi = np.einsum("...bac,...a,...c->...b", Gam, xl, xi)
    nav_y = np.einsum("...a,...ba->...b", xl, YL.grad().value) + np.einsum("...bac,...a,...c->...b", Gam, xl, yl)
    # base side
    Xb, Yb = _base_vector_jet(ls, X, Pb, 1), _base_vector_jet(ls, Y, Pb, 1)
    gam = geo.christoffel_jet(ls.base.metric.jet(Pb, 1)).value
    xb, yb = Xb.value, Yb.value
    nb = np.einsum("...a,...ba->...b", xb, Yb.grad().value) + np.einsum("...bac,...a,...c->...b", gam, xb, yb)
    PhiXY = np.einsum("...a,...ab,...b->...", xl, Phi, yl)
    rhs = lift_vector(ls, nb, Q) - PhiXY[:, None] * xi
    bracket = geo.lie_bracket_jet(XL, YL).value
    bb = geo.lie_bracket_jet(Xb, Yb).value
    comm = bracket - lift_vector(ls, bb, Q) + 2.0 * PhiXY[:, None] * xi
    return {
        "streqs_xi": _max(nav_xi + np.einsum("...ab,...b->...a", phi, xl)),
        "streqs_lift": _max(nav_y - rhs),
        "commutator": _max(comm),
    }


def _vals(ls, V, Q):
    if isinstance(V, Field):
        return V(Q[:, 1:])
    return np.broadcast_to(np.asarray(V, dtype=float), (Q.shape[0], ls.dim - 1))


def curvature_relation_residual(ls: LiftStructure, X, Y, Z, q) -> dict:
    """R̄(X^L,Y^L)Z^L vs (R(X,Y)Z)^L + Φ(Y^L,Z^L)φX^L - Φ(X^L,Z^L)φY^L - 2Φ(X^L,Y^L)φZ^L."""
    Q, _ = as_points(q, ls.dim)
    x, y, z = (_vals(ls, V, Q) for V in (X, Y, Z))
    cs = ls.contact
    cj = contact_jets(cs, Q, 0)
    Rb = geo.curvature_jets(ls.base.base, Q[:, 1:], 0)[2].value
    xl, yl, zl = (lift_vector(ls, v, Q) for v in (x, y, z))
    phi = cj.phi.value
    Phi = np.einsum("...ac,...cb->...ab", cj.g.value, phi)
    lhs = np.einsum("...lijk,...i,...j,...k->...l", cj.riem.value, xl, yl, zl)
    base = lift_vector(ls, np.einsum("...lijk,...i,...j,...k->...l", Rb, x, y, z), Q)

    def Ph(u, v):
        return np.einsum("...a,...ab,...b->...", u, Phi, v)[:, None]

    def ph(u):
        return np.einsum("...ab,...b->...a", phi, u)

    rhs = base + Ph(yl, zl) * ph(xl) - Ph(xl, zl) * ph(yl) - 2.0 * Ph(xl, yl) * ph(zl)
    scale = 1.0 + _max(lhs)
    return {"curvature": _max(lhs - rhs), "relative": _max(lhs - rhs) / scale}


def ricci_relation_residual(ls: LiftStructure, q) -> dict:
    """R̄ic(E_i^L,E_j^L) = Ric(E_i,E_j) - 2δ_ij on a lifted frame and s̄ = s - 2n."""
    Q, _ = as_points(q, ls.dim)
    n = ls.n
    F, E = lifted_frame(ls, Q)
    suite_l = geo.curvature_suite(ls.chart, Q)
    suite_b = geo.curvature_suite(ls.base.base, Q[:, 1:])
    ricL = geo.frame_components(suite_l.ricci, F[:, 1:])
    ricB = geo.frame_components(suite_b.ricci, E)
    return {
        "ricci_lifted": _max(ricL - ricB + 2.0 * np.eye(2 * n)),
        "scalar": _max(suite_l.scalar - (suite_b.scalar - 2 * n)),
        "scalar_lift": suite_l.scalar,
        "scalar_base": suite_b.scalar,
    }


def ricci_form_relation(ls: LiftStructure, q) -> dict:
    """ρ̄ = π*ρ - 2π*ω on lifted pairs, ρ̄(X^L,ξ) = 0 and closedness of ρ̄."""
    Q, _ = as_points(q, ls.dim)
    cs = ls.contact
    cj = contact_jets(cs, Q, 1)
    rhobar_j = jets.einsum("...ac,...cb->...ab", cj.ric, cj.phi.truncate(1))
    rhobar = rhobar_j.value
    F, E = lifted_frame(ls, Q)
    ks = ls.base
    Pb = Q[:, 1:]
    ricB = geo.curvature_suite(ks.base, Pb).ricci
    rho = ricB @ ks.J
    om = ks.omega(Pb)
    lifted = geo.frame_components(rhobar, F[:, 1:])
    expect = geo.frame_components(rho - 2.0 * om, E)
    mixed = np.concatenate([
        np.einsum("...ia,...ab,...b->...i", F[:, 1:], rhobar, F[:, 0]),
        np.einsum("...a,...ab,...ib->...i", F[:, 0], rhobar, F[:, 1:]),
    ], axis=-1)
    closed = geo.d_two_form_jet(rhobar_j).value
    return {
        "lifted_pairs": _max(lifted - expect),
        "xi_slot": _max(mixed),
        "closed": _max(closed),
        "antisymmetric": _max(rhobar + np.swapaxes(rhobar, -1, -2)),
    }


def phi_sectional(ls, q, v) -> np.ndarray:
    """Sectional curvature of span(v, φv) for unit v in ker η."""
    cs = ls.contact if isinstance(ls, LiftStructure) else ls
    Q, single = as_points(q, cs.dim)
    v = np.broadcast_to(np.asarray(v, dtype=float), Q.shape)
    eta = cs.eta(Q)
    g = cs.metric(Q)
    if _max(np.einsum("...a,...a->...", eta, v)) > 1e-10:
        raise ValueError("phi_sectional needs a vector in the contact distribution (eta(v) = 0)")
    if _max(np.einsum("...a,...ab,...b->...", v, g, v) - 1.0) > 1e-10:
        raise ValueError("phi_sectional needs a unit vector")
    pv = np.einsum("...ab,...b->...a", cs.phi(Q), v)
    return _squeeze(geo.sectional(cs.chart, Q, v, pv), single)


def random_contact_vectors(ls: LiftStructure, Q, seed: int = 0) -> np.ndarray:
    """Unit horizontal lifts of random base directions at each point."""
    Q, _ = as_points(Q, ls.dim)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(Q.shape[0], ls.dim - 1))
    g = ls.base.metric(Q[:, 1:])
    v = v / np.sqrt(np.einsum("...a,...ab,...b->...", v, g, v))[:, None]
    return lift_vector(ls, v, Q)


def eta_einstein_check(ls: LiftStructure, c, q, tol: float = 1e-8) -> dict:
    """Residual of R̄ic = (c-2)ḡ + (2n-c+2)η⊗η for a Kähler-Einstein base with Ric = c g.

    ``c = "auto"`` uses the pointwise value s/2n, meaningful for 2-dimensional bases.
    """
    Q, _ = as_points(q, ls.dim)
    n = ls.n
    Pb = Q[:, 1:]
    sb = geo.curvature_suite(ls.base.base, Pb)
    gb = ls.base.metric(Pb)
    if isinstance(c, str):
        if c != "auto":
            raise ValueError("c must be a number or 'auto'")
        c = sb.scalar / (2 * n)
    c = np.broadcast_to(np.asarray(c, dtype=float), (Q.shape[0],))
    einstein = _max(sb.ricci - c[:, None, None] * gb)
    if einstein > tol:
        raise PreconditionError(f"base is not Einstein with the given constant: residual {einstein:.3e}")
    ric = geo.curvature_suite(ls.chart, Q).ricci
    g = ls.chart.metric(Q)
    eta = ls.contact.eta(Q)
    expect = ((c - 2)[:, None, None] * g
              + (2 * n - c + 2)[:, None, None] * np.einsum("...a,...b->...ab", eta, eta))
    return {"base_einstein": einstein, "eta_einstein": _max(ric - expect),
            "a": c - 2, "b": 2 * n - c + 2}
