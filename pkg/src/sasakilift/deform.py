"""D_{α,β}-homotheties of contact metric structures.

    φ' = φ,  ξ' = ξ/β,  η' = βη,  g' = α g + (β² - α) η⊗η,   c = (β² - α)/(αβ)

Curvature and Ricci transformation laws come in two forms: ``"derived"``
(re-derived from the difference tensor; the default) and ``"published"`` (the
originally published coefficients, kept for comparison).  Soliton constants
follow the same switch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import jets
from .geometry import ChartManifold, Field, PreconditionError, as_points
from .lift import ContactStructure, _max, contact_jets, validate_almost_contact

FORMS = ("derived", "published")


@dataclass(frozen=True)
class HomothetyParams:
    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (np.isfinite(a) and np.isfinite(b)) or a <= 0 or b <= 0:
            raise ValueError(f"homothety needs alpha, beta > 0 (got {a}, {b})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def c(self) -> float:
        return (self.beta**2 - self.alpha) / (self.alpha * self.beta)

    @property
    def ratio(self) -> float:
        return self.beta / self.alpha

    def inverse(self) -> "HomothetyParams":
        return HomothetyParams(1.0 / self.alpha, 1.0 / self.beta)


@dataclass(frozen=True, eq=False)
class DeformedStructure:
    source: ContactStructure
    params: HomothetyParams
    contact: ContactStructure
    source_ratio: float = 1.0
    X: Field | None = None  # soliton field rescaled by 1/α

    @property
    def ratio(self) -> float:
        """The structure is ``ratio``-Sasakian when the source is ``source_ratio``-Sasakian."""
        return self.source_ratio * self.params.ratio


def _check_sasakian_source(ds: DeformedStructure) -> None:
    if ds.source_ratio != 1.0:
        raise PreconditionError("transformation laws assume a Sasakian source (ratio 1)")


def apply_homothety(cs, hp: HomothetyParams, X: Field | None = None,
                    validate_points: int = 4, seed: int = 0) -> DeformedStructure:
    """Deform ``cs`` (a ContactStructure or a previous DeformedStructure)."""
    source_ratio = 1.0
    if isinstance(cs, DeformedStructure):
        source_ratio = cs.ratio
        if X is None and cs.X is not None:
            X = cs.X
        cs = cs.contact
    if not isinstance(hp, HomothetyParams):
        hp = HomothetyParams(*hp)
    a, b = hp.alpha, hp.beta
    g, eta, xi = cs.metric, cs.eta, cs.xi

    def metric(Q, k):
        e = eta.jet(Q, k)
        return g.jet(Q, k) * a + jets.einsum("...a,...b->...ab", e, e) * (b * b - a)

    d = cs.dim
    chart = ChartManifold(d, Field(metric, (d, d), d, "g'"), {}, cs.chart.sample_box,
                          f"{cs.chart.name}[{a:g},{b:g}]")
    new = ContactStructure(chart, cs.phi, xi.scaled(1.0 / b, "xi'"), eta.scaled(b, "eta'"))
    Xp = X.scaled(1.0 / a, f"{X.name}'") if X is not None else None
    ds = DeformedStructure(cs, hp, new, source_ratio, Xp)
    if validate_points:
        Q = chart.sample_points(validate_points, seed)
        validate_almost_contact(new, Q)
        inv = deformation_invariants(ds, Q)
        limits = {"inverse_metric": 1e-12, "d_eta": 1e-9, "Phi_scaling": 1e-12}
        for key, lim in limits.items():
            if not inv[key] < lim:
                raise ValueError(f"deformation invariant {key!r} fails: {inv[key]:.3e}")
    return ds


def deformation_invariants(ds: DeformedStructure, Q) -> dict:
    """Inverse metric map, dη' = (ratio) Φ' and Φ' = αΦ (relative residuals)."""
    Q, _ = as_points(Q, ds.contact.dim)
    a, b = ds.params.alpha, ds.params.beta
    src, new = ds.source, ds.contact
    g, gp = src.metric(Q), new.metric(Q)
    ep = new.eta(Q)
    back = gp / a + (1 / b**2 - 1 / a) * np.einsum("...a,...b->...ab", ep, ep)
    phi = src.phi(Q)
    Phi, Phip = g @ phi, gp @ phi
    deta = geo.d_half_jet(new.eta.jet(Q, 1)).value
    scale = 1.0 + _max(gp)
    return {
        "inverse_metric": _max(back - g) / (1.0 + _max(g)),
        "d_eta": _max(deta - ds.ratio * Phip) / scale,
        "Phi_scaling": _max(Phip - a * Phi) / scale,
    }


def _structure_values(ds: DeformedStructure, Q):
    new = ds.contact
    return new.metric(Q), new.phi(Q), new.xi(Q), new.eta(Q)


def difference_tensor_components(ds: DeformedStructure, Q) -> np.ndarray:
    """T^b_{ac} = c(η'_a φ^b_c + η'_c φ^b_a), so that ∇_XY = ∇'_XY + T_XY."""
    _, phi, _, ep = _structure_values(ds, Q)
    c = ds.params.c
    return c * (np.einsum("...a,...bc->...bac", ep, phi) + np.einsum("...c,...ba->...bac", ep, phi))


def difference_tensor(ds: DeformedStructure, X, Y, q) -> np.ndarray:
    Q, single = as_points(q, ds.contact.dim)
    X = np.broadcast_to(np.asarray(X, dtype=float), Q.shape)
    Y = np.broadcast_to(np.asarray(Y, dtype=float), Q.shape)
    out = np.einsum("...bac,...a,...c->...b", difference_tensor_components(ds, Q), X, Y)
    return out[0] if single else out


def difference_tensor_residual(ds: DeformedStructure, q) -> dict:
    """Closed-form T against Γ - Γ' computed from the two metrics independently."""
    _check_sasakian_source(ds)
    Q, _ = as_points(q, ds.contact.dim)
    G = geo.christoffel(ds.source.chart, Q)
    Gp = geo.christoffel(ds.contact.chart, Q)
    T = difference_tensor_components(ds, Q)
    return {"difference": _max(G - Gp - T), "scale": _max(G - Gp)}


def alpha_sasaki_residual(ds: DeformedStructure, q) -> dict:
    """(∇'_Xφ)Y = k(g'(X,Y)ξ' - η'(Y)X) with k the expected ratio, plus a least-squares fit of k."""
    Q, _ = as_points(q, ds.contact.dim)
    new = ds.contact
    gam = geo.christoffel_jet(new.metric.jet(Q, 1))
    A = geo.covariant_jet(new.phi.jet(Q, 1), gam, "tensor11").value  # [a, b, c]
    gp, _, xp, ep = _structure_values(ds, Q)
    B = np.einsum("...ac,...b->...abc", gp, xp) - np.einsum("...c,ab->...abc", ep, np.eye(new.dim))
    k_fit = float(np.sum(A * B) / np.sum(B * B))
    return {
        "residual": _max(A - ds.ratio * B),
        "ratio_expected": ds.ratio,
        "ratio_fit": k_fit,
        "fit_residual": _max(A - k_fit * B),
    }


def _coefficients(hp: HomothetyParams):
    c = hp.c
    return c, c * hp.beta / hp.alpha


def curvature_correction(ds: DeformedStructure, Q, form: str = "derived") -> np.ndarray:
    """Tensor C^l_{ijk} with R(e_i,e_j)e_k = R'(e_i,e_j)e_k + C(e_i,e_j)e_k."""
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    gp, phi, xp, ep = _structure_values(ds, Q)
    c, k1 = _coefficients(ds.params)
    I = np.eye(ds.contact.dim)
    P = gp @ phi  # Φ'
    phi_terms = (
        2.0 * np.einsum("...ij,...lk->...lijk", P, phi)
        + np.einsum("...ik,...lj->...lijk", P, phi)
        - np.einsum("...jk,...li->...lijk", P, phi)
    )
    xi_terms = (np.einsum("...ik,...j,...l->...lijk", gp, ep, xp)
                - np.einsum("...jk,...i,...l->...lijk", gp, ep, xp))
    eta_terms = (np.einsum("...k,...j,li->...lijk", ep, ep, I)
                 - np.einsum("...k,...i,lj->...lijk", ep, ep, I))
    if form == "derived":
        return k1 * (phi_terms + xi_terms) + (c * c - 2.0 * k1) * eta_terms
    extra = (np.einsum("...k,...j,...li->...lijk", ep, ep, phi)
             - np.einsum("...k,...i,...lj->...lijk", ep, ep, phi))
    return k1 * (phi_terms + xi_terms) - k1 * eta_terms - c**3 * ds.params.beta / ds.params.alpha * extra


def curvature_deform_residual(ds: DeformedStructure, X=None, Y=None, Z=None, q=None,
                              form: str = "derived") -> dict:
    """Residual of R = R' + correction, on given vectors or (default) on all coordinate triples."""
    _check_sasakian_source(ds)
    Q, _ = as_points(q, ds.contact.dim)
    R = geo.curvature_suite(ds.source.chart, Q).riemann
    Rp = geo.curvature_suite(ds.contact.chart, Q).riemann
    diff = R - Rp - curvature_correction(ds, Q, form)
    if X is not None:
        vec = [np.broadcast_to(np.asarray(V, dtype=float), Q.shape) for V in (X, Y, Z)]
        diff = np.einsum("...lijk,...i,...j,...k->...l", diff, *vec)
    return {"curvature": _max(diff), "scale": 1.0 + _max(R)}


def ricci_correction(ds: DeformedStructure, Q, form: str = "derived") -> np.ndarray:
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    gp, _, _, ep = _structure_values(ds, Q)
    n = ds.contact.n
    c, k1 = _coefficients(ds.params)
    ee = np.einsum("...a,...b->...ab", ep, ep)
    if form == "derived":
        return 2.0 * k1 * gp + (2 * n * c * c - 2.0 * (2 * n + 1) * k1) * ee
    return 2.0 * k1 * (gp - (n + 1) * ee)


def ricci_deform_residual(ds: DeformedStructure, q, form: str = "derived") -> dict:
    """Ric = Ric' + correction; also the trace with the deformed inverse metric."""
    _check_sasakian_source(ds)
    Q, _ = as_points(q, ds.contact.dim)
    ric = geo.curvature_suite(ds.source.chart, Q).ricci
    sp = geo.curvature_suite(ds.contact.chart, Q)
    corr = ricci_correction(ds, Q, form)
    gpinv = np.linalg.inv(ds.contact.metric(Q))
    trace = np.einsum("...ab,...ab->...", gpinv, ric) - sp.scalar - np.einsum("...ab,...ab->...", gpinv, corr)
    return {"ricci": _max(ric - sp.ricci - corr), "trace": _max(trace)}


# -- soliton constants ---------------------------------------------------------------


def soliton_constants_map(lam: float, C1: float, C2: float, n: int, hp: HomothetyParams,
                          form: str = "derived") -> tuple:
    """(λ', C₁', C₂') of the deformed soliton with X' = X/α."""
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    if not isinstance(hp, HomothetyParams):
        hp = HomothetyParams(*hp)
    a, b = hp.alpha, hp.beta
    c, k1 = _coefficients(hp)
    lam_p = (lam - 2.0 * c * b) / a
    C1_p = (a / b**2) * (C1 - 0.5) + 0.5
    base = lam * (1.0 / b**2 - 1.0 / a) + C2 / b**2
    if form == "derived":
        C2_p = base + 2.0 * (2 * n + 1) * k1 - 2.0 * n * c * c
    else:
        C2_p = base + 2.0 * (n + 1) * k1
    return lam_p, C1_p, C2_p


@dataclass
class DetwistResult:
    success: bool
    params: HomothetyParams | None
    constants: tuple | None
    residual: float
    iterations: int = 0
    message: str = ""
    alpha_over_beta2: float | None = None


def detwist_solve(lam: float, C1: float, C2: float, n: int, target: str = "C1",
                  form: str = "derived", max_iter: int = 100, tol: float = 1e-10,
                  start=(1.0, 1.0)) -> DetwistResult:
    """Find a homothety with C₁' = 0 (``target="C1"``) or C₁' = C₂' = 0 (``target="joint"``).

    The single target has the closed form α/β² = 1/(1 - 2C₁), reported at β = 1.
    The joint target runs damped Newton on the closed-form constant maps.
    """
    if target == "C1":
        if C1 >= 0.5:
            return DetwistResult(False, None, None, abs(C1 - 0.5), 0,
                                 "C1 >= 1/2: the twist cannot be removed")
        ratio = 1.0 / (1.0 - 2.0 * C1)
        hp = HomothetyParams(ratio, 1.0)
        consts = soliton_constants_map(lam, C1, C2, n, hp, form)
        return DetwistResult(True, hp, consts, abs(consts[1]), 0, "closed form", ratio)
    if target != "joint":
        raise ValueError("target must be 'C1' or 'joint'")
    if abs(C1 - 0.5) < 1e-12:
        hp = HomothetyParams(*start)
        consts = soliton_constants_map(lam, C1, C2, n, hp, form)
        return DetwistResult(False, hp, consts, float(max(abs(consts[1]), abs(consts[2]))), 0,
                             "critical class: C1' = 1/2 under every homothety; start point reported",
                             hp.alpha / hp.beta**2)

    def F(v):
        _, c1, c2 = soliton_constants_map(lam, C1, C2, n, HomothetyParams(*v), form)
        return np.array([c1, c2])

    v = np.asarray(start, dtype=float)
    f = F(v)
    best = (float(np.max(np.abs(f))), v.copy())
    it = 0
    for it in range(1, max_iter + 1):
        h = 1e-7 * np.maximum(1.0, np.abs(v))
        Jm = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h[j]
            lo = np.maximum(v - e, 0.5 * v)
            Jm[:, j] = (F(v + e) - F(lo)) / (v[j] + h[j] - lo[j])
        step = np.linalg.lstsq(Jm, -f, rcond=None)[0]
        t = 1.0
        norm = np.max(np.abs(f))
        while t > 1e-6:
            cand = v + t * step
            # keep the iterate inside the positive quadrant
            cand = np.maximum(cand, 0.1 * v)
            fc = F(cand)
            if np.max(np.abs(fc)) < norm:
                break
            t *= 0.5
        else:
            break
        v, f = cand, fc
        r = float(np.max(np.abs(f)))
        if r < best[0]:
            best = (r, v.copy())
        if np.max(v) > 1e6 or np.min(v) < 1e-6:
            # the residual can shrink like 1/beta^2 without a root
            break
        if r < tol:
            hp = HomothetyParams(*v)
            return DetwistResult(True, hp, soliton_constants_map(lam, C1, C2, n, hp, form),
                                 r, it, "converged", v[0] / v[1] ** 2)
    hp = HomothetyParams(*best[1])
    msg = "no solution found; best iterate reported"
    if np.max(v) > 1e6 or np.min(v) < 1e-6:
        msg = "iterates ran off to the boundary (residual decays without a root); best iterate reported"
    return DetwistResult(False, hp, soliton_constants_map(lam, C1, C2, n, hp, form), best[0], it,
                         msg, hp.alpha / hp.beta**2)
