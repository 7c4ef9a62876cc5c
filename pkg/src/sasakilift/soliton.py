"""Twisted η-Ricci solitons on contact charts.

    Ric + ½ L_X g = λ g + 2 C₁ α_X ⊙ η + C₂ η⊗η,   α_X = L_X η,   η(X) = 0

with a ⊙ b = ½(a⊗b + b⊗a).  Sign convention for λ: λ > 0 expanding, λ = 0
steady, λ < 0 shrinking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import jets
from .geometry import Field, PreconditionError, as_points
from .kahler import SolitonDatum, kr_soliton_residual
from .lift import ContactStructure, LiftStructure, _max, lift_field, lifted_frame
from .report import Finding

CRITICAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TwistedSolitonData:
    X: Field
    lam: float
    C1: float = 0.0
    C2: float = 0.0

    def alpha_X(self, cs: ContactStructure) -> Field:
        """α_X = L_X η as a 1-form field."""
        X, eta = self.X, cs.eta
        return Field(lambda Q, k: geo.lie_jet(X.jet(Q, k + 1), eta.jet(Q, k + 1), "covector"),
                     (cs.dim,), cs.dim, "alpha_X")


@dataclass(frozen=True)
class SolitonClass:
    label: str
    C1: float

    def __post_init__(self):
        if self.label not in ("subcritical", "critical", "supercritical"):
            raise ValueError(f"unknown soliton class {self.label!r}")


def classify(C1: float, tol: float = CRITICAL_TOL) -> SolitonClass:
    if abs(C1 - 0.5) <= tol:
        return SolitonClass("critical", C1)
    return SolitonClass("subcritical" if C1 < 0.5 else "supercritical", C1)


def contact_frame(cs: ContactStructure, Q) -> np.ndarray:
    """Orthonormal frames with ξ first (rows), shape ``(B, d, d)``."""
    Q, _ = as_points(Q, cs.dim)
    xi = cs.xi(Q)
    d = cs.dim
    k = int(np.argmax(np.abs(xi[0])))
    rest = np.delete(np.eye(d), k, axis=0)
    vecs = np.concatenate([xi[:, None, :], np.broadcast_to(rest, (Q.shape[0], d - 1, d))], axis=1)
    return geo.gram_schmidt(cs.metric(Q), vecs)


@dataclass
class _Terms:
    S: np.ndarray   # Ric + ½ L_X g
    g: np.ndarray
    twist: np.ndarray  # α_X ⊙ η
    ee: np.ndarray
    eta_X: np.ndarray
    alpha_xi: np.ndarray


def _terms(cs: ContactStructure, X: Field, Q) -> _Terms:
    g2 = cs.metric.jet(Q, 2)
    ric = geo.ricci_from_riemann(geo.riemann_jet(geo.christoffel_jet(g2))).value
    Xj = X.jet(Q, 1)
    lxg = geo.lie_jet(Xj, g2.truncate(1), "tensor02").value
    eta1 = cs.eta.jet(Q, 1)
    ax = geo.lie_jet(Xj, eta1, "covector").value
    e = eta1.value
    twist = 0.5 * (np.einsum("...a,...b->...ab", ax, e) + np.einsum("...a,...b->...ab", e, ax))
    return _Terms(ric + 0.5 * lxg, g2.value, twist, np.einsum("...a,...b->...ab", e, e),
                  np.einsum("...a,...a->...", e, Xj.value),
                  np.einsum("...a,...a->...", ax, cs.xi(Q)))


def twisted_residual(cs: ContactStructure, tsd: TwistedSolitonData, q, frame=None) -> dict:
    """Max residual of the twisted soliton equation over a full orthonormal frame."""
    Q, _ = as_points(q, cs.dim)
    t = _terms(cs, tsd.X, Q)
    E = t.S - tsd.lam * t.g - 2.0 * tsd.C1 * t.twist - tsd.C2 * t.ee
    F = contact_frame(cs, Q) if frame is None else frame
    comp = geo.frame_components(E, F)
    return {
        "residual": _max(comp),
        "eta_X": _max(t.eta_X),
        "alpha_xi": _max(t.alpha_xi),
    }


@dataclass
class FitResult:
    lam: float
    C1: float
    C2: float
    residual: float
    rank: int
    samples: int
    dropped: tuple = ()

    @property
    def triple(self) -> tuple:
        return self.lam, self.C1, self.C2


class FitError(ValueError):
    """The design matrix is rank deficient; add sample points."""


def fit_constants(cs: ContactStructure, X: Field, points, eta_tol: float = 1e-10) -> FitResult:
    """Least-squares (λ, 2C₁, C₂) over all frame slots at all sample points.

    A column that vanishes identically (no twist term when X = 0) is dropped
    and its constant set to 0, the minimal-norm choice.
    """
    Q, _ = as_points(points, cs.dim)
    t = _terms(cs, X, Q)
    if _max(t.eta_X) > eta_tol:
        raise PreconditionError(f"eta(X) = 0 fails: {_max(t.eta_X):.3e}")
    F = contact_frame(cs, Q)
    iu = np.triu_indices(cs.dim)

    def slots(T):
        return geo.frame_components(T, F)[:, iu[0], iu[1]].ravel()

    b = slots(t.S)
    A = np.stack([slots(t.g), slots(t.twist), slots(t.ee)], axis=1)
    scale = np.max(np.abs(A), axis=0)
    keep = scale > 1e-12 * max(1.0, float(np.max(scale)))
    dropped = tuple(int(i) for i in np.flatnonzero(~keep))
    Ak = A[:, keep] / scale[keep]
    rank = int(np.linalg.matrix_rank(Ak, tol=1e-9))
    if rank < Ak.shape[1]:
        raise FitError(f"rank-deficient design matrix (rank {rank} < {Ak.shape[1]}); add sample points")
    sol = np.zeros(3)
    sol[keep] = np.linalg.lstsq(Ak, b, rcond=None)[0] / scale[keep]
    resid = _max(b - A @ sol)
    return FitResult(float(sol[0]), float(sol[1] / 2.0), float(sol[2]), resid, rank, Q.shape[0], dropped)


# -- lifts of Kähler-Ricci solitons --------------------------------------------------


def _check_base(ls: LiftStructure, sd: SolitonDatum, Q, tol: float = 1e-8) -> None:
    r = kr_soliton_residual(ls.base, sd, Q[:, 1:])
    if r["metric"] > tol or r["lie_J"] > tol:
        raise PreconditionError(f"base is not a Kähler-Ricci soliton: {r}")


def lift_soliton_residuals(ls: LiftStructure, sd: SolitonDatum, q) -> dict:
    """Lifted-pair slot = (λ-2)g^L, mixed slot = Φ(X^L,Y^L), ξξ slot = 2n."""
    Q, _ = as_points(q, ls.dim)
    _check_base(ls, sd, Q)
    cs = ls.contact
    XL = lift_field(ls, sd.X)
    t = _terms(cs, XL, Q)
    F, _ = lifted_frame(ls, Q)
    S = geo.frame_components(t.S, F)
    Phi = t.g @ cs.phi(Q)
    xl = XL(Q)
    PhiX = np.einsum("...a,...ab,...ib->...i", xl, Phi, F[:, 1:])
    m = 2 * ls.n
    return {
        "lifted_pairs": _max(S[:, 1:, 1:] - (sd.lam - 2.0) * np.eye(m)),
        "mixed": _max(S[:, 0, 1:] - PhiX),
        "xi_xi": _max(S[:, 0, 0] - m),
    }


def ricci_form_soliton_residual(ls: LiftStructure, sd: SolitonDatum, q) -> dict:
    """ρ̄ + ½ L_{X^L}Φ = (λ-2)Φ with ρ̄(X,Y) = R̄ic(X, φY)."""
    Q, _ = as_points(q, ls.dim)
    _check_base(ls, sd, Q)
    cs = ls.contact
    g2 = cs.metric.jet(Q, 2)
    ric = geo.ricci_from_riemann(geo.riemann_jet(geo.christoffel_jet(g2))).value
    phi1 = cs.phi.jet(Q, 1)
    Phi1 = jets.einsum("...ac,...cb->...ab", g2.truncate(1), phi1)
    rhobar = ric @ phi1.value
    lphi = geo.lie_jet(lift_field(ls, sd.X).jet(Q, 1), Phi1, "2form").value
    return {"ricci_form": _max(rhobar + 0.5 * lphi - (sd.lam - 2.0) * Phi1.value)}


def candidate_triples(lam: float, n: int) -> dict:
    """The two candidate constant triples (λ', C₁, C₂) for the lift of a λ-soliton."""
    return {
        "stated": (lam - 2.0, -1.0, 2 * n - 2 + lam),
        "slot_derived": (lam - 2.0, 0.5, 2 * n + 2 - lam),
    }


def constants_finding(ls: LiftStructure, sd: SolitonDatum, points) -> tuple:
    """Fit the lifted soliton's constants and compare with both candidate triples."""
    Q, _ = as_points(points, ls.dim)
    XL = lift_field(ls, sd.X)
    fit = fit_constants(ls.contact, XL, Q)
    cands = candidate_triples(sd.lam, ls.n)
    values = {"fitted_lambda": fit.lam, "fitted_C1": fit.C1, "fitted_C2": fit.C2,
              "fit_residual": fit.residual, "C1_determined": 1 not in fit.dropped}
    res = {}
    for name, (l, c1, c2) in cands.items():
        r = twisted_residual(ls.contact, TwistedSolitonData(XL, l, c1, c2), Q)["residual"]
        res[name] = r
        values[f"{name}_triple"] = [l, c1, c2]
        values[f"{name}_residual"] = r
    winner = min(res, key=res.get)
    values["winner"] = winner
    note = "" if values["C1_determined"] else " (X = 0: C1 is undetermined and reported as 0)"
    text = (f"fitted (lambda', C1, C2) = ({fit.lam:.10g}, {fit.C1:.10g}, {fit.C2:.10g}); "
            f"stated triple residual {res['stated']:.3e}, slot-derived triple residual "
            f"{res['slot_derived']:.3e}; best match: {winner}{note}")
    return fit, Finding("soliton_constants", text, values)
