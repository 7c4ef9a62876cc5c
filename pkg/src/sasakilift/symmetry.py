"""Killing fields, holomorphic fields and Kähler automorphisms, and their lifts.

For a Kähler automorphism V with ω(V, ·) = dH the field ``U_V = V^L + f ξ``
with ``f = -2 H∘π`` preserves the whole almost contact metric structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import jets
from .geometry import Field, PreconditionError, as_points, _squeeze
from .jets import Jet
from .kahler import KahlerStructure, radial_potential
from .lift import LiftStructure, _base_jet, _max, lift_field, lifted_frame

FLAG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SymmetryField:
    V: Field
    killing_residual: float
    holomorphic_residual: float
    symplectic_residual: float
    hamiltonian: Field | None = None
    hamiltonian_residual: float | None = None
    name: str = "V"
    flags: dict = field(default_factory=dict)

    @property
    def is_killing(self) -> bool:
        return self.killing_residual < FLAG_TOL

    @property
    def is_holomorphic(self) -> bool:
        return self.holomorphic_residual < FLAG_TOL

    @property
    def is_symplectic(self) -> bool:
        return self.symplectic_residual < FLAG_TOL

    @property
    def is_automorphism(self) -> bool:
        return self.is_killing and self.is_holomorphic


def base_lie_residuals(ks: KahlerStructure, V: Field, points) -> dict:
    P, _ = as_points(points, ks.dim)
    Vj = V.jet(P, 1)
    return {
        "metric": _max(geo.lie_jet(Vj, ks.metric.jet(P, 1), "tensor02").value),
        "J": _max(geo.lie_jet(Vj, ks.J_field.jet(P, 1), "tensor11").value),
        "omega": _max(geo.lie_jet(Vj, ks.omega.jet(P, 1), "2form").value),
    }


def interior_omega(ks: KahlerStructure, V: Field) -> Field:
    """The 1-form ω(V, ·)."""
    return Field(lambda P, k: jets.einsum("...b,...ba->...a", V.jet(P, k), ks.omega.jet(P, k)),
                 (ks.dim,), ks.dim, f"i_{V.name}omega")


def hamiltonian_field(ks: KahlerStructure, V: Field) -> Field:
    """H with dH = ω(V, ·) and H(centre) = 0, by radial integration."""
    return radial_potential(interior_omega(ks, V), ks.center, name=f"H_{V.name}")


def measure_symmetry(ks: KahlerStructure, V: Field, points=None, hamiltonian: Field | None = None,
                     count: int = 16, seed: int = 0, name: str | None = None) -> SymmetryField:
    """Measure the Killing/holomorphic/symplectic residuals of V and attach a Hamiltonian."""
    P = ks.base.sample_points(count, seed) if points is None else as_points(points, ks.dim)[0]
    r = base_lie_residuals(ks, V, P)
    hres = None
    if hamiltonian is None and r["omega"] < 1e-8:
        hamiltonian = hamiltonian_field(ks, V)
    if hamiltonian is not None:
        dH = hamiltonian.jet(P, 1).grad().value
        hres = _max(dH - interior_omega(ks, V)(P))
    flags = {"isKilling": r["metric"] < FLAG_TOL, "isHolomorphic": r["J"] < FLAG_TOL}
    return SymmetryField(V, r["metric"], r["J"], r["omega"], hamiltonian, hres, name or V.name, flags)


def hamiltonian_of(ks: KahlerStructure, sf: SymmetryField, p) -> np.ndarray:
    if not sf.symplectic_residual < 1e-8:
        raise PreconditionError(f"ω(V,·) is not closed: |L_V ω| = {sf.symplectic_residual:.3e}")
    H = sf.hamiltonian if sf.hamiltonian is not None else hamiltonian_field(ks, sf.V)
    P, single = as_points(p, ks.dim)
    return _squeeze(H(P), single)


def _require(cond: bool, what: str, value: float) -> None:
    if not cond:
        raise PreconditionError(f"{what} precondition fails (residual {value:.3e})")


def _lift_lie(ls: LiftStructure, U: Field, Q):
    cs = ls.contact
    Uj = U.jet(Q, 1)
    g1 = cs.metric.jet(Q, 1)
    phi1 = cs.phi.jet(Q, 1)
    Phi1 = jets.einsum("...ac,...cb->...ab", g1, phi1)
    return (geo.lie_jet(Uj, phi1, "tensor11").value,
            geo.lie_jet(Uj, g1, "tensor02").value,
            geo.lie_jet(Uj, Phi1, "2form").value,
            Uj.value, g1.value, phi1.value, Phi1.value)


def automorphism_lift_residual(ls: LiftStructure, sf: SymmetryField, q) -> dict:
    """(L_{V^L}φ)X^L = 2g^L(V^L,X^L)ξ on a lifted frame and (L_{V^L}φ)ξ = 0."""
    _require(sf.is_holomorphic, "L_V J = 0", sf.holomorphic_residual)
    Q, _ = as_points(q, ls.dim)
    Lphi, _, _, v, g, _, _ = _lift_lie(ls, lift_field(ls, sf.V), Q)
    F, _ = lifted_frame(ls, Q)
    xi = F[:, 0]
    W = F[:, 1:]
    lhs = np.einsum("...ba,...ia->...ib", Lphi, W)
    rhs = 2.0 * np.einsum("...a,...ab,...ib->...i", v, g, W)[..., None] * xi[:, None, :]
    return {"lifted": _max(lhs - rhs), "xi": _max(np.einsum("...ba,...a->...b", Lphi, xi))}


def killing_lift_residual(ls: LiftStructure, sf: SymmetryField, q) -> dict:
    """(L_{V^L}g^L)(X^L,Y^L) = 0 and (L_{V^L}g^L)(ξ,X^L) = 2Φ(V^L,X^L)."""
    _require(sf.is_killing, "L_V g = 0", sf.killing_residual)
    Q, _ = as_points(q, ls.dim)
    _, Lg, _, v, _, _, Phi = _lift_lie(ls, lift_field(ls, sf.V), Q)
    F, _ = lifted_frame(ls, Q)
    comp = geo.frame_components(Lg, F)
    PhiV = np.einsum("...a,...ab,...ib->...i", v, Phi, F[:, 1:])
    return {"lifted_pairs": _max(comp[:, 1:, 1:]), "xi_slot": _max(comp[:, 0, 1:] - 2.0 * PhiV)}


def form_automorphism_residual(ls: LiftStructure, sf: SymmetryField, q) -> dict:
    """L_{V^L}Φ = 0 and d(L_{V^L}η) = 0."""
    _require(sf.is_symplectic, "L_V ω = 0", sf.symplectic_residual)
    Q, _ = as_points(q, ls.dim)
    VL = lift_field(ls, sf.V)
    _, _, LPhi, _, _, _, _ = _lift_lie(ls, VL, Q)
    Leta = geo.lie_jet(VL.jet(Q, 2), ls.contact.eta.jet(Q, 2), "covector")
    return {"Phi": _max(LPhi), "d_L_eta": _max(geo.d_half_jet(Leta).value)}


def combined_theorem_residual(ls: LiftStructure, sf: SymmetryField, q) -> dict:
    """L_{V^L}φ = 2α⊗ξ, L_{V^L}g^L = 4α^φ⊙η, L_{V^L}Φ = 0, dα^φ = 0 with α = g^L(V^L, ·).

    ``phi_full`` tests the tensor identity on every frame vector including ξ;
    ``phi_contact`` restricts it to the contact distribution.
    """
    _require(sf.is_automorphism, "Killing and holomorphic", max(sf.killing_residual, sf.holomorphic_residual))
    Q, _ = as_points(q, ls.dim)
    cs = ls.contact
    VL = lift_field(ls, sf.V)
    Lphi, Lg, LPhi, v, g, phi, _ = _lift_lie(ls, VL, Q)
    xi, eta = cs.xi(Q), cs.eta(Q)
    alpha = np.einsum("...a,...ab->...b", v, g)
    ten = 2.0 * np.einsum("...b,...a->...ba", xi, alpha)  # (2α⊗ξ)^b_a
    F, _ = lifted_frame(ls, Q)
    diff = np.einsum("...ba,...ia->...ib", Lphi - ten, F)
    aphi = np.einsum("...c,...ca->...a", alpha, phi)
    sym = 2.0 * (np.einsum("...a,...b->...ab", aphi, eta) + np.einsum("...a,...b->...ab", eta, aphi))
    # α^φ as a jet for its exterior derivative
    g1 = cs.metric.jet(Q, 1)
    a_phi_jet = jets.einsum("...c,...cd,...da->...a", VL.jet(Q, 1), g1, cs.phi.jet(Q, 1))
    return {
        "phi_full": _max(diff),
        "phi_contact": _max(diff[:, 1:]),
        "metric": _max(Lg - sym),
        "Phi": _max(LPhi),
        "d_alpha_phi": _max(geo.d_half_jet(a_phi_jet).value),
    }


def corrected_field(ls: LiftStructure, sf: SymmetryField, sign: float = -1.0) -> tuple:
    """``(U_V, f)`` with ``U_V = V^L + f ξ`` and ``f = 2·sign·H∘π``."""
    H = sf.hamiltonian if sf.hamiltonian is not None else hamiltonian_field(ls.base, sf.V)
    VL = lift_field(ls, sf.V)
    d = ls.dim
    f = Field(lambda Q, k: _base_jet(H, Q, k) * (2.0 * sign), (), d, "f")

    def jetfn(Q, k):
        out = VL.jet(Q, k)
        out = Jet(out.coeffs.copy(), k, d)
        out.coeffs[:, 0] += f.jet(Q, k).coeffs
        return out

    return Field(jetfn, (d,), d, f"U_{sf.name}"), f


def corrected_automorphism_residual(ls: LiftStructure, sf: SymmetryField, q, sign: float = -1.0) -> dict:
    """Residuals showing U_V = V^L + fξ is an infinitesimal automorphism; sign=+1 is the negative control."""
    _require(sf.is_automorphism, "Killing and holomorphic", max(sf.killing_residual, sf.holomorphic_residual))
    if sf.hamiltonian is None and not sf.symplectic_residual < 1e-8:
        raise PreconditionError("no Hamiltonian available")
    Q, _ = as_points(q, ls.dim)
    U, f = corrected_field(ls, sf, sign)
    Lphi, Lg, _, _, _, _, _ = _lift_lie(ls, U, Q)
    F, _ = lifted_frame(ls, Q)
    xi = F[:, 0]
    lifted = np.einsum("...ba,...ia->...ib", Lphi, F[:, 1:])
    comp = geo.frame_components(Lg, F)
    df = f.jet(Q, 1).grad().value
    return {
        "phi_lifted": _max(lifted),
        "phi_xi": _max(np.einsum("...ba,...a->...b", Lphi, xi)),
        "metric_lifted": _max(comp[:, 1:, 1:]),
        "metric_xi": _max(comp[:, 0, 1:]),
        "metric_full": _max(comp),
        "df_xi": _max(np.einsum("...a,...a->...", df, xi)),
    }
