"""Chart-local Riemannian tensor calculus on jets.

Conventions (used everywhere in the package):

* Christoffel symbols are stored as ``gamma[..., k, i, j]`` = Γ^k_{ij}.
* The curvature operator is ``R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z`` and is
  stored as ``riemann[..., l, i, j, k]`` with ``R(∂_i, ∂_j)∂_k = R^l_{ijk} ∂_l``.
* ``Ric(Y, Z) = tr(X -> R(X,Y)Z)`` and the lowered tensor is
  ``R(X,Y,Z,W) = g(R(X,Y)Z, W)``; sectional curvature is ``R(u,v,v,u)/|u∧v|²``.
* Exterior derivative of a 1-form: ``dα(X,Y) = ½(Xα(Y) - Yα(X) - α([X,Y]))``,
  of a 2-form: ``dβ(X,Y,Z) = ⅓ (cyclic sum)``.
* Derivative indices produced by covariant derivatives come first,
  ``(∇T)[..., a, ...] = (∇_a T)[...]``.

Every field is an evaluator returning jets at a batch of points, so each
identity is checked pointwise from exact derivatives.
"""

from __future__ import annotations

import string
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .jets import Jet


class ChartDegeneracyError(ValueError):
    """Metric is singular or too ill-conditioned at a point."""


class PreconditionError(ValueError):
    """An operation's geometric precondition does not hold."""


METRIC_COND_LIMIT = 1e12


def as_points(p, dim: int):
    """Return ``(points[B, dim], single)``."""
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    if p.ndim != 2 or p.shape[1] != dim:
        raise ValueError(f"expected point(s) with {dim} coordinates, got shape {p.shape}")
    return p, single


def _squeeze(arr, single: bool):
    return arr[0] if single else arr


class Field:
    """A tensor field on a chart, evaluated as jets at a batch of points.

    ``jetfn(points, order)`` must return a :class:`Jet` of shape
    ``(B, *shape)``.  Results are memoised per point set, and a cached
    higher-order jet serves lower-order requests by truncation.
    """

    _CACHE_SIZE = 12

    def __init__(self, jetfn: Callable, shape: tuple, nvars: int, name: str = "field"):
        self._jetfn = jetfn
        self.shape = tuple(shape)
        self.nvars = int(nvars)
        self.name = name
        self._cache: OrderedDict = OrderedDict()

    def __repr__(self) -> str:
        return f"Field({self.name!r}, shape={self.shape}, nvars={self.nvars})"

    @classmethod
    def formula(cls, fn: Callable, shape: tuple, nvars: int, name: str = "field") -> "Field":
        """Field from ``fn(coords) -> nested values``; coords are jets or floats."""
        shape = tuple(shape)

        def jetfn(points, order):
            seeds = jets.variables(points, order)
            j = jets.stack(fn(seeds), order, nvars)
            full = (points.shape[0],) + shape + (j.coeffs.shape[-1],)
            return Jet(np.array(np.broadcast_to(j.coeffs, full)), order, nvars)

        return cls(jetfn, shape, nvars, name)

    @classmethod
    def constant(cls, value, nvars: int, name: str = "constant") -> "Field":
        value = np.asarray(value, dtype=float)

        def jetfn(points, order):
            c = Jet.constant(value, order, nvars).coeffs
            return Jet(np.array(np.broadcast_to(c, (points.shape[0],) + c.shape)), order, nvars)

        return cls(jetfn, value.shape, nvars, name)

    @classmethod
    def zero(cls, shape: tuple, nvars: int) -> "Field":
        return cls.constant(np.zeros(shape), nvars, "zero")

    def jet(self, points, order: int) -> Jet:
        points, _ = as_points(points, self.nvars)
        key = (points.shape, points.tobytes())
        hit = self._cache.get(key)
        if hit is not None and hit.order >= order:
            self._cache.move_to_end(key)
            return hit.truncate(order) if hit.order > order else hit
        j = self._jetfn(points, order)
        if j.shape != (points.shape[0],) + self.shape:
            raise ValueError(f"{self.name}: evaluator returned shape {j.shape}")
        self._cache[key] = j
        if len(self._cache) > self._CACHE_SIZE:
            self._cache.popitem(last=False)
        return j

    def __call__(self, points) -> np.ndarray:
        points, single = as_points(points, self.nvars)
        return _squeeze(self.jet(points, 0).value, single)

    def scaled(self, s: float, name: str | None = None) -> "Field":
        return Field(lambda P, k: self.jet(P, k) * s, self.shape, self.nvars, name or f"{s}*{self.name}")


@dataclass(frozen=True, eq=False)
class ChartManifold:
    """A coordinate chart with a Riemannian metric and named tensor fields."""

    dim: int
    metric: Field
    fields: dict = field(default_factory=dict)
    sample_box: np.ndarray | None = None
    name: str = "chart"

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("chart dimension must be >= 2")
        if self.metric.shape != (self.dim, self.dim) or self.metric.nvars != self.dim:
            raise ValueError("metric field must be dim x dim on a dim-variable chart")
        box = self.sample_box
        if box is None:
            box = np.tile([-1.0, 1.0], (self.dim, 1))
        object.__setattr__(self, "sample_box", np.asarray(box, dtype=float))

    def sample_points(self, count: int, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lo, hi = self.sample_box[:, 0], self.sample_box[:, 1]
        return lo + (hi - lo) * rng.random((count, self.dim))

    def metric_jet(self, points, order: int) -> Jet:
        return self.metric.jet(points, order)

    def register(self, name: str, fld: Field) -> None:
        self.fields[name] = fld


# -- jet-level calculus ----------------------------------------------------------


def inverse_metric_jet(g: Jet) -> Jet:
    try:
        return jets.inv(g, METRIC_COND_LIMIT)
    except np.linalg.LinAlgError as exc:
        raise ChartDegeneracyError(str(exc)) from None


def christoffel_jet(g: Jet) -> Jet:
    """Γ^k_{ij} from a metric jet of order k; result has order k - 1."""
    dg = g.grad()  # dg[i, j, l] = ∂_l g_ij
    lower = 0.5 * (
        jets.einsum("...jli->...lij", dg)
        + jets.einsum("...ilj->...lij", dg)
        - jets.einsum("...ijl->...lij", dg)
    )
    ginv = inverse_metric_jet(g.truncate(g.order - 1))
    return jets.einsum("...kl,...lij->...kij", ginv, lower)


def riemann_jet(gamma: Jet) -> Jet:
    """R^l_{ijk} from Christoffel jets of order k; result has order k - 1."""
    dG = gamma.grad()  # dG[l, j, k, i] = ∂_i Γ^l_jk
    G = gamma.truncate(gamma.order - 1)
    return (
        jets.einsum("...ljki->...lijk", dG)
        - jets.einsum("...likj->...lijk", dG)
        + jets.einsum("...lim,...mjk->...lijk", G, G)
        - jets.einsum("...ljm,...mik->...lijk", G, G)
    )


def ricci_from_riemann(riem):
    if isinstance(riem, Jet):
        return jets.einsum("...iijk->...jk", riem)
    return np.einsum("...iijk->...jk", riem)


def lower_riemann(riem, g):
    """R(X,Y,Z,W) array ``[..., i, j, k, w]`` = g_{lw} R^l_{ijk}."""
    if isinstance(riem, Jet):
        return jets.einsum("...lijk,...lw->...ijkw", riem, g)
    return np.einsum("...lijk,...lw->...ijkw", riem, g)


def lie_bracket_jet(X: Jet, Y: Jet) -> Jet:
    k = X.order - 1
    return (
        jets.einsum("...b,...ab->...a", X.truncate(k), Y.grad())
        - jets.einsum("...b,...ab->...a", Y.truncate(k), X.grad())
    )


def d_half_jet(alpha: Jet) -> Jet:
    G = alpha.grad()  # G[b, a] = ∂_a α_b
    return 0.5 * (jets.einsum("...ba->...ab", G) - G)


def d_two_form_jet(beta: Jet) -> Jet:
    G = beta.grad()  # G[b, c, a] = ∂_a β_bc
    return (
        jets.einsum("...bca->...abc", G) + jets.einsum("...cab->...abc", G) + G
    ) * (1.0 / 3.0)


def lie_jet(X: Jet, T: Jet, kind: str) -> Jet:
    """Lie derivative of a tensor jet along a vector jet (order drops by one)."""
    k = X.order - 1
    Xt, dX = X.truncate(k), X.grad()  # dX[c, a] = ∂_a X^c
    Tt, dT = T.truncate(k), T.grad()
    if kind == "scalar":
        return jets.einsum("...c,...c->...", Xt, dT)
    if kind == "vector":
        return lie_bracket_jet(X, T)
    if kind == "covector":
        return jets.einsum("...c,...ac->...a", Xt, dT) + jets.einsum("...c,...ca->...a", Tt, dX)
    if kind in ("tensor02", "2form"):
        return (
            jets.einsum("...c,...abc->...ab", Xt, dT)
            + jets.einsum("...cb,...ca->...ab", Tt, dX)
            + jets.einsum("...ac,...cb->...ab", Tt, dX)
        )
    if kind == "tensor11":
        return (
            jets.einsum("...c,...abc->...ab", Xt, dT)
            - jets.einsum("...cb,...ac->...ab", Tt, dX)
            + jets.einsum("...ac,...cb->...ab", Tt, dX)
        )
    raise ValueError(f"unsupported valence {kind!r}")


_VALENCE = {
    "scalar": (0, 0),
    "vector": (1, 0),
    "covector": (0, 1),
    "tensor11": (1, 1),
    "tensor02": (0, 2),
    "2form": (0, 2),
    "tensor13": (1, 3),
}


def covariant_jet(T: Jet, gamma: Jet, kind) -> Jet:
    """∇T with the derivative index first; ``kind`` is a name or ``(up, down)``."""
    up, down = _VALENCE[kind] if isinstance(kind, str) else kind
    rank = up + down
    k = T.order - 1
    G = gamma.truncate(k) if gamma.order > k else gamma
    Tt = T.truncate(k)
    letters = string.ascii_lowercase[1:rank + 1]  # 'a' = derivative, 'z' = dummy
    out = jets.einsum(f"...{letters}a->...a{letters}", T.grad())
    for p in range(rank):
        swapped = letters[:p] + "z" + letters[p + 1:]
        if p < up:
            out = out + jets.einsum(f"...{letters[p]}az,...{swapped}->...a{letters}", G, Tt)
        else:
            out = out - jets.einsum(f"...za{letters[p]},...{swapped}->...a{letters}", G, Tt)
    return out


def nijenhuis_jet(S: Jet, X: Jet, Y: Jet) -> Jet:
    """N_S(X,Y) = S²[X,Y] + [SX,SY] - S([SX,Y] + [X,SY]) (order drops by one)."""
    k = S.order - 1
    SX = jets.einsum("...ab,...b->...a", S, X)
    SY = jets.einsum("...ab,...b->...a", S, Y)
    St = S.truncate(k)
    S2 = jets.einsum("...ab,...bc->...ac", St, St)
    return (
        jets.einsum("...ab,...b->...a", S2, lie_bracket_jet(X, Y))
        + lie_bracket_jet(SX, SY)
        - jets.einsum("...ab,...b->...a", St, lie_bracket_jet(SX, Y) + lie_bracket_jet(X, SY))
    )


# -- pointwise operations ---------------------------------------------------------


@dataclass(frozen=True)
class CurvatureSuite:
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray


@dataclass(frozen=True)
class PointFrame:
    point: np.ndarray
    basis: np.ndarray  # rows are the frame vectors


def _metric_values(m: ChartManifold, P) -> np.ndarray:
    g = m.metric_jet(P, 0).value
    if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > 1e-12 * max(1.0, np.max(np.abs(g))):
        raise ChartDegeneracyError("metric is not symmetric")
    if np.any(np.linalg.eigvalsh(g)[..., 0] <= 0):
        raise ChartDegeneracyError("metric is not positive definite")
    return g


def christoffel(m: ChartManifold, p) -> np.ndarray:
    P, single = as_points(p, m.dim)
    _metric_values(m, P)
    return _squeeze(christoffel_jet(m.metric_jet(P, 1)).value, single)


def curvature_jets(m: ChartManifold, P, order: int = 0):
    """(g, Γ, R) jets with R of the requested order (metric order + 2)."""
    g = m.metric_jet(P, order + 2)
    gamma = christoffel_jet(g)
    return g, gamma, riemann_jet(gamma)


def curvature_suite(m: ChartManifold, p) -> CurvatureSuite:
    P, single = as_points(p, m.dim)
    _metric_values(m, P)
    g, gamma, riem = curvature_jets(m, P, 0)
    R = riem.value
    ric = ricci_from_riemann(R)
    ginv = np.linalg.inv(g.value)
    s = np.einsum("...jk,...jk->...", ginv, ric)
    return CurvatureSuite(*(_squeeze(a, single) for a in (gamma.value, R, ric, s)))


def sectional(m: ChartManifold, p, u, v) -> np.ndarray:
    P, single = as_points(p, m.dim)
    u = np.broadcast_to(np.asarray(u, dtype=float), P.shape)
    v = np.broadcast_to(np.asarray(v, dtype=float), P.shape)
    g, _, riem = curvature_jets(m, P, 0)
    gv = g.value
    Rl = lower_riemann(riem.value, gv)
    num = np.einsum("...ijkw,...i,...j,...k,...w->...", Rl, u, v, v, u)
    uu = np.einsum("...i,...ij,...j->...", u, gv, u)
    vv = np.einsum("...i,...ij,...j->...", v, gv, v)
    uv = np.einsum("...i,...ij,...j->...", u, gv, v)
    den = uu * vv - uv**2
    if np.any(den < 1e-12 * uu * vv):
        raise ValueError("degenerate plane: vectors are (nearly) linearly dependent")
    return _squeeze(num / den, single)


def _vector_jet(V, P, order, nvars):
    if isinstance(V, Field):
        return V.jet(P, order)
    V = np.broadcast_to(np.asarray(V, dtype=float), P.shape)
    return Jet.constant(V, order, nvars)


def lie_bracket(m: ChartManifold, X: Field, Y: Field, p) -> np.ndarray:
    P, single = as_points(p, m.dim)
    return _squeeze(lie_bracket_jet(_vector_jet(X, P, 1, m.dim), _vector_jet(Y, P, 1, m.dim)).value, single)


def exterior_derivative_half(m: ChartManifold, alpha: Field, p) -> np.ndarray:
    P, single = as_points(p, m.dim)
    return _squeeze(d_half_jet(alpha.jet(P, 1)).value, single)


def lie_derivative(m: ChartManifold, X: Field, T: Field, p, kind: str | None = None) -> np.ndarray:
    """Lie derivative of ``T``; ``kind`` defaults from the field shape
    (``()`` scalar, ``(d,)`` covector, ``(d, d)`` tensor02)."""
    P, single = as_points(p, m.dim)
    if kind is None:
        kind = {0: "scalar", 1: "covector", 2: "tensor02"}.get(len(T.shape))
    if kind not in ("scalar", "vector", "covector", "tensor02", "2form", "tensor11"):
        raise ValueError(f"unsupported valence {kind!r}")
    return _squeeze(lie_jet(X.jet(P, 1), T.jet(P, 1), kind).value, single)


def covariant_derivative(m: ChartManifold, T: Field, p, kind: str) -> np.ndarray:
    if kind not in _VALENCE:
        raise ValueError(f"unsupported valence {kind!r}")
    P, single = as_points(p, m.dim)
    gamma = christoffel_jet(m.metric_jet(P, 1))
    return _squeeze(covariant_jet(T.jet(P, 1), gamma, kind).value, single)


def nijenhuis(m: ChartManifold, S: Field, X, Y, p) -> np.ndarray:
    """Nijenhuis torsion at ``p``; plain vectors are extended with constant coefficients."""
    P, single = as_points(p, m.dim)
    Sj = S.jet(P, 1)
    return _squeeze(
        nijenhuis_jet(Sj, _vector_jet(X, P, 1, m.dim), _vector_jet(Y, P, 1, m.dim)).value, single
    )


def gram_schmidt(g: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Orthonormalise rows of ``vectors`` w.r.t. ``g`` (batched over leading axes)."""
    g = np.asarray(g, dtype=float)
    vectors = np.broadcast_to(np.asarray(vectors, dtype=float), g.shape[:-2] + np.shape(vectors)[-2:])
    out = np.zeros(vectors.shape)
    for i in range(vectors.shape[-2]):
        v = vectors[..., i, :].copy()
        for j in range(i):
            e = out[..., j, :]
            v = v - np.einsum("...a,...ab,...b->...", v, g, e)[..., None] * e
        norm2 = np.einsum("...a,...ab,...b->...", v, g, v)
        ref = np.einsum("...a,...ab,...b->...", vectors[..., i, :], g, vectors[..., i, :])
        if np.any(norm2 <= 1e-24 * np.maximum(ref, 1e-300)):
            raise ValueError("linearly dependent vectors in Gram-Schmidt")
        out[..., i, :] = v / np.sqrt(norm2)[..., None]
    return out


def orthonormal_frame(m: ChartManifold, p, vectors=None) -> PointFrame:
    P, single = as_points(p, m.dim)
    g = _metric_values(m, P)
    if vectors is None:
        vectors = np.eye(m.dim)
    basis = gram_schmidt(g, vectors)
    return PointFrame(_squeeze(P, single), _squeeze(basis, single))


def frame_components(T: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """Components ``T(e_i, e_j)`` of a (0,2) tensor in a frame (rows = vectors)."""
    return np.einsum("...ia,...ab,...jb->...ij", frame, T, frame)


def bianchi_residuals(m: ChartManifold, p) -> dict:
    """Normalised first and second Bianchi residuals and pair symmetries."""
    P, _ = as_points(p, m.dim)
    g = m.metric_jet(P, 3)
    gamma = christoffel_jet(g)
    riem = riemann_jet(gamma)  # order 1
    R = riem.value
    Rl = lower_riemann(R, g.value)
    scale = 1.0 + np.max(np.abs(Rl))
    first = R + np.einsum("...lijk->...ljki", R) + np.einsum("...lijk->...lkij", R)
    nabla = covariant_jet(riem, gamma, "tensor13").value  # [m, l, i, j, k]
    second = (
        nabla
        + np.einsum("...iljmk->...mlijk", nabla)
        + np.einsum("...jlmik->...mlijk", nabla)
    )
    dscale = 1.0 + np.max(np.abs(nabla))
    return {
        "antisym_12": float(np.max(np.abs(Rl + np.swapaxes(Rl, -4, -3))) / scale),
        "antisym_34": float(np.max(np.abs(Rl + np.swapaxes(Rl, -2, -1))) / scale),
        "pair_exchange": float(np.max(np.abs(Rl - np.einsum("...ijkw->...kwij", Rl))) / scale),
        "first_bianchi": float(np.max(np.abs(first)) / scale),
        "second_bianchi": float(np.max(np.abs(second)) / dscale),
    }
