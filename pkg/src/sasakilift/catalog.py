"""Catalog of Kähler base charts with soliton data and symmetry fields.

Every entry carries an explicit metric (so metric jets are available to
order 4); potentials, where elementary, are kept as cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .geometry import Field
from .kahler import KahlerStructure, SolitonDatum, from_metric


class CatalogError(ValueError):
    """Unknown entry or invalid entry parameters."""


@dataclass(frozen=True, eq=False)
class BuiltEntry:
    name: str
    params: dict
    ks: KahlerStructure
    soliton: SolitonDatum | None
    symmetries: dict
    potential: Field | None = None
    einstein: float | None = None  # Ric = c g
    holomorphic: float | None = None  # constant holomorphic sectional curvature
    notes: str = ""

    @property
    def n(self) -> int:
        return self.ks.n

    @property
    def label(self) -> str:
        extra = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.name}({extra})"


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    builder: Callable
    defaults: dict
    notes: str
    sample_box: Callable = None
    parameters: tuple = field(default=("n",))

    def build(self, **params) -> BuiltEntry:
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise CatalogError(f"{self.name}: unknown parameter(s) {sorted(unknown)}")
        full = dict(self.defaults)
        full.update({k: v for k, v in params.items() if v is not None})
        n = full.get("n", 1)
        if not isinstance(n, (int, np.integer)) or not 1 <= n <= 4:
            raise CatalogError(f"{self.name}: n must be an integer in 1..4 (got {n!r})")
        if self.name == "cigar" and n != 1:
            raise CatalogError("cigar is defined on C^1 only (n = 1)")
        return self.builder(**full)


def _sum_sq(c):
    return sum(ci * ci for ci in c)


def rotation_field(dim: int, J: np.ndarray) -> Field:
    """V = J x, the diagonal U(1) rotation (−y∂x + x∂y per complex coordinate)."""
    return Field.formula(lambda c: [sum(J[i, j] * c[j] for j in range(dim) if J[i, j]) for i in range(dim)],
                         (dim,), dim, "rotation")


def euler_field(dim: int, scale: float = 1.0) -> Field:
    return Field.formula(lambda c: [scale * ci for ci in c], (dim,), dim, "euler")


def _hermitian_real(A, B, n):
    """Real 2n x 2n metric from h = A + iB in (x1, y1, ...) ordering."""
    M = [[0.0] * (2 * n) for _ in range(2 * n)]
    for j in range(n):
        for k in range(n):
            M[2 * j][2 * k] = A[j][k]
            M[2 * j + 1][2 * k + 1] = A[j][k]
            M[2 * j][2 * k + 1] = B[j][k]
            M[2 * j + 1][2 * k] = -B[j][k]
    return M


def fubini_study_metric(n: int, sign: float = 1.0):
    """Fubini-Study (sign=+1, holomorphic sectional 4) or complex hyperbolic (sign=-1, -4)."""

    def g(c):
        x, y = c[0::2], c[1::2]
        D = 1.0 + sign * _sum_sq(c)
        D2 = D * D
        A = [[((D if j == k else 0.0) - sign * (x[j] * x[k] + y[j] * y[k])) / D2 for k in range(n)]
             for j in range(n)]
        B = [[-sign * (x[j] * y[k] - y[j] * x[k]) / D2 for k in range(n)] for j in range(n)]
        return _hermitian_real(A, B, n)

    return g


def _box(half: float, dim: int) -> np.ndarray:
    return np.tile([-half, half], (dim, 1))


def _flat(n: int) -> BuiltEntry:
    d = 2 * n
    ks = from_metric(Field.constant(np.eye(d), d, "delta"), dim=d, name=f"flat{n}")
    sym = {"rotation": rotation_field(d, ks.J), "euler": euler_field(d)}
    pot = Field.formula(lambda c: 0.5 * _sum_sq(c), (), d, "K")
    return BuiltEntry("flat", {"n": n}, ks, SolitonDatum(Field.zero((d,), d), 0.0), sym, pot, 0.0, 0.0,
                      "flat C^n, identity metric")


def _fubini_study(n: int) -> BuiltEntry:
    d = 2 * n
    ks = from_metric(fubini_study_metric(n, 1.0), dim=d, name=f"fubini-study{n}")
    pot = Field.formula(lambda c: 0.5 * jets.log(1.0 + _sum_sq(c)), (), d, "K")
    c = 2.0 * n + 2.0
    return BuiltEntry("fubini-study", {"n": n}, ks, SolitonDatum(Field.zero((d,), d), c),
                      {"rotation": rotation_field(d, ks.J)}, pot, c, 4.0,
                      "affine chart of CP^n, holomorphic sectional curvature 4, Kähler-Einstein")


def _complex_hyperbolic(n: int) -> BuiltEntry:
    d = 2 * n
    box = _box(0.6 / np.sqrt(n), d)
    ks = from_metric(fubini_study_metric(n, -1.0), dim=d, sample_box=box, name=f"complex-hyperbolic{n}")
    pot = Field.formula(lambda c: -0.5 * jets.log(1.0 - _sum_sq(c)), (), d, "K")
    c = -(2.0 * n + 2.0)
    return BuiltEntry("complex-hyperbolic", {"n": n}, ks, SolitonDatum(Field.zero((d,), d), c),
                      {"rotation": rotation_field(d, ks.J)}, pot, c, -4.0,
                      "unit ball model of CH^n, holomorphic sectional curvature -4, Kähler-Einstein")


def _gaussian(n: int, lam: float) -> BuiltEntry:
    d = 2 * n
    ks = from_metric(Field.constant(np.eye(d), d, "delta"), dim=d, name=f"gaussian{n}")
    pot = Field.formula(lambda c: 0.5 * _sum_sq(c), (), d, "K")
    return BuiltEntry("gaussian", {"n": n, "lam": float(lam)}, ks,
                      SolitonDatum(euler_field(d, float(lam)), float(lam)),
                      {"rotation": rotation_field(d, ks.J)}, pot, 0.0, 0.0,
                      "flat C^n with X = lam * Euler field (Gaussian soliton)")


def cigar_metric(c):
    w = 1.0 / (1.0 + c[0] * c[0] + c[1] * c[1])
    return [[w, 0.0], [0.0, w]]


def _cigar(n: int = 1) -> BuiltEntry:
    ks = from_metric(cigar_metric, dim=2, name="cigar")
    X = Field.formula(lambda c: [-2.0 * c[0], -2.0 * c[1]], (2,), 2, "X")
    return BuiltEntry("cigar", {"n": 1}, ks, SolitonDatum(X, 0.0), {"rotation": rotation_field(2, ks.J)},
                      None, None, None, "steady cigar soliton on C^1, X = -2(x d/dx + y d/dy)")


_ENTRIES = {
    "flat": CatalogEntry("flat", _flat, {"n": 1}, "flat C^n; soliton X = 0, lam = 0; rotation and Euler fields"),
    "fubini-study": CatalogEntry("fubini-study", _fubini_study, {"n": 1},
                                 "CP^n chart (c = 4); Einstein constant 2n+2; rotation field"),
    "complex-hyperbolic": CatalogEntry("complex-hyperbolic", _complex_hyperbolic, {"n": 1},
                                       "CH^n ball (c = -4), samples in |x_i| <= 0.6/sqrt(n); rotation field"),
    "gaussian": CatalogEntry("gaussian", _gaussian, {"n": 1, "lam": 1.0},
                             "Gaussian soliton on C^n with parameter lam; rotation field", parameters=("n", "lam")),
    "cigar": CatalogEntry("cigar", _cigar, {"n": 1}, "steady cigar soliton on C^1; rotation field"),
}


def catalog() -> list:
    return list(_ENTRIES.values())


def lookup(name: str, **params) -> BuiltEntry:
    try:
        entry = _ENTRIES[name]
    except KeyError:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {', '.join(_ENTRIES)}") from None
    return entry.build(**params)
