"""Truncated multivariate Taylor series ("jets").

A :class:`Jet` stores the Taylor coefficients of a smooth quantity around a
point, truncated at total degree ``order``.  Coefficients live on the last
axis of ``coeffs`` in graded-lexicographic order, so truncating to a lower
order is a prefix slice.  Any leading axes are independent components (batch
of points, tensor indices); arithmetic acts componentwise and broadcasts like
numpy.

Partial derivatives are recovered as ``coeff(m) * m!``.
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _kernels

MAX_ORDER = 4

MultiIndex = tuple  # tuple of non-negative ints, one per variable


class JetError(ValueError):
    """Invalid jet construction or incompatible jet operands."""


class JetDomainError(JetError):
    """Elementary function evaluated outside its domain."""


@dataclass(frozen=True, eq=False)
class IndexTable:
    order: int
    nvars: int
    indices: tuple
    lookup: dict
    degrees: np.ndarray
    factorials: np.ndarray
    ii: np.ndarray
    jj: np.ndarray
    kk: np.ndarray
    smat: np.ndarray

    @property
    def size(self) -> int:
        return len(self.indices)


def n_coeffs(order: int, nvars: int) -> int:
    return math.comb(nvars + order, order)


def _check_shape(order: int, nvars: int) -> None:
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_ORDER:
        raise JetError(f"jet order must be an integer in [0, {MAX_ORDER}], got {order!r}")
    if not isinstance(nvars, (int, np.integer)) or nvars < 1:
        raise JetError(f"number of variables must be >= 1, got {nvars!r}")


@lru_cache(maxsize=None)
def multi_indices(order: int, nvars: int) -> tuple:
    """All multi-indices of total degree <= order, graded-lex ordered."""
    _check_shape(order, nvars)
    out = []
    for d in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            m = [0] * nvars
            for v in combo:
                m[v] += 1
            out.append(tuple(m))
    return tuple(out)


@lru_cache(maxsize=None)
def index_table(order: int, nvars: int) -> IndexTable:
    idx = multi_indices(order, nvars)
    lookup = {m: i for i, m in enumerate(idx)}
    degrees = np.array([sum(m) for m in idx], dtype=np.int64)
    factorials = np.array([math.prod(math.factorial(e) for e in m) for m in idx], dtype=float)
    ii, jj, kk = [], [], []
    for i, mi in enumerate(idx):
        for j, mj in enumerate(idx):
            if degrees[i] + degrees[j] <= order:
                ii.append(i)
                jj.append(j)
                kk.append(lookup[tuple(a + b for a, b in zip(mi, mj))])
    ii = np.array(ii, dtype=np.int64)
    jj = np.array(jj, dtype=np.int64)
    kk = np.array(kk, dtype=np.int64)
    smat = np.zeros((len(kk), len(idx)))
    smat[np.arange(len(kk)), kk] = 1.0
    return IndexTable(order, nvars, idx, lookup, degrees, factorials, ii, jj, kk, smat)


@lru_cache(maxsize=None)
def _diff_map(order: int, nvars: int, v: int):
    src_table = index_table(order, nvars)
    dst = multi_indices(order - 1, nvars)
    src = np.empty(len(dst), dtype=np.int64)
    factor = np.empty(len(dst))
    for q, m in enumerate(dst):
        up = list(m)
        up[v] += 1
        src[q] = src_table.lookup[tuple(up)]
        factor[q] = up[v]
    return src, factor


@lru_cache(maxsize=None)
def _embed_map(order: int, nvars: int, nvars_to: int, positions: tuple):
    dst = index_table(order, nvars_to).lookup
    out = np.empty(n_coeffs(order, nvars), dtype=np.int64)
    for q, m in enumerate(multi_indices(order, nvars)):
        full = [0] * nvars_to
        for v, p in enumerate(positions):
            full[p] = m[v]
        out[q] = dst[tuple(full)]
    return out


def _is_scalar_like(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating, np.ndarray))


class Jet:
    """Truncated Taylor expansion of a (possibly array-valued) quantity."""

    __slots__ = ("coeffs", "order", "nvars")
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, coeffs, order: int, nvars: int):
        _check_shape(order, nvars)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 0 or coeffs.shape[-1] != n_coeffs(order, nvars):
            raise JetError(
                f"expected {n_coeffs(order, nvars)} coefficients for order={order}, "
                f"nvars={nvars}; got trailing axis {coeffs.shape[-1:] or 'scalar'}"
            )
        self.coeffs = coeffs
        self.order = int(order)
        self.nvars = int(nvars)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, nvars: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros(value.shape + (n_coeffs(order, nvars),))
        coeffs[..., 0] = value
        return cls(coeffs, order, nvars)

    def _new(self, coeffs) -> "Jet":
        return Jet(coeffs, self.order, self.nvars)

    @property
    def table(self) -> IndexTable:
        return index_table(self.order, self.nvars)

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[..., 0]

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, nvars={self.nvars}, shape={self.shape})"

    def coeff(self, m) -> np.ndarray:
        m = tuple(int(e) for e in m)
        if len(m) != self.nvars or min(m) < 0:
            raise JetError(f"multi-index {m} does not match {self.nvars} variables")
        if sum(m) > self.order:
            raise JetError(f"multi-index degree {sum(m)} exceeds jet order {self.order}")
        return self.coeffs[..., self.table.lookup[m]]

    def partial(self, m) -> np.ndarray:
        m = tuple(int(e) for e in m)
        return self.coeff(m) * math.prod(math.factorial(e) for e in m)

    # -- shape manipulation -------------------------------------------------
    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if len([k for k in key if k is not None and k is not Ellipsis]) > self.ndim:
            raise IndexError("too many indices for jet")
        if Ellipsis not in key:
            key = key + (Ellipsis,)
        return self._new(self.coeffs[key + (slice(None),)])

    def __len__(self) -> int:
        return self.shape[0]

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return self._new(self.coeffs.reshape(tuple(shape) + (self.coeffs.shape[-1],)))

    def transpose(self, *axes) -> "Jet":
        if len(axes) == 1 and isinstance(axes[0], tuple):
            axes = axes[0]
        return self._new(np.transpose(self.coeffs, tuple(axes) + (self.ndim,)))

    def swapaxes(self, a: int, b: int) -> "Jet":
        a, b = (x % self.ndim for x in (a, b))
        return self._new(np.swapaxes(self.coeffs, a, b))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        axis = tuple(a % self.ndim for a in np.atleast_1d(axis))
        return self._new(self.coeffs.sum(axis=axis))

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError(f"cannot raise jet order from {self.order} to {order}")
        return Jet(self.coeffs[..., : n_coeffs(order, self.nvars)], order, self.nvars)

    def embed(self, nvars_to: int, positions: Sequence[int]) -> "Jet":
        """Re-express in a larger variable set; old variable i becomes positions[i]."""
        positions = tuple(int(p) for p in positions)
        if len(positions) != self.nvars:
            raise JetError("one target position per variable is required")
        dst = _embed_map(self.order, self.nvars, nvars_to, positions)
        coeffs = np.zeros(self.shape + (n_coeffs(self.order, nvars_to),))
        coeffs[..., dst] = self.coeffs
        return Jet(coeffs, self.order, nvars_to)

    def scale_arguments(self, s) -> "Jet":
        """Jet of x -> f(s * x): the degree-d coefficients pick up s**d.

        ``s`` broadcasts against the leading axes (right-aligned, numpy rules).
        """
        s = np.asarray(s, dtype=float)
        return self._new(self.coeffs * s[..., None] ** self.table.degrees)

    # -- calculus -----------------------------------------------------------
    def diff(self, v: int) -> "Jet":
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        if not 0 <= v < self.nvars:
            raise JetError(f"variable index {v} out of range")
        src, factor = _diff_map(self.order, self.nvars, v)
        return Jet(self.coeffs[..., src] * factor, self.order - 1, self.nvars)

    def grad(self) -> "Jet":
        """Jet of all first partials; the derivative index is appended last."""
        parts = [self.diff(v).coeffs for v in range(self.nvars)]
        return Jet(np.stack(parts, axis=-2), self.order - 1, self.nvars)

    # -- arithmetic ---------------------------------------------------------
    def _check_compatible(self, other: "Jet") -> None:
        if other.order != self.order or other.nvars != self.nvars:
            raise JetError(
                f"jet mismatch: (order={self.order}, nvars={self.nvars}) vs "
                f"(order={other.order}, nvars={other.nvars})"
            )

    def __neg__(self) -> "Jet":
        return self._new(-self.coeffs)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check_compatible(other)
            return self._new(self.coeffs + other.coeffs)
        if _is_scalar_like(other):
            other = np.asarray(other, dtype=float)
            shape = np.broadcast_shapes(self.shape, other.shape)
            coeffs = np.array(np.broadcast_to(self.coeffs, shape + self.coeffs.shape[-1:]))
            coeffs[..., 0] += other
            return self._new(coeffs)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        if isinstance(other, Jet) or _is_scalar_like(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check_compatible(other)
            a, b = np.broadcast_arrays(self.coeffs, other.coeffs)
            n = a.shape[-1]
            out = _kernels.truncated_product(a.reshape(-1, n), b.reshape(-1, n), self.table)
            return self._new(out.reshape(a.shape))
        if _is_scalar_like(other):
            other = np.asarray(other, dtype=float)
            return self._new(self.coeffs * other[..., None])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if _is_scalar_like(other):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise JetDomainError("division by zero")
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other) -> "Jet":
        if _is_scalar_like(other):
            return self.reciprocal() * other
        return NotImplemented

    def __pow__(self, r) -> "Jet":
        if isinstance(r, Jet):
            return (r * self.log()).exp()
        if isinstance(r, (int, np.integer)) or (isinstance(r, float) and r.is_integer()):
            r = int(r)
            if r < 0:
                return self.reciprocal() ** (-r)
            result = Jet.constant(np.ones(self.shape), self.order, self.nvars)
            base = self
            while r:
                if r & 1:
                    result = result * base
                r >>= 1
                if r:
                    base = base * base
            return result
        r = float(r)
        a0 = self.value
        if np.any(a0 <= 0):
            raise JetDomainError("non-integer power requires a positive constant term")
        k = np.arange(self.order + 1)
        binom = np.array([math.prod(r - j for j in range(i)) / math.factorial(i) for i in k])
        return self._series(binom * a0[..., None] ** (r - k))

    def __rpow__(self, base) -> "Jet":
        return (self * np.log(base)).exp()

    # -- elementary functions -------------------------------------------------
    def _series(self, taylor) -> "Jet":
        """Compose with a univariate series sum_k taylor[..., k] t**k around the value."""
        h = np.array(self.coeffs)
        h[..., 0] = 0.0
        n = h.shape[-1]
        taylor = np.broadcast_to(taylor, self.shape + (self.order + 1,))
        out = _kernels.power_series(h.reshape(-1, n), taylor.reshape(-1, self.order + 1), self.table)
        return self._new(out.reshape(h.shape))

    def reciprocal(self) -> "Jet":
        a0 = self.value
        if np.any(a0 == 0):
            raise JetDomainError("division by a jet with zero constant term")
        k = np.arange(self.order + 1)
        return self._series((-1.0) ** k / a0[..., None] ** (k + 1))

    def exp(self) -> "Jet":
        k = np.arange(self.order + 1)
        fact = np.array([math.factorial(i) for i in k], dtype=float)
        return self._series(np.exp(self.value)[..., None] / fact)

    def log(self) -> "Jet":
        a0 = self.value
        if np.any(a0 <= 0):
            raise JetDomainError("log requires a positive constant term")
        k = np.arange(1, self.order + 1)
        rest = (-1.0) ** (k + 1) / (k * a0[..., None] ** k)
        return self._series(np.concatenate([np.log(a0)[..., None], rest], axis=-1))

    def sqrt(self) -> "Jet":
        if np.any(self.value <= 0):
            raise JetDomainError("sqrt requires a positive constant term")
        return self ** 0.5

    def sin(self) -> "Jet":
        return self._trig(0)

    def cos(self) -> "Jet":
        return self._trig(1)

    def _trig(self, shift: int) -> "Jet":
        a0 = self.value
        cyc = [np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)]
        terms = [cyc[(k + shift) % 4] / math.factorial(k) for k in range(self.order + 1)]
        return self._series(np.stack(terms, axis=-1))


# -- module-level API -----------------------------------------------------------


def seed_variable(i: int, value, order: int, nvars: int) -> Jet:
    """Jet of the coordinate function x^i around ``value`` (scalar or array)."""
    _check_shape(order, nvars)
    if not 0 <= i < nvars:
        raise JetError(f"variable index {i} out of range for {nvars} variables")
    jet = Jet.constant(value, order, nvars)
    if order >= 1:
        jet.coeffs[..., 1 + i] = 1.0
    return jet


def variables(point, order: int) -> list:
    """Seed every coordinate of ``point`` (shape ``(..., nvars)``)."""
    point = np.asarray(point, dtype=float)
    nvars = point.shape[-1]
    return [seed_variable(i, point[..., i], order, nvars) for i in range(nvars)]


def extract_partial(j: Jet, m) -> np.ndarray:
    return j.partial(m)


def _as_coeffs(obj, order: int, nvars: int):
    """Nested sequences of jets/numbers -> (coeffs array, tensor ndim)."""
    if isinstance(obj, Jet):
        if obj.order != order or obj.nvars != nvars:
            raise JetError("mixed jet shapes in a stacked structure")
        return obj.coeffs, 0
    if isinstance(obj, (list, tuple)) or (isinstance(obj, np.ndarray) and obj.dtype == object):
        parts = [_as_coeffs(o, order, nvars) for o in obj]
        tnd = {p[1] for p in parts}
        if len(tnd) != 1:
            raise JetError("ragged nested structure")
        (tnd,) = tnd
        arrays = np.broadcast_arrays(*[p[0] for p in parts])
        return np.stack(arrays, axis=-(tnd + 2)), tnd + 1
    value = np.asarray(obj, dtype=float)
    if value.ndim:
        # a numeric array is a tensor of constants
        return Jet.constant(value, order, nvars).coeffs, value.ndim
    return Jet.constant(value, order, nvars).coeffs, 0


def stack(obj, order: int, nvars: int) -> Jet:
    """Assemble a jet from nested sequences of jets and numbers."""
    coeffs, _ = _as_coeffs(obj, order, nvars)
    return Jet(coeffs, order, nvars)


def derivative_tensor(f: Callable, p, order: int) -> np.ndarray:
    """All partials of every output of ``f`` at ``p`` up to ``order``.

    Entry ``[..., q]`` is the partial along ``multi_indices(order, dim)[q]``.
    """
    p = np.asarray(p, dtype=float)
    jet = stack(f(variables(p, order)), order, p.shape[-1])
    return jet.coeffs * jet.table.factorials


def _lift(x, fname):
    if isinstance(x, Jet):
        return getattr(x, fname)()
    return getattr(np, fname)(x)


def exp(x):
    return _lift(x, "exp")


def log(x):
    return _lift(x, "log")


def sqrt(x):
    return _lift(x, "sqrt")


def sin(x):
    return _lift(x, "sin")


def cos(x):
    return _lift(x, "cos")


def power(x, r):
    return x ** r


# -- tensor contraction -----------------------------------------------------------


def _pair(sub_a: str, a, sub_b: str, b, sub_out: str, spare: str):
    if isinstance(a, Jet) and isinstance(b, Jet):
        a._check_compatible(b)
        t = a.table
        ga = a.coeffs[..., t.ii]
        gb = b.coeffs[..., t.jj]
        raw = np.einsum(f"{sub_a}{spare},{sub_b}{spare}->{sub_out}{spare}", ga, gb, optimize=True)
        return Jet(raw @ t.smat, a.order, a.nvars)
    if isinstance(a, Jet):
        raw = np.einsum(f"{sub_a}{spare},{sub_b}->{sub_out}{spare}", a.coeffs, b, optimize=True)
        return Jet(raw, a.order, a.nvars)
    if isinstance(b, Jet):
        raw = np.einsum(f"{sub_a},{sub_b}{spare}->{sub_out}{spare}", a, b.coeffs, optimize=True)
        return Jet(raw, b.order, b.nvars)
    return np.einsum(f"{sub_a},{sub_b}->{sub_out}", a, b, optimize=True)


def _letters(sub: str) -> set:
    return set(sub.replace("...", ""))


def einsum(subscripts: str, *operands):
    """``numpy.einsum`` over jets: products are truncated Taylor products.

    An explicit ``->`` output is required.  Operands may mix jets and plain
    arrays; plain arrays act as constants.
    """
    if "->" not in subscripts:
        raise JetError("jet einsum needs an explicit output specification")
    ins, out = subscripts.replace(" ", "").split("->")
    subs = ins.split(",")
    if len(subs) != len(operands):
        raise JetError("operand count does not match subscripts")
    used = set("".join(subs) + out)
    spare = next(c for c in string.ascii_letters if c not in used)
    ops = [o if isinstance(o, Jet) else np.asarray(o, dtype=float) for o in operands]
    if len(ops) == 1:
        o = ops[0]
        if isinstance(o, Jet):
            return Jet(np.einsum(f"{subs[0]}{spare}->{out}{spare}", o.coeffs), o.order, o.nvars)
        return np.einsum(f"{subs[0]}->{out}", o)
    cur, cur_sub = ops[0], subs[0]
    for k in range(1, len(ops)):
        later = set(out)
        for s in subs[k + 1:]:
            later |= _letters(s)
        letters = _letters(cur_sub) | _letters(subs[k])
        keep = "".join(sorted(c for c in letters if c in later))
        ell = "..." if ("..." in cur_sub or "..." in subs[k]) else ""
        tgt = out if k == len(ops) - 1 else ell + keep
        cur = _pair(cur_sub, cur, subs[k], ops[k], tgt, spare)
        cur_sub = tgt
    return cur


def inv(G: Jet, cond_limit: float = 1e12) -> Jet:
    """Jet of the inverse of a matrix-valued jet (last two axes)."""
    G0 = G.value
    cond = np.linalg.cond(G0)
    if np.any(~np.isfinite(cond)) or np.any(cond > cond_limit):
        raise np.linalg.LinAlgError(f"matrix condition number {np.max(cond):.3e} exceeds {cond_limit:.0e}")
    G0inv = np.linalg.inv(G0)
    H = Jet(G.coeffs.copy(), G.order, G.nvars)
    H.coeffs[..., 0] = 0.0
    M = -einsum("...ij,...jk->...ik", G0inv, H)
    term = Jet.constant(G0inv, G.order, G.nvars)
    acc = term
    for _ in range(G.order):
        term = einsum("...ij,...jk->...ik", M, term)
        acc = acc + term
    return acc
