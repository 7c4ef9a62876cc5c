"""Hot loops of the jet engine.

Two interchangeable implementations of the truncated Taylor product are
provided: a numba ``@njit`` loop and a vectorised numpy path.  The numba
kernel is used whenever numba imports cleanly, unless the environment
variable ``SASAKILIFT_DISABLE_NUMBA`` is set to a truthy value.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("SASAKILIFT_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

try:  # pragma: no cover - exercised implicitly by the import
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLE


def product_numpy(a, b, ii, jj, kk, smat):
    """Truncated product of the rows of ``a`` and ``b`` (both ``(M, N)``)."""
    return (a[:, ii] * b[:, jj]) @ smat


def power_series_numpy(h, coeffs, ii, jj, kk, smat):
    """Evaluate ``sum_k coeffs[:, k] h**k`` by Horner's rule, ``h`` nilpotent."""
    order = coeffs.shape[1] - 1
    out = np.zeros_like(h)
    out[:, 0] = coeffs[:, order]
    for k in range(order - 1, -1, -1):
        out = (out[:, ii] * h[:, jj]) @ smat
        out[:, 0] += coeffs[:, k]
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def product_numba(a, b, ii, jj, kk, n):
        m = a.shape[0]
        out = np.zeros((m, n))
        npairs = ii.shape[0]
        for r in range(m):
            for p in range(npairs):
                out[r, kk[p]] += a[r, ii[p]] * b[r, jj[p]]
        return out

    @njit(cache=True)
    def power_series_numba(h, coeffs, ii, jj, kk, n):
        m = h.shape[0]
        order = coeffs.shape[1] - 1
        npairs = ii.shape[0]
        out = np.zeros((m, n))
        tmp = np.zeros(n)
        for r in range(m):
            for q in range(n):
                out[r, q] = 0.0
            out[r, 0] = coeffs[r, order]
            for k in range(order - 1, -1, -1):
                for q in range(n):
                    tmp[q] = 0.0
                for p in range(npairs):
                    tmp[kk[p]] += out[r, ii[p]] * h[r, jj[p]]
                for q in range(n):
                    out[r, q] = tmp[q]
                out[r, 0] += coeffs[r, k]
        return out

else:  # pragma: no cover
    product_numba = None
    power_series_numba = None


def truncated_product(a, b, table, use_numba=None):
    """Dispatch the truncated product to the selected backend."""
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return product_numba(
            np.ascontiguousarray(a), np.ascontiguousarray(b),
            table.ii, table.jj, table.kk, table.size,
        )
    return product_numpy(a, b, table.ii, table.jj, table.kk, table.smat)


def power_series(h, coeffs, table, use_numba=None):
    """Dispatch the nilpotent power-series evaluation to the selected backend."""
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return power_series_numba(
            np.ascontiguousarray(h), np.ascontiguousarray(coeffs),
            table.ii, table.jj, table.kk, table.size,
        )
    return power_series_numpy(h, coeffs, table.ii, table.jj, table.kk, table.smat)
