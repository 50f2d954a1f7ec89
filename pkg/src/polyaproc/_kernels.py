"""Hot loops with a compiled path and a pure-numpy fallback.

Setting ``POLYAPROC_DISABLE_NUMBA=1`` (or not having numba installed)
selects the numpy implementations.  Both simulation paths consume the same
uniforms with the same comparison rule, so they produce identical draws.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("POLYAPROC_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap(args[0]) if args and callable(args[0]) else wrap

STATUS_OK = 0
STATUS_NEGATIVE = 1


# ---------------------------------------------------------------------------
# trajectory blocks


def advance_block_numpy(x0, increments, uniforms, out, status, neg_tol=0.0):
    """Run ``uniforms.shape[0]`` trajectories from ``x0``.

    At each step the color is the first k with cumulative propensity
    strictly above ``u * total``.  Trials that meet a negative propensity
    stop and get ``STATUS_NEGATIVE``.
    """
    trials, steps = uniforms.shape
    s = x0.shape[0]
    X = np.repeat(x0[None, :], trials, axis=0)
    status[:] = STATUS_OK
    alive = np.ones(trials, dtype=bool)
    for t in range(steps):
        props = X
        neg = (props < -neg_tol).any(axis=1) & alive
        if neg.any():
            status[neg] = STATUS_NEGATIVE
            alive &= ~neg
        clipped = np.where(props < 0, 0, props)
        cum = np.cumsum(clipped, axis=1)
        total = cum[:, -1]
        target = uniforms[:, t] * total
        above = cum > target[:, None]
        has = above.any(axis=1)
        k = np.where(has, above.argmax(axis=1), s - 1 - np.argmax((clipped > 0)[:, ::-1], axis=1))
        X = np.where(alive[:, None], X + increments[k], X)
        if not alive.any():
            break
    out[:] = X
    return out


@njit(cache=True, nogil=True)
def _advance_block_compiled(x0, increments, uniforms, out, status, neg_tol):
    trials, steps = uniforms.shape
    s = x0.shape[0]
    cum = np.empty(s, dtype=x0.dtype)
    x = np.empty(s, dtype=x0.dtype)
    for i in range(trials):
        for j in range(s):
            x[j] = x0[j]
        status[i] = 0
        for t in range(steps):
            acc = x0[0] * 0
            bad = False
            for j in range(s):
                v = x[j]
                if v < -neg_tol:
                    bad = True
                if v < 0:
                    v = v * 0
                acc += v
                cum[j] = acc
            if bad:
                status[i] = 1
                break
            target = uniforms[i, t] * acc
            k = -1
            for j in range(s):
                if cum[j] > target:
                    k = j
                    break
            if k < 0:
                for j in range(s - 1, -1, -1):
                    if x[j] > 0:
                        k = j
                        break
            for j in range(s):
                x[j] += increments[k, j]
        for j in range(s):
            out[i, j] = x[j]
    return out


def advance_block_numba(x0, increments, uniforms, out, status, neg_tol=0.0):
    return _advance_block_compiled(x0, increments, uniforms, out, status, x0.dtype.type(neg_tol))


advance_block = advance_block_numba if HAVE_NUMBA else advance_block_numpy


# ---------------------------------------------------------------------------
# moment recursion g <- g + Phi(g) / (k + tau1 - 1)


def moment_iterate_numpy(indptr, indices, data, g0, evalvec, tau1, ns):
    """Values of <evalvec, g_n> for each n in the sorted array ``ns``."""
    from scipy.sparse import csr_matrix

    d = g0.shape[0]
    M = csr_matrix((data, indices, indptr), shape=(d, d))
    g = g0.astype(np.complex128).copy()
    out = np.empty(len(ns), dtype=np.complex128)
    pos = 0
    n = 1
    while pos < len(ns):
        while pos < len(ns) and ns[pos] == n:
            out[pos] = evalvec @ g
            pos += 1
        if pos >= len(ns):
            break
        g = g + (M @ g) / (n + tau1 - 1.0)
        n += 1
    return out


@njit(cache=True, nogil=True)
def _moment_iterate_compiled(indptr, indices, data, g0, evalvec, tau1, ns):
    d = g0.shape[0]
    g = g0.copy()
    img = np.empty(d, dtype=np.complex128)
    out = np.empty(ns.shape[0], dtype=np.complex128)
    pos = 0
    n = 1
    while pos < ns.shape[0]:
        while pos < ns.shape[0] and ns[pos] == n:
            acc = 0j
            for i in range(d):
                acc += evalvec[i] * g[i]
            out[pos] = acc
            pos += 1
        if pos >= ns.shape[0]:
            break
        for i in range(d):
            acc = 0j
            for p in range(indptr[i], indptr[i + 1]):
                acc += data[p] * g[indices[p]]
            img[i] = acc
        scale = 1.0 / (n + tau1 - 1.0)
        for i in range(d):
            g[i] += img[i] * scale
        n += 1
    return out


def moment_iterate_numba(indptr, indices, data, g0, evalvec, tau1, ns):
    return _moment_iterate_compiled(indptr, indices, data, g0.astype(np.complex128),
                                    evalvec.astype(np.complex128), float(tau1), ns.astype(np.int64))


moment_iterate = moment_iterate_numba if HAVE_NUMBA else moment_iterate_numpy
