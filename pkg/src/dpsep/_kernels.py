"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with identical semantics. The active
backend is chosen once at import time:

    DPSEP_BACKEND=numpy   force the numpy path
    DPSEP_BACKEND=numba   require numba (ImportError if missing)
    (unset)               numba if importable, else numpy

Both paths consume the same pre-drawn random arrays, so results agree
bit-for-bit up to floating-point reduction order.
"""

import os

import numpy as np

_requested = os.environ.get("DPSEP_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(f"DPSEP_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    njit = None
else:
    try:
        from numba import njit
    except ImportError:
        if _requested == "numba":
            raise
        njit = None

BACKEND = "numpy" if njit is None else "numba"


# ---------------------------------------------------------------------------
# Poisson functional representation: exponential-race selection
# ---------------------------------------------------------------------------

def pfr_select_numpy(symbols, ratio, max_ratio, cand, expo):
    """Select the winning candidate of an exponential race, row by row.

    Row ``i`` races candidates ``cand[i, j]`` with arrival times
    ``cumsum(expo[i])``; candidate ``j`` scores ``T_j / ratio[s_i, cand_ij]``.
    Returns ``(K, done)`` with ``K`` 1-based. ``done[i]`` is False when the
    prefix was too short to certify the winner.
    """
    arrivals = np.cumsum(expo, axis=1)
    r = ratio[symbols[:, None], cand]
    with np.errstate(divide="ignore"):
        scores = np.where(r > 0.0, arrivals / np.where(r > 0.0, r, 1.0), np.inf)
    best = np.argmin(scores, axis=1)
    best_score = scores[np.arange(len(symbols)), best]
    done = arrivals[:, -1] >= best_score * max_ratio[symbols]
    return best + 1, done


def _pfr_select_py(symbols, ratio, max_ratio, cand, expo):
    rows, width = cand.shape
    K = np.zeros(rows, dtype=np.int64)
    done = np.zeros(rows, dtype=np.bool_)
    for i in range(rows):
        s = symbols[i]
        t = 0.0
        best = np.inf
        arg = -1
        for j in range(width):
            t += expo[i, j]
            if best < np.inf and t >= best * max_ratio[s]:
                done[i] = True
                break
            r = ratio[s, cand[i, j]]
            if r > 0.0:
                sc = t / r
                if sc < best:
                    best = sc
                    arg = j
        if not done[i] and arg >= 0 and t >= best * max_ratio[s]:
            done[i] = True
        K[i] = arg + 1
    return K, done


# ---------------------------------------------------------------------------
# Log-domain Sinkhorn for small entropic transport problems
# ---------------------------------------------------------------------------

def sinkhorn_numpy(logp, logq, logk, tol, max_iter):
    """Scale ``exp(logk)`` to row law ``exp(logp)`` and column law ``exp(logq)``.

    Returns potentials ``(f, g, iters, err)`` with the plan
    ``exp(f[:, None] + g[None, :] + logk)``; ``err`` is the final max
    row-marginal violation.
    """
    f = np.zeros(logp.shape[0])
    g = np.zeros(logq.shape[0])
    p = np.exp(logp)
    err = np.inf
    it = 0
    while it < max_iter:
        it += 1
        a = logk + g[None, :]
        m = a.max(axis=1)
        f = logp - (m + np.log(np.exp(a - m[:, None]).sum(axis=1)))
        b = logk + f[:, None]
        m = b.max(axis=0)
        g = logq - (m + np.log(np.exp(b - m[None, :]).sum(axis=0)))
        rows = np.exp(f[:, None] + g[None, :] + logk).sum(axis=1)
        err = np.abs(rows - p).max()
        if err < tol:
            break
    return f, g, it, err


def _sinkhorn_py(logp, logq, logk, tol, max_iter):
    ns = logp.shape[0]
    nq = logq.shape[0]
    f = np.zeros(ns)
    g = np.zeros(nq)
    err = np.inf
    it = 0
    while it < max_iter:
        it += 1
        for s in range(ns):
            m = -np.inf
            for j in range(nq):
                v = logk[s, j] + g[j]
                if v > m:
                    m = v
            acc = 0.0
            for j in range(nq):
                acc += np.exp(logk[s, j] + g[j] - m)
            f[s] = logp[s] - (m + np.log(acc))
        for j in range(nq):
            m = -np.inf
            for s in range(ns):
                v = logk[s, j] + f[s]
                if v > m:
                    m = v
            acc = 0.0
            for s in range(ns):
                acc += np.exp(logk[s, j] + f[s] - m)
            g[j] = logq[j] - (m + np.log(acc))
        err = 0.0
        for s in range(ns):
            acc = 0.0
            for j in range(nq):
                acc += np.exp(f[s] + g[j] + logk[s, j])
            d = abs(acc - np.exp(logp[s]))
            if d > err:
                err = d
        if err < tol:
            break
    return f, g, it, err


# ---------------------------------------------------------------------------
# Categorical sampling from the rows of a cumulative table
# ---------------------------------------------------------------------------

def sample_rows_numpy(cdf, rows, u):
    """Draw one column index per request: ``cdf[rows[i]]`` inverted at ``u[i]``."""
    c = cdf[rows]
    idx = (c <= u[:, None]).sum(axis=1)
    return np.minimum(idx, cdf.shape[1] - 1)


def _sample_rows_py(cdf, rows, u):
    out = np.empty(rows.shape[0], dtype=np.int64)
    last = cdf.shape[1] - 1
    for i in range(rows.shape[0]):
        r = rows[i]
        lo = 0
        hi = last
        # first column whose cumulative mass exceeds u
        while lo < hi:
            mid = (lo + hi) // 2
            if cdf[r, mid] <= u[i]:
                lo = mid + 1
            else:
                hi = mid
        out[i] = lo
    return out


if njit is not None:
    pfr_select = njit(cache=True)(_pfr_select_py)
    sinkhorn = njit(cache=True)(_sinkhorn_py)
    sample_rows = njit(cache=True)(_sample_rows_py)
else:
    pfr_select = pfr_select_numpy
    sinkhorn = sinkhorn_numpy
    sample_rows = sample_rows_numpy
