"""Block-level perception measures and randomized checks of their regularity.

A family maps ``(n, P, Q)`` with P, Q laws on S^n (flat arrays in
lexicographic block order) to a value in ``[0, inf]``. Perception
constraints compare ``d_n / n`` against a budget, so :func:`tv_family`
deliberately leaves ``d_n`` unnormalized.
"""

import json
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .probcore import _probs, block_marginals, tv


@dataclass(frozen=True)
class PerceptionFamily:
    name: str
    eval_n: Callable[[int, np.ndarray, np.ndarray], float]
    c_max: float
    supports_block: bool
    alphabet_size: int = None

    def __post_init__(self):
        if self.supports_block and not np.isfinite(self.c_max):
            raise ValueError("block-capable family needs a finite continuity constant")

    def __call__(self, n, p, q):
        return float(self.eval_n(n, _probs(p), _probs(q)))

    def d1(self, p, q):
        return self(1, p, q)


def _tv_block(n, p, q):
    return tv(p, q)


def tv_family():
    """Total variation on S^n; c_max = 1 by the triangle inequality."""
    return PerceptionFamily("tv", _tv_block, 1.0, True)


def scaled_tv_family():
    """``d_n = n * TV``: the alternative normalization, kept for comparison.

    Note this family is *not* sub-decomposable: with a single differing
    segment the left side scales with the full length n.
    """
    return PerceptionFamily("scaled_tv", lambda n, p, q: n * tv(p, q), 1.0, True)


def w2_squared_1d(points, p, q):
    """Squared 2-Wasserstein distance between two laws on real ``points``.

    Uses the monotone (quantile) coupling, which is optimal on the line.
    """
    points = np.asarray(points, dtype=float)
    order = np.argsort(points, kind="stable")
    x = points[order]
    cp = np.cumsum(np.asarray(p, dtype=float)[order])
    cq = np.cumsum(np.asarray(q, dtype=float)[order])
    cp[-1] = cq[-1] = 1.0
    levels = np.union1d(cp, cq)
    levels = levels[(levels > 0.0) & (levels <= 1.0)]
    edges = np.concatenate(([0.0], levels))
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    xi = x[np.minimum(np.searchsorted(cp, mids, side="left"), x.size - 1)]
    yi = x[np.minimum(np.searchsorted(cq, mids, side="left"), x.size - 1)]
    return float(np.sum(widths * (xi - yi) ** 2))


def is_product_law(law, k, n, tol=1e-9):
    marg = block_marginals(law, k, n)
    prod = np.ones(1)
    for t in range(n):
        prod = np.outer(prod, marg[t]).ravel()
    return bool(np.abs(prod - np.asarray(law)).max() <= tol), marg


def w2sq_family(embedding):
    """Squared W2 under a real embedding of the symbols.

    Above n = 1 only product laws are accepted; then the value is the sum
    of per-coordinate values (exact for separable quadratic cost).
    """
    emb = np.asarray(embedding, dtype=float)
    if emb.ndim != 1 or not np.all(np.isfinite(emb)):
        raise ValueError("embedding must be a finite real vector")
    k = emb.size
    diam = float(emb.max() - emb.min())

    def eval_n(n, p, q):
        if n == 1:
            return w2_squared_1d(emb, p, q)
        ok_p, mp = is_product_law(p, k, n)
        ok_q, mq = is_product_law(q, k, n)
        if not (ok_p and ok_q):
            raise ValueError("w2sq block evaluation needs product laws when n > 1")
        return sum(w2_squared_1d(emb, mp[t], mq[t]) for t in range(n))

    return PerceptionFamily("w2sq", eval_n, diam**2, False, alphabet_size=k)


# ---------------------------------------------------------------------------
# randomized checks
# ---------------------------------------------------------------------------

SLACK = 1e-9


@dataclass
class CheckReport:
    family: str
    assumption: str
    trials: int
    worst_margin: float
    passed: bool
    violations: int = 0

    def to_record(self):
        rec = asdict(self)
        rec["pass"] = rec.pop("passed")
        rec.pop("violations")
        return rec

    def to_json(self):
        return json.dumps(self.to_record())


def random_law(rng, size):
    """Draw a law on ``size`` symbols, mixing dense, sparse and degenerate cases."""
    kind = rng.integers(4)
    if kind == 0:
        v = rng.dirichlet(np.ones(size))
    elif kind == 1:
        v = rng.dirichlet(np.full(size, 0.3))
    elif kind == 2:
        v = np.zeros(size)
        v[rng.integers(size)] = 1.0
    else:
        v = rng.dirichlet(np.ones(size))
        v[rng.random(size) < 0.4] = 0.0
        if v.sum() == 0.0:
            v[rng.integers(size)] = 1.0
        v /= v.sum()
    return v


def _streams(seed, trials):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def _alphabet(f, alphabet_size):
    return f.alphabet_size or alphabet_size


def _finish(f, assumption, trials, margins, bad_range):
    margins = np.asarray(margins)
    worst = float(margins.min()) if margins.size else 0.0
    violations = int((margins < -SLACK).sum()) + bad_range
    return CheckReport(f.name, assumption, trials, worst, violations == 0, violations)


def check_subdecomposable(f, trials=200, seed=0, alphabet_size=2, max_segments=3, max_len=3):
    """Product laws over random segments: d_n(joint) <= sum of segment values."""
    if not f.supports_block:
        raise ValueError(f"family {f.name!r} does not support general block laws")
    k = _alphabet(f, alphabet_size)
    margins, bad = [], 0
    for rng in _streams(seed, trials):
        segs = rng.integers(1, max_len + 1, size=rng.integers(1, max_segments + 1))
        p_full, q_full, rhs = np.ones(1), np.ones(1), 0.0
        for ni in segs:
            p = random_law(rng, k**ni)
            q = random_law(rng, k**ni)
            if rng.random() < 0.15:
                q = p.copy()
            v = f(int(ni), p, q)
            bad += v < 0
            rhs += v
            p_full = np.outer(p_full, p).ravel()
            q_full = np.outer(q_full, q).ravel()
        lhs = f(int(segs.sum()), p_full, q_full)
        bad += lhs < 0
        margins.append(rhs - lhs)
    return _finish(f, "sub-decomposability", trials, margins, int(bad))


def check_continuity(f, trials=200, seed=0, alphabet_size=2, max_n=3):
    """d_n(P, Q') <= d_n(P, P') + n c_max TV(P', Q') on random triples."""
    k = _alphabet(f, alphabet_size)
    margins, bad = [], 0
    for rng in _streams(seed, trials):
        n = int(rng.integers(1, max_n + 1)) if f.supports_block else 1
        size = k**n
        p, ph, qh = (random_law(rng, size) for _ in range(3))
        case = rng.random()
        if case < 0.1:
            qh = ph.copy()
        elif case < 0.2:
            ph = p.copy()
        elif case < 0.35:
            lam = rng.random()
            qh = lam * ph + (1.0 - lam) * qh
        lhs = f(n, p, qh)
        d_ref = f(n, p, ph)
        bad += (lhs < 0) + (d_ref < 0)
        margins.append(d_ref + n * f.c_max * tv(ph, qh) - lhs)
    return _finish(f, "tv-continuity", trials, margins, int(bad))


def check_convexity_d1(f, trials=200, seed=0, alphabet_size=2):
    """d_1(P, lam Q1 + (1-lam) Q2) <= lam d_1(P, Q1) + (1-lam) d_1(P, Q2)."""
    k = _alphabet(f, alphabet_size)
    margins, bad = [], 0
    for rng in _streams(seed, trials):
        p, q1, q2 = (random_law(rng, k) for _ in range(3))
        lam = float(rng.random())
        case = rng.random()
        if case < 0.1:
            q2 = q1.copy()
        elif case < 0.2:
            lam = 1.0
        mix = lam * q1 + (1.0 - lam) * q2
        v1, v2, vm = f.d1(p, q1), f.d1(p, q2), f.d1(p, mix)
        bad += (v1 < 0) + (v2 < 0) + (vm < 0)
        margins.append(lam * v1 + (1.0 - lam) * v2 - vm)
    return _finish(f, "d1-convexity", trials, margins, int(bad))
