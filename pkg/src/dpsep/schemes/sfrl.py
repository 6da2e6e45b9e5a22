"""Channel synthesis with common randomness via the Poisson functional representation.

Encoder and decoder share a stream of candidates ``ŝ_j ~ Q`` (``Q`` the
output law of the test channel) with exponential inter-arrival times.
The encoder picks ``K = argmin_j T_j Q(ŝ_j) / W(ŝ_j | s)`` and sends
``K``; the decoder reads candidate ``K`` off the shared stream. The
selected ``ŝ`` has law ``W(· | s)`` exactly, and ``K`` is cheap to
describe when ``I(S; Ŝ)`` is small.

Stream layout: symbol ``i`` (a global row index) owns ``chunk`` fresh
uniforms per round, taken in row-major order from a PCG64 stream seeded
by ``(seed, round, 0)`` for candidates and ``(seed, round, 1)`` for
arrival times. Each uniform costs exactly one 64-bit draw, so any slice
of rows can be regenerated independently with ``advance``.
"""

import math

import numpy as np
from scipy import stats

from .. import _kernels
from ..probcore import _matrix, _probs, entropy_of, joint_mutual_info
from .base import BlockLaw, Scheme, draw_source

DEFAULT_BUDGET = 10**6
SLICE_ROWS = 1 << 15


class StreamExhausted(RuntimeError):
    """The race did not finish within the candidate budget."""


class SharedStream:
    """Seeded, row-addressable source of candidate uniforms and arrival times."""

    def __init__(self, seed, chunk=32, budget=DEFAULT_BUDGET):
        self.seed = int(seed)
        self.chunk = int(chunk)
        self.budget = int(budget)

    def _uniforms(self, rnd, which, start, stop):
        bg = np.random.PCG64(np.random.SeedSequence([self.seed, rnd, which]))
        bg.advance(start * self.chunk)
        return np.random.Generator(bg).random((stop - start, self.chunk))

    def round(self, rnd, start, stop):
        """Candidate uniforms and exponential gaps for rows ``[start, stop)``."""
        u = self._uniforms(rnd, 0, start, stop)
        e = -np.log1p(-self._uniforms(rnd, 1, start, stop))
        return u, e


def race_tables(test_channel, source):
    """Likelihood ratios ``W(ŝ|s) / Q(ŝ)`` and their row maxima."""
    w = _matrix(test_channel)
    p = _probs(source)
    if w.shape[0] != p.shape[0]:
        raise ValueError("test channel inputs must match the source alphabet")
    q = p @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q[None, :] > 0, w / q[None, :], 0.0)
    bad = (w > 0) & (q[None, :] == 0)
    if bad.any():
        # inputs outside the source support may put mass where Q has none
        ratio[bad] = 0.0
    return np.ascontiguousarray(ratio), ratio.max(axis=1), q


def _candidates(u, q_cdf):
    return np.minimum(np.searchsorted(q_cdf, u, side="right"), q_cdf.size - 1).astype(np.int64)


def _q_cdf(q):
    c = np.cumsum(q)
    c[-1] = 1.0
    return c


def sfrl_encode_batch(test_channel, source, symbols, stream, start=0):
    """Run the race for ``symbols[i]`` on stream row ``start + i``.

    Returns ``(K, s_hat)`` with ``K`` 1-based.
    """
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    ratio, max_ratio, q = race_tables(test_channel, source)
    q_cdf = _q_cdf(q)
    rows = symbols.size
    K = np.zeros(rows, dtype=np.int64)
    s_hat = np.zeros(rows, dtype=np.int64)
    if rows == 0:
        return K, s_hat
    done = np.zeros(rows, dtype=bool)
    cand, expo = [], []
    rnd = 0
    while True:
        u, e = stream.round(rnd, start, start + rows)
        cand.append(_candidates(u, q_cdf))
        expo.append(e)
        pend = np.flatnonzero(~done)
        c_all = np.hstack([c[pend] for c in cand])
        e_all = np.hstack([x[pend] for x in expo])
        k_p, d_p = _kernels.pfr_select(symbols[pend], ratio, max_ratio, c_all, e_all)
        K[pend] = k_p
        done[pend] = d_p
        s_hat[pend] = c_all[np.arange(pend.size), k_p - 1]
        if done.all():
            return K, s_hat
        rnd += 1
        if (rnd + 1) * stream.chunk > stream.budget:
            raise StreamExhausted(f"{int((~done).sum())} races unfinished after {rnd * stream.chunk} candidates")


def sfrl_decode_batch(test_channel, source, K, stream, start=0):
    """Read candidate ``K[i]`` off stream row ``start + i``."""
    K = np.asarray(K, dtype=np.int64).ravel()
    _, _, q = race_tables(test_channel, source)
    q_cdf = _q_cdf(q)
    out = np.zeros(K.size, dtype=np.int64)
    rnd_of = (K - 1) // stream.chunk
    col = (K - 1) % stream.chunk
    for rnd in np.unique(rnd_of):
        u, _ = stream.round(int(rnd), start, start + K.size)
        sel = np.flatnonzero(rnd_of == rnd)
        out[sel] = _candidates(u[sel, col[sel]], q_cdf)
    return out


def sfrl_encode(test_channel, source, s, shared_stream, row=0):
    """Encode one symbol; returns ``(K, s_hat)``."""
    K, s_hat = sfrl_encode_batch(test_channel, source, [s], shared_stream, start=row)
    return int(K[0]), int(s_hat[0])


# ---------------------------------------------------------------------------
# description lengths and statistics
# ---------------------------------------------------------------------------

def elias_gamma_length(K):
    K = np.asarray(K, dtype=np.int64)
    if (K < 1).any():
        raise ValueError("Elias gamma codes positive integers only")
    return 2 * (np.floor(np.log2(K)).astype(np.int64)) + 1


def sfrl_bound(info):
    """``I + log2(I + 1) + 4`` bits."""
    return info + math.log2(info + 1.0) + 4.0


def plugin_entropy(samples):
    """Plug-in entropy in bits and its Miller-Madow correction term.

    The corrected estimate is ``h + correction``.
    """
    _, counts = np.unique(np.asarray(samples), return_counts=True)
    total = counts.sum()
    h = entropy_of(counts / total)
    correction = (counts.size - 1) / (2.0 * total * math.log(2.0))
    return h, correction


def conditional_law_pvalue(s, s_hat, test_channel):
    """Smallest chi-square p-value of ``Ŝ | S = a`` against the channel rows.

    A draw in a zero-probability cell gives p = 0.
    """
    w = _matrix(test_channel)
    s = np.asarray(s).ravel()
    s_hat = np.asarray(s_hat).ravel()
    worst = 1.0
    for a in range(w.shape[0]):
        sel = s_hat[s == a]
        if sel.size == 0:
            continue
        counts = np.bincount(sel, minlength=w.shape[1]).astype(float)
        support = w[a] > 0
        if counts[~support].sum() > 0:
            return 0.0
        if support.sum() < 2:
            continue
        expected = w[a, support] * sel.size
        worst = min(worst, float(stats.chisquare(counts[support], expected).pvalue))
    return worst


# ---------------------------------------------------------------------------
# scheme
# ---------------------------------------------------------------------------

class SfrlScheme(Scheme):
    """Per-symbol channel synthesis with a shared stream as common randomness.

    The indices ``K_t`` are Elias-gamma coded and assumed delivered intact;
    their lengths land in the simulation info. The channel input is not
    modelled beyond its length ``m = floor(kappa n)``.
    """

    name = "cr_synthesis"

    def __init__(self, test_channel, source, n, seed=0, kappa=1.0, chunk=32, budget=DEFAULT_BUDGET):
        w = _matrix(test_channel)
        p = _probs(source)
        if w.shape != (p.shape[0], p.shape[0]):
            raise ValueError("test channel must map the source alphabet to itself")
        super().__init__(n, int(math.floor(kappa * n + 1e-9)), "common", p.shape[0], kappa)
        self.test_channel = w
        self.design_source = p
        self.seed = int(seed)
        self.chunk = chunk
        self.budget = budget
        self.letter_info = joint_mutual_info(p[:, None] * w)
        self.rate_meta = {"letter_mutual_info": self.letter_info, "index_code": "elias_gamma"}

    def exact_law(self, ch, source):
        """Product of single-letter laws: the representation is exact in law."""
        self.check_inputs(ch, source)
        one = BlockLaw.from_joint(_probs(source)[:, None] * self.test_channel, self.alphabet_size, 1)
        law = one.power(self.n)
        law.extras["analytic"] = True
        return law

    def simulate(self, ch, source, trials, rng):
        self.check_inputs(ch, source)
        s = draw_source(source, trials, self.n, rng)
        stream = SharedStream(int(rng.integers(2**63)), self.chunk, self.budget)
        flat = s.ravel()
        K = np.empty(flat.size, dtype=np.int64)
        s_hat = np.empty(flat.size, dtype=np.int64)
        for a in range(0, flat.size, SLICE_ROWS):
            b = min(flat.size, a + SLICE_ROWS)
            K[a:b], _ = sfrl_encode_batch(self.test_channel, self.design_source, flat[a:b], stream, start=a)
            s_hat[a:b] = sfrl_decode_batch(self.test_channel, self.design_source, K[a:b], stream, start=a)
        bits = elias_gamma_length(K).reshape(trials, self.n).sum(axis=1)
        return s, s_hat.reshape(trials, self.n), {"bits": bits, "K": K.reshape(trials, self.n)}


def cr_synthesis_scheme(test_channel, source, n, seed=0, kappa=1.0):
    return SfrlScheme(test_channel, source, n, seed, kappa)
