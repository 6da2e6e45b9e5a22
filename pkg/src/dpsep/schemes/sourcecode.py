"""Block source codes and their use over an idealized bit pipe.

A :class:`SourceCode` is a (possibly randomized) map from ``s^n`` to an
index ``z`` with a prefix-free description of ``lengths[u, z]`` bits,
plus a decoder from ``z`` back to ``ŝ^n``. The channel-code layer is not
modelled: a :class:`BitPipeScheme` carries the bits error-free except
for an injected failure probability.
"""

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..probcore import _matrix, _probs, block_to_index, check_cap, hamming, index_to_block, product_extend, tv
from ..rdp import restoration_channel
from .base import BlockLaw, Scheme, cdf_table, draw_source, to_symbols


@dataclass(frozen=True, eq=False)
class SourceCode:
    """Randomized block source code.

    Attributes
    ----------
    enc : ndarray, shape (U, k**n, Z)
        ``P(z | s, u)``.
    dec : ndarray, shape (U, Z, k**n)
        ``P(ŝ | z, u)``; any private decoder randomness is folded in.
    lengths : ndarray, shape (U, Z)
        Description length of index ``z`` in bits when ``U = u``.
    design_source : ndarray
        Per-letter law the code was built for.
    """

    n: int
    k: int
    u_probs: np.ndarray
    enc: np.ndarray
    dec: np.ndarray
    lengths: np.ndarray
    design_source: np.ndarray
    randomness: str = "none"
    name: str = "code"

    @property
    def num_indices(self):
        return self.enc.shape[2]

    @property
    def max_length(self):
        return int(self.lengths.max())

    def joint(self, source=None):
        """Dense ``(k**n, k**n)`` joint law of ``(S^n, Ŝ^n)``."""
        return self.length_table(source).sum(axis=2)

    def length_table(self, source=None):
        """``T[s, ŝ, l] = P(S^n = s, Ŝ^n = ŝ, description length = l)``."""
        N = self.k**self.n
        check_cap(N * N * (self.max_length + 1))
        p = product_extend(self.design_source if source is None else source, self.n).probs
        out = np.zeros((N, N, self.max_length + 1))
        for w, e, g, ln in zip(self.u_probs, self.enc, self.dec, self.lengths):
            if w == 0.0:
                continue
            for length in np.unique(ln):
                mask = ln == length
                out[:, :, int(length)] += w * (p[:, None] * (e[:, mask] @ g[mask]))
        return out

    def length_pmf(self, source=None):
        p = product_extend(self.design_source if source is None else source, self.n).probs
        pmf = np.zeros(self.max_length + 1)
        for w, e, ln in zip(self.u_probs, self.enc, self.lengths):
            np.add.at(pmf, ln.astype(int), w * (p @ e))
        return pmf

    def mean_rate(self, source=None):
        """Expected description length per source symbol."""
        pmf = self.length_pmf(source)
        return float(pmf @ np.arange(pmf.size)) / self.n

    def sample(self, source, trials, rng):
        """Draw ``(s, ŝ, lengths)``; ``s`` and ``ŝ`` are (trials, n) symbols."""
        s = draw_source(source, trials, self.n, rng)
        s_idx = block_to_index(s, self.k)
        nu = self.u_probs.shape[0]
        u = rng.choice(nu, size=trials, p=self.u_probs) if nu > 1 else np.zeros(trials, dtype=np.int64)
        z = _kernels.sample_rows(cdf_table(self.enc.reshape(-1, self.num_indices)), u * self.enc.shape[1] + s_idx, rng.random(trials))
        shat = _kernels.sample_rows(cdf_table(self.dec.reshape(-1, self.dec.shape[2])), u * self.num_indices + z, rng.random(trials))
        return s, to_symbols(shat, self.k, self.n), self.lengths[u, z].astype(np.int64)


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def block_distortion(d, k, n):
    """``Dblk[a, b] = sum_t delta(a_t, b_t)`` over all pairs of blocks."""
    check_cap((k**n) ** 2)
    md = _matrix(d)
    blocks = index_to_block(np.arange(k**n), k, n)
    out = np.zeros((k**n, k**n))
    for t in range(n):
        out += md[blocks[:, t][:, None], blocks[:, t][None, :]]
    return out


def greedy_codebook(p_blocks, dblk, size, rng):
    """Greedy facility location: add the block that most reduces E min distortion.

    Exact ties are broken by a seeded random priority, which is the only
    use of ``rng``.
    """
    N = p_blocks.size
    if size >= N:
        return np.arange(N)
    priority = rng.permutation(N)
    current = np.full(N, dblk.max() + 1.0)
    chosen = []
    for _ in range(size):
        cost = p_blocks @ np.minimum(current[:, None], dblk)
        cost[chosen] = np.inf
        best = cost.min()
        ties = np.flatnonzero(cost <= best + 1e-12)
        c = int(ties[np.argmin(priority[ties])])
        chosen.append(c)
        current = np.minimum(current, dblk[:, c])
    return np.array(chosen)


def huffman_lengths(probs):
    """Codeword lengths of a binary Huffman code (one symbol gets length 0)."""
    probs = np.asarray(probs, dtype=float)
    if probs.size == 1:
        return np.zeros(1, dtype=np.int64)
    heap = [(float(pr), i, [i]) for i, pr in enumerate(probs)]
    heapq.heapify(heap)
    lengths = np.zeros(probs.size, dtype=np.int64)
    tick = probs.size
    while len(heap) > 1:
        pa, _, a = heapq.heappop(heap)
        pb, _, b = heapq.heappop(heap)
        lengths[a + b] += 1
        heapq.heappush(heap, (pa + pb, tick, a + b))
        tick += 1
    return lengths


def fixed_lengths(z):
    return np.full(z, math.ceil(math.log2(z)) if z > 1 else 0, dtype=np.int64)


def _one_hot(idx, width):
    out = np.zeros((idx.size, width))
    out[np.arange(idx.size), idx] = 1.0
    return out


def quantizer_code(source, R, n, seed=0, d=None, restore=True, entropy_coded=False, p_budget=0.0):
    """Nearest-codeword quantizer with optional output-law restoration.

    The codebook has ``2**floor(n R)`` codewords (capped at the number of
    blocks). With ``restore`` the decoder applies an optimal-transport
    channel from the codeword law to the source block law, so the output
    block law equals the source block law exactly. A positive ``p_budget``
    relaxes this to a block TV of at most ``n * p_budget``, i.e. a
    per-letter strong-sense TV of ``p_budget``, trading realism for
    distortion.
    """
    p1 = _probs(source)
    k = p1.shape[0]
    d = hamming(k) if d is None else d
    p = product_extend(p1, n).probs
    dblk = block_distortion(d, k, n)
    bits = int(math.floor(n * R + 1e-9))
    size = min(2**bits, k**n)
    book = greedy_codebook(p, dblk, size, np.random.default_rng(seed))
    assign = np.argmin(dblk[:, book], axis=1)
    enc = _one_hot(assign, size)
    q = p @ enc
    if restore:
        cost = (enc * p[:, None]).T @ dblk / n
        with np.errstate(invalid="ignore", divide="ignore"):
            cost = np.where(q[:, None] > 0, cost / q[:, None], 0.0)
        dec = restoration_channel(q, p, cost, tv_budget=n * p_budget).matrix
        residual = tv(q @ dec, p)
        if residual > n * p_budget + 1e-7:
            raise RuntimeError(f"restoration left TV residual {residual:.3g}")
        kind = "private_decoder"
    else:
        dec = _one_hot(book, k**n)
        kind = "none"
    lengths = huffman_lengths(q) if entropy_coded else fixed_lengths(size)
    return SourceCode(n, k, np.ones(1), enc[None], dec[None], lengths[None], p1.copy(), kind, "quantizer")


def dithered_quantizer_code(source, R, n, seed=0, d=None, entropy_coded=True):
    """Subtractive-dither quantizer with common randomness.

    ``U`` is uniform on ``S^n``; the encoder quantizes ``s + u`` (mod k,
    per letter) with a codebook designed for the uniform law, and the
    decoder outputs ``codeword - u``. For a uniform source the output
    block law is exactly uniform.
    """
    p1 = _probs(source)
    k = p1.shape[0]
    d = hamming(k) if d is None else d
    N = k**n
    check_cap(N * N * max(2, N))
    dblk = block_distortion(d, k, n)
    bits = int(math.floor(n * R + 1e-9))
    size = min(2**bits, N)
    book = greedy_codebook(np.full(N, 1.0 / N), dblk, size, np.random.default_rng(seed))
    assign = np.argmin(dblk[:, book], axis=1)
    blocks = index_to_block(np.arange(N), k, n)
    p = product_extend(p1, n).probs
    enc = np.zeros((N, N, size))
    dec = np.zeros((N, size, N))
    lengths = np.zeros((N, size), dtype=np.int64)
    cw = index_to_block(book, k, n)
    for u in range(N):
        shifted = block_to_index((blocks + blocks[u]) % k, k)
        enc[u, np.arange(N), assign[shifted]] = 1.0
        dec[u, np.arange(size), block_to_index((cw - blocks[u]) % k, k)] = 1.0
        lengths[u] = huffman_lengths(p @ enc[u]) if entropy_coded else fixed_lengths(size)
    return SourceCode(n, k, np.full(N, 1.0 / N), enc, dec, lengths, p1.copy(), "common", "dithered_quantizer")


# ---------------------------------------------------------------------------
# bit-pipe scheme
# ---------------------------------------------------------------------------

def pipe_uses(bits, capacity):
    if bits <= 0:
        return 0
    if capacity <= 0:
        raise ValueError("a positive-length description needs a positive-capacity pipe")
    return int(math.ceil(bits / capacity - 1e-9))


class BitPipeScheme(Scheme):
    """One block of a source code sent over an ideal pipe of ``capacity`` bits/use.

    The pipe must carry the longest description, so ``m = ceil(max_len / C)``.
    With probability ``err_inject`` the pipe fails and the decoder outputs
    the all-zeros block.
    """

    def __init__(self, code, capacity, kappa=1.0, err_inject=0.0, name=None):
        if not 0.0 <= err_inject <= 1.0:
            raise ValueError("err_inject must be a probability")
        m = pipe_uses(code.max_length, capacity)
        super().__init__(code.n, m, code.randomness, code.k, kappa, None,
                         {"max_bits": code.max_length, "mean_rate": code.mean_rate(), "capacity": capacity})
        self.code = code
        self.capacity = float(capacity)
        self.err_inject = float(err_inject)
        self.name = name or code.name

    def exact_law(self, ch, source):
        self.check_inputs(ch, source)
        joint = self.code.joint(source)
        e = self.err_inject
        if e > 0:
            joint = (1.0 - e) * joint
            joint[:, 0] += e * product_extend(source, self.n).probs
        return BlockLaw.from_joint(joint, self.alphabet_size, self.n, err_prob=e)

    def simulate(self, ch, source, trials, rng):
        self.check_inputs(ch, source)
        s, shat, lengths = self.code.sample(source, trials, rng)
        fail = rng.random(trials) < self.err_inject
        shat[fail] = 0
        return s, shat, {"bits": lengths, "error": fail}


def quantize_restore_scheme(source, R, n, seed=0, capacity=None, kappa=1.0, d=None, p_budget=0.0):
    """Quantize to ``2**floor(nR)`` codewords, then restore the output law.

    ``capacity`` is the bit-pipe rate per channel use; by default the
    smallest rate that fits ``floor(nR)`` bits into ``floor(kappa n)`` uses.
    ``p_budget`` is forwarded to :func:`quantizer_code`.
    """
    code = quantizer_code(source, R, n, seed, d, restore=True, p_budget=p_budget)
    if capacity is None:
        uses = int(math.floor(kappa * n + 1e-9))
        capacity = code.max_length / uses if uses else 0.0
    return BitPipeScheme(code, capacity, kappa, name="quantize_restore")
