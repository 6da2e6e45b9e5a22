"""Schemes given by explicit encoder/decoder kernels on blocks."""

import numpy as np

from .. import _kernels
from ..probcore import _matrix, _probs, apply_channel, block_to_index, check_cap, product_extend
from .base import BlockLaw, Scheme, cdf_table, draw_source, to_symbols


class KernelScheme(Scheme):
    """Encoder ``enc[u, s, x]`` and decoder ``dec[u, y, ŝ]`` over blocks.

    ``u`` ranges over a finite randomness alphabet with law ``u_probs``;
    private randomness is folded into the kernels, so only common
    randomness needs an explicit ``u``.

    Parameters
    ----------
    n, m : int
        Source and channel block lengths.
    enc : ndarray, shape (U, k**n, kx**m)
    dec : ndarray, shape (U, ky**m, k**n)
    """

    def __init__(self, n, m, enc, dec, k, channel_sizes, randomness="none", u_probs=None, kappa=None, name="kernel"):
        enc = np.asarray(enc, dtype=float)
        dec = np.asarray(dec, dtype=float)
        if enc.ndim == 2:
            enc = enc[None]
        if dec.ndim == 2:
            dec = dec[None]
        kx, ky = channel_sizes
        nu = enc.shape[0]
        if enc.shape != (nu, k**n, kx**m) or dec.shape != (nu, ky**m, k**n):
            raise ValueError(f"kernel shapes {enc.shape}, {dec.shape} do not match n={n}, m={m}")
        for kern in (enc, dec):
            if kern.min() < -1e-12 or np.abs(kern.sum(axis=-1) - 1.0).max() > 1e-9:
                raise ValueError("kernels must be row-stochastic")
        u = np.ones(1) if u_probs is None else _probs(u_probs)
        if u.shape[0] != nu:
            raise ValueError("u_probs does not match the kernel stack")
        if nu > 1 and randomness != "common":
            raise ValueError("a stack of kernels needs common randomness")
        super().__init__(n, m, randomness, k, kappa, channel_sizes)
        self.name = name
        self.enc = enc
        self.dec = dec
        self.u_probs = u

    def exact_law(self, ch, source):
        self.check_inputs(ch, source)
        N = self.alphabet_size**self.n
        check_cap(N * N)
        check_cap(self.enc.shape[0] * N * max(self.enc.shape[2], self.dec.shape[1]))
        p = product_extend(source, self.n).probs
        joint = np.zeros((N, N))
        for w, e, g in zip(self.u_probs, self.enc, self.dec):
            if w == 0.0:
                continue
            through = apply_channel(e, ch, self.m) if self.m else e
            joint += w * (p[:, None] * (through @ g))
        return BlockLaw.from_joint(joint, self.alphabet_size, self.n)

    def simulate(self, ch, source, trials, rng):
        self.check_inputs(ch, source)
        k, n, m = self.alphabet_size, self.n, self.m
        s = draw_source(source, trials, n, rng)
        s_idx = block_to_index(s, k)
        nu = self.u_probs.shape[0]
        u = rng.choice(nu, size=trials, p=self.u_probs) if nu > 1 else np.zeros(trials, dtype=np.int64)
        enc_cdf = cdf_table(self.enc.reshape(-1, self.enc.shape[2]))
        x_idx = _kernels.sample_rows(enc_cdf, u * self.enc.shape[1] + s_idx, rng.random(trials))
        if m:
            kx, ky = _matrix(ch).shape
            x = to_symbols(x_idx, kx, m)
            y = _kernels.sample_rows(cdf_table(_matrix(ch)), x.ravel(), rng.random(x.size))
            y_idx = block_to_index(y.reshape(trials, m), ky)
        else:
            y_idx = np.zeros(trials, dtype=np.int64)
        dec_cdf = cdf_table(self.dec.reshape(-1, self.dec.shape[2]))
        shat_idx = _kernels.sample_rows(dec_cdf, u * self.dec.shape[1] + y_idx, rng.random(trials))
        return s, to_symbols(shat_idx, k, n), {}


def uncoded_scheme(n, alphabet_size=2, kappa=1.0):
    """Send each source bit once over the channel and output what arrives."""
    if alphabet_size != 2:
        raise ValueError("the uncoded scheme is defined for binary alphabets only")
    eye = np.eye(2**n)
    return KernelScheme(n, n, eye, eye, 2, (2, 2), "none", kappa=kappa, name="uncoded")


def zero_rate_realism_scheme(source, n, kappa=1.0):
    """Ignore the source; the decoder draws a fresh i.i.d. block from it.

    Uses no channel symbols, so it fits any channel and any kappa.
    """
    p = product_extend(source, n).probs
    k = _probs(source).shape[0]
    enc = np.ones((1, p.size, 1))
    dec = p[None, None, :]
    s = KernelScheme(n, 0, enc, dec, k, (1, 1), "private_decoder", kappa=kappa, name="zero_rate")
    s.channel_sizes = None
    return s


def random_kernel_scheme(rng, n, m, k=2, channel_sizes=(2, 2), n_common=1, concentration=0.5, kappa=None):
    """A scheme with Dirichlet-random kernels, for property tests."""
    kx, ky = channel_sizes
    enc = rng.dirichlet(np.full(kx**m, concentration), size=(n_common, k**n))
    dec = rng.dirichlet(np.full(k**n, concentration), size=(n_common, ky**m))
    u = rng.dirichlet(np.ones(n_common))
    kind = "common" if n_common > 1 else "private_decoder"
    return KernelScheme(n, m, enc, dec, k, channel_sizes, kind, u_probs=u, kappa=kappa, name="random_kernel")
