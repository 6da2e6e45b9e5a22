"""Separated source-channel architecture with overflow and pipe errors.

``k`` independent copies of a block source code share one bit pipe of
``m = floor(kappa n k)`` uses at ``C`` bits per use. If the summed
description length reaches ``tau = n k (R + delta_R)`` bits the encoder
sends a dummy sequence instead (overflow); independently the pipe fails
with probability ``err_inject``. On either event the decoder outputs the
all-zeros block of length ``n k``.

Exact evaluation never forms the ``(k^{nk})^2`` joint unless it fits the
enumeration cap. It tracks per-copy tables ``T[s, ŝ, l]`` and convolves
length distributions instead.
"""

import math

import numpy as np

from ..probcore import ENUMERATION_CAP, _probs, check_cap, joint_mutual_info, product_extend
from .base import BlockLaw, Scheme, pos_joints_of


def _convolve_power(a, times):
    out = np.ones(1)
    for _ in range(times):
        out = np.convolve(out, a)
    return out


def _stack_copies(g, copies):
    """Combine per-copy ``g[idx, l]`` into ``h[(idx_1..idx_c), total length]``."""
    h = np.ones((1, 1))
    for _ in range(copies):
        new = np.zeros((h.shape[0] * g.shape[0], h.shape[1] + g.shape[1] - 1))
        for length in range(g.shape[1]):
            if g[:, length].any():
                new[:, length : length + h.shape[1]] += np.kron(h, g[:, length : length + 1])
        h = new
    return h


class SeparatedPipeline(Scheme):
    name = "separated"

    def __init__(self, code, kappa, capacity, eps_R=0.0, delta_R=0.0, err_inject=0.0, k=1, seed=0):
        if not 0.0 <= err_inject <= 1.0:
            raise ValueError("err_inject must be a probability")
        if k < 1:
            raise ValueError("need at least one copy")
        rate = code.mean_rate()
        budget = rate + delta_R
        if budget > kappa * capacity + 1e-12:
            raise ValueError(f"description rate {budget:.6g} exceeds kappa C = {kappa * capacity:.6g}")
        n_total = code.n * k
        m = int(math.floor(kappa * n_total + 1e-9))
        tau = n_total * budget
        if tau > m * capacity + 1e-9:
            raise ValueError(f"threshold {tau:.6g} bits does not fit {m} uses at C = {capacity}")
        super().__init__(n_total, m, code.randomness, code.k, kappa)
        self.code = code
        self.copies = int(k)
        self.capacity = float(capacity)
        self.eps_R = float(eps_R)
        self.delta_R = float(delta_R)
        self.err_inject = float(err_inject)
        self.seed = int(seed)
        self.tau = tau
        self.dummy_length = int(math.floor(tau))
        self.rate_meta = {
            "mean_rate": rate,
            "threshold_bits": tau,
            "overflow_prob": self.overflow_probability(),
        }

    def overflow_probability(self, source=None):
        """Exact ``P(sum of k description lengths >= tau)``."""
        pmf = _convolve_power(self.code.length_pmf(source), self.copies)
        lengths = np.arange(pmf.size)
        return float(np.clip(pmf[lengths >= self.tau - 1e-9].sum(), 0.0, 1.0))

    def _n_ok(self, total_lengths):
        return total_lengths < self.tau - 1e-9

    def exact_law(self, ch, source):
        """Exact realized law; ``extras`` carries the ideal law and the coupling TV."""
        self.check_inputs(ch, source)
        code, c, e = self.code, self.copies, self.err_inject
        kk, n1 = code.k, code.n
        N1 = kk**n1
        check_cap(N1**c * (c * code.max_length + 1))
        t1 = code.length_table(source)
        j1 = t1.sum(axis=2)
        a = t1.sum(axis=(0, 1))
        rest = _convolve_power(a, c - 1)
        fits = np.array([rest[: max(0, int(math.ceil(self.tau - 1e-9)) - l)].sum() for l in range(a.size)])
        j_ok = (t1 * fits[None, None, :]).sum(axis=2)
        p_ovf = self.overflow_probability(source)

        pos_ok = pos_joints_of(j_ok, kk, n1)
        pos_all = pos_joints_of(j1, kk, n1)
        pos = (1.0 - e) * pos_ok
        pos[:, :, 0] += e * pos_ok.sum(axis=2) + (pos_all - pos_ok).sum(axis=2)
        pos = np.concatenate([pos] * c)

        g = t1.sum(axis=0)
        h = _stack_copies(g, c)
        ok = self._n_ok(np.arange(h.shape[1]))
        out_ok = h[:, ok].sum(axis=1)
        err = p_ovf + e * (1.0 - p_ovf)
        out = (1.0 - e) * out_ok
        out[0] += err

        ideal = BlockLaw(
            kk,
            self.n,
            product_extend(source, self.n).probs,
            _stack_copies(j1.sum(axis=0)[:, None], c)[:, 0],
            np.concatenate([pos_all] * c),
            joint_mutual_info(j1) * c,
        )
        # TV between the ideal and realized joints, from the structure of the error event
        p0_ok = out_ok[0]
        p0_ovf = ideal.output_law[0] - p0_ok
        coupling_tv = e * ((1.0 - p_ovf) - p0_ok) + p_ovf - p0_ovf

        mi, dense = None, None
        if (N1**c) ** 2 * (c * code.max_length + 1) <= ENUMERATION_CAP:
            dense_ok, dense_all = self._dense_joints(t1)
            dense = (1.0 - e) * dense_ok
            dense[:, 0] += e * dense_ok.sum(axis=1) + (dense_all - dense_ok).sum(axis=1)
            mi = joint_mutual_info(dense)
        law = BlockLaw(kk, self.n, ideal.source_law, out, pos, mi, dense, err)
        law.extras.update(ideal=ideal, coupling_tv=float(max(coupling_tv, 0.0)), overflow_prob=p_ovf)
        return law

    def _dense_joints(self, t1):
        N1 = t1.shape[0]
        flat = t1.reshape(N1 * N1, -1)
        h = _stack_copies(flat, self.copies)
        ok = self._n_ok(np.arange(h.shape[1]))
        shape = (N1, N1) * self.copies
        order = list(range(0, 2 * self.copies, 2)) + list(range(1, 2 * self.copies, 2))
        size = N1**self.copies

        def arrange(v):
            return v.reshape(shape).transpose(order).reshape(size, size)

        return arrange(h[:, ok].sum(axis=1)), arrange(h.sum(axis=1))

    def simulate(self, ch, source, trials, rng):
        self.check_inputs(ch, source)
        s, shat, bits = self.code.sample(source, trials * self.copies, rng)
        n1 = self.code.n
        s = s.reshape(trials, self.copies * n1)
        shat = shat.reshape(trials, self.copies * n1)
        total = bits.reshape(trials, self.copies).sum(axis=1)
        overflow = ~self._n_ok(total)
        pipe = rng.random(trials) < self.err_inject
        fail = overflow | pipe
        shat[fail] = 0
        return s, shat, {"bits": total, "overflow": overflow, "error": fail}


def separated_pipeline(src_code, kappa, C, eps_R=0.0, delta_R=0.0, err_inject=0.0, k=1, seed=0):
    """Build the ``k``-extension of ``src_code`` over an ideal pipe of rate ``kappa C``.

    ``eps_R`` is the target overflow probability and is only recorded;
    the realized overflow probability is exact in ``rate_meta``.
    """
    s = SeparatedPipeline(src_code, kappa, C, eps_R, delta_R, err_inject, k, seed)
    s.rate_meta["eps_R"] = float(eps_R)
    return s
