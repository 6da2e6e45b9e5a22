"""Time sharing: independent copies of schemes on successive segments."""

import numpy as np

from .base import Scheme, empty_law

_KIND_ORDER = ("none", "private_encoder", "private_decoder", "common")


class ConcatScheme(Scheme):
    """Run ``copies_i`` independent copies of ``parts[i]`` back to back.

    Every copy gets its own randomness draw, so the block law is the
    product of the parts' laws.
    """

    name = "concat"

    def __init__(self, parts, kappa=None):
        parts = [(s, int(c)) for s, c in parts if int(c) > 0]
        if not parts:
            raise ValueError("concatenation needs at least one copy")
        k = parts[0][0].alphabet_size
        if any(s.alphabet_size != k for s, _ in parts):
            raise ValueError("alphabet mismatch between concatenated schemes")
        n = sum(c * s.n for s, c in parts)
        m = sum(c * s.m for s, c in parts)
        # report the strongest kind of randomness any part needs
        kind = max((s.randomness for s, _ in parts), key=_KIND_ORDER.index)
        if kappa is None:
            kappas = [s.kappa for s, _ in parts if s.kappa is not None]
            kappa = max(kappas) if kappas else None
        super().__init__(n, m, kind, k, kappa)
        self.parts = parts

    def exact_law(self, ch, source):
        law = empty_law(self.alphabet_size)
        for s, c in self.parts:
            law = law.product(s.exact_law(ch, source).power(c))
        return law

    def simulate(self, ch, source, trials, rng):
        s_cols, shat_cols = [], []
        errs = np.zeros(trials, dtype=bool)
        for s, c in self.parts:
            a, b, info = s.simulate(ch, source, trials * c, rng)
            s_cols.append(a.reshape(trials, c * s.n))
            shat_cols.append(b.reshape(trials, c * s.n))
            if "error" in info:
                errs |= np.asarray(info["error"]).reshape(trials, c).any(axis=1)
        return np.hstack(s_cols), np.hstack(shat_cols), {"error": errs}

    def describe(self):
        out = super().describe()
        out["parts"] = [{"scheme": s.describe(), "copies": c} for s, c in self.parts]
        return out


def concatenate(a, k1, b, k2, kappa=None):
    """``k1`` copies of ``a`` followed by ``k2`` copies of ``b``."""
    if a.alphabet_size != b.alphabet_size:
        raise ValueError("alphabet mismatch between concatenated schemes")
    if k1 < 0 or k2 < 0:
        raise ValueError("copy counts must be nonnegative")
    return ConcatScheme([(a, k1), (b, k2)], kappa)
