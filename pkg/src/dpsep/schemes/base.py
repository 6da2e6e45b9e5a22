"""Shared types for executable coding schemes.

A scheme maps a source block ``s^n`` to ``m`` channel inputs and the
channel output back to a reconstruction ``ŝ^n``. Exact evaluation works
on :class:`BlockLaw`, the joint law of ``(S^n, Ŝ^n)`` kept in whatever
compressed form the scheme can afford.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ..probcore import ENUMERATION_CAP, _matrix, _probs, check_cap, index_to_block, joint_mutual_info

RANDOMNESS_KINDS = ("none", "private_encoder", "private_decoder", "common")
KAPPA_SLACK = 1e-9


class KappaError(ValueError):
    """The scheme uses more channel symbols per source symbol than allowed."""


class NonEnumerableError(TypeError):
    """Exact evaluation is impossible; use Monte Carlo instead."""


def check_kappa(n, m, kappa):
    if kappa is not None and m > kappa * n + KAPPA_SLACK:
        raise KappaError(f"m/n = {m}/{n} exceeds kappa = {kappa}")


def pos_joints_of(joint, k, n):
    """Per-position joint laws ``(n, k, k)`` of a dense block joint."""
    t = np.asarray(joint, dtype=float).reshape((k,) * (2 * n))
    out = np.empty((n, k, k))
    for pos in range(n):
        keep = (pos, n + pos)
        axes = tuple(a for a in range(2 * n) if a not in keep)
        out[pos] = t.sum(axis=axes)
    return out


@dataclass
class BlockLaw:
    """Exact law of ``(S^n, Ŝ^n)`` for a scheme run over a channel.

    Attributes
    ----------
    k, n : int
        Alphabet size and block length.
    source_law, output_law : ndarray
        Laws of ``S^n`` and ``Ŝ^n`` on ``k**n`` blocks.
    pos_joints : ndarray
        ``(n, k, k)`` joint law of ``(S_t, Ŝ_t)`` per position.
    mutual_info : float or None
        ``I(S^n; Ŝ^n)`` in bits when it could be computed.
    joint : ndarray or None
        Dense ``(k**n, k**n)`` joint when it fits the enumeration cap.
    err_prob : float
        Probability of the scheme's error event (0 for error-free schemes).
    """

    k: int
    n: int
    source_law: np.ndarray
    output_law: np.ndarray
    pos_joints: np.ndarray
    mutual_info: float = None
    joint: np.ndarray = None
    err_prob: float = 0.0
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_joint(cls, joint, k, n, err_prob=0.0):
        joint = np.clip(np.asarray(joint, dtype=float), 0.0, None)
        joint = joint / joint.sum()
        return cls(
            k,
            n,
            joint.sum(axis=1),
            joint.sum(axis=0),
            pos_joints_of(joint, k, n),
            joint_mutual_info(joint),
            joint,
            float(err_prob),
        )

    def distortion(self, d):
        md = _matrix(d)
        return float(np.mean([(pj * md).sum() for pj in self.pos_joints])) if self.n else 0.0

    def product(self, other, cap=None):
        """Law of this block followed by an independent ``other`` block."""
        if other.k != self.k:
            raise ValueError("alphabet mismatch")
        joint = None
        if self.joint is not None and other.joint is not None:
            size = (self.joint.size * other.joint.size)
            if size <= (ENUMERATION_CAP if cap is None else cap):
                joint = np.kron(self.joint, other.joint)
        mi = None
        if self.mutual_info is not None and other.mutual_info is not None:
            mi = self.mutual_info + other.mutual_info
        check_cap(self.source_law.size * other.source_law.size, cap)
        return BlockLaw(
            self.k,
            self.n + other.n,
            np.kron(self.source_law, other.source_law),
            np.kron(self.output_law, other.output_law),
            np.concatenate([self.pos_joints, other.pos_joints]),
            mi,
            joint,
            1.0 - (1.0 - self.err_prob) * (1.0 - other.err_prob),
        )

    def power(self, copies, cap=None):
        out = empty_law(self.k)
        for _ in range(copies):
            out = out.product(self, cap)
        return out


def empty_law(k):
    """Law of the empty block: the unit for :meth:`BlockLaw.product`."""
    return BlockLaw(k, 0, np.ones(1), np.ones(1), np.zeros((0, k, k)), 0.0, np.ones((1, 1)), 0.0)


class Scheme:
    """Base class: an immutable description of a joint source-channel code.

    Subclasses implement :meth:`exact_law` when their randomness can be
    enumerated and :meth:`simulate` always.
    """

    name = "scheme"

    def __init__(self, n, m, randomness, alphabet_size, kappa=None, channel_sizes=None, rate_meta=None):
        if randomness not in RANDOMNESS_KINDS:
            raise ValueError(f"unknown randomness kind {randomness!r}")
        if n < 1 or m < 0:
            raise ValueError("need n >= 1 and m >= 0")
        check_kappa(n, m, kappa)
        self.n = int(n)
        self.m = int(m)
        self.randomness = randomness
        self.alphabet_size = int(alphabet_size)
        self.kappa = kappa
        self.channel_sizes = channel_sizes
        self.rate_meta = dict(rate_meta or {})

    def check_inputs(self, ch, source):
        k = _probs(source).shape[0]
        if k != self.alphabet_size:
            raise ValueError(f"source alphabet {k} vs scheme alphabet {self.alphabet_size}")
        if self.channel_sizes is not None and self.m > 0:
            shape = _matrix(ch).shape
            if tuple(shape) != tuple(self.channel_sizes):
                raise ValueError(f"channel shape {shape} vs scheme {self.channel_sizes}")

    def exact_law(self, ch, source):
        raise NonEnumerableError(f"{self.name} has non-enumerable randomness; use evaluate_mc")

    def simulate(self, ch, source, trials, rng):
        """Return ``(s, s_hat, info)`` with symbol arrays of shape ``(trials, n)``."""
        raise NotImplementedError

    def describe(self):
        return {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "randomness": self.randomness,
            "kappa": self.kappa,
        }

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, m={self.m}, randomness={self.randomness!r})"


def draw_source(source, trials, n, rng):
    p = _probs(source)
    return rng.choice(p.shape[0], size=(trials, n), p=p)


def cdf_table(rows):
    c = np.cumsum(np.asarray(rows, dtype=float), axis=-1)
    c[..., -1] = 1.0
    return np.ascontiguousarray(c)


def to_symbols(idx, k, n):
    return index_to_block(idx, k, n)


@dataclass
class EvalReport:
    """Measured performance of one scheme over one channel.

    ``P_strong`` is None when the perception family cannot evaluate the
    block law or the Monte Carlo sample is too small for a plug-in value.
    """

    scheme: str
    mode: str
    n: int
    m: int
    D_hat: float
    P_strong: float
    P_weak: float
    err_prob: float = 0.0
    ci_halfwidth: float = 0.0
    trials: int = None
    mutual_info: float = None
    details: dict = field(default_factory=dict)

    def to_record(self):
        rec = {
            "scheme": self.scheme,
            "mode": self.mode,
            "n": self.n,
            "m": self.m,
            "D_hat": self.D_hat,
            "P_strong": self.P_strong,
            "P_weak": self.P_weak,
            "err_prob": self.err_prob,
            "ci_halfwidth": self.ci_halfwidth,
            "trials": self.trials,
            "mutual_info": self.mutual_info,
            "details": self.details,
        }
        return rec

    def to_json(self, **kw):
        return json.dumps(_plain(self.to_record()), sort_keys=True, **kw)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    return obj
