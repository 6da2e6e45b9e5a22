"""Finite-alphabet distributions, channels and information measures.

All logarithms are base 2. Blocks on S^n are indexed lexicographically
with position 0 most significant, so for a binary alphabet the block
``(s_0, ..., s_{n-1})`` has index ``sum(s_t * 2**(n-1-t))``.
"""

from dataclasses import dataclass

import numpy as np

SIMPLEX_TOL = 1e-9
ENUMERATION_CAP = 2**24


class DimensionError(ValueError):
    """Operands live on incompatible alphabets."""


class EnumerationCapError(ValueError):
    """An exact block computation would exceed the enumeration cap."""

    def __init__(self, states, cap=None):
        self.states = states
        self.cap = ENUMERATION_CAP if cap is None else cap
        super().__init__(f"{states} states exceeds enumeration cap {self.cap}")


def check_cap(states, cap=None):
    cap = ENUMERATION_CAP if cap is None else cap
    if states > cap:
        raise EnumerationCapError(states, cap)


def _as_simplex(values, what="distribution"):
    v = np.array(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{what} must be a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} has non-finite entries")
    if v.min() < -SIMPLEX_TOL:
        raise ValueError(f"{what} has negative entry {v.min():g}")
    v = np.clip(v, 0.0, None)
    total = v.sum()
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"{what} sums to {total:.12g}, not 1")
    v /= total
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class Dist:
    """Probability vector on ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_simplex(self.probs))

    @property
    def alphabet_size(self):
        return self.probs.shape[0]

    def __len__(self):
        return self.alphabet_size

    def __eq__(self, other):
        return isinstance(other, Dist) and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"Dist({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix; row ``x`` is the output law given input ``x``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or 0 in m.shape:
            raise ValueError("channel matrix must be a non-empty 2-d table")
        rows = np.vstack([_as_simplex(r, "channel row") for r in m])
        rows.setflags(write=False)
        object.__setattr__(self, "matrix", rows)

    @property
    def input_size(self):
        return self.matrix.shape[0]

    @property
    def output_size(self):
        return self.matrix.shape[1]

    @property
    def rows(self):
        return [Dist(r) for r in self.matrix]

    def __eq__(self, other):
        return isinstance(other, Channel) and np.array_equal(self.matrix, other.matrix)

    def __repr__(self):
        return f"Channel({np.array2string(self.matrix, precision=6)})"


@dataclass(frozen=True, eq=False)
class Joint:
    """Joint law of a (source, reconstruction) pair as a matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("joint law must be a 2-d table")
        flat = _as_simplex(m.ravel(), "joint law")
        m = flat.reshape(m.shape).copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_channel(cls, p, ch):
        p, ch = _probs(p), _matrix(ch)
        if p.shape[0] != ch.shape[0]:
            raise DimensionError(f"law on {p.shape[0]} symbols vs channel with {ch.shape[0]} inputs")
        return cls(p[:, None] * ch)

    @property
    def first(self):
        return Dist(self.matrix.sum(axis=1))

    @property
    def second(self):
        return Dist(self.matrix.sum(axis=0))


@dataclass(frozen=True, eq=False)
class DistortionFn:
    """Per-letter distortion table ``delta[s, s_hat] >= 0``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("distortion must be a 2-d table")
        if not np.all(np.isfinite(m)) or m.min() < 0:
            raise ValueError("distortion entries must be finite and nonnegative")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d_max(self):
        return float(self.matrix.max())


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def bernoulli(p):
    """Law of a binary symbol equal to 1 with probability ``p``."""
    return Dist([1.0 - p, p])


def uniform(k):
    return Dist(np.full(k, 1.0 / k))


def point_mass(k, symbol=0):
    v = np.zeros(k)
    v[symbol] = 1.0
    return Dist(v)


def bsc(p):
    return Channel([[1.0 - p, p], [p, 1.0 - p]])


def bec(e):
    """Binary erasure channel; output 2 is the erasure symbol."""
    return Channel([[1.0 - e, 0.0, e], [0.0, 1.0 - e, e]])


def identity_channel(k):
    return Channel(np.eye(k))


def constant_channel(law, input_size):
    """Channel whose output ignores the input and follows ``law``."""
    return Channel(np.tile(_probs(law), (input_size, 1)))


def hamming(k=2):
    return DistortionFn(1.0 - np.eye(k))


# ---------------------------------------------------------------------------
# raw-array helpers
# ---------------------------------------------------------------------------

def _probs(p):
    return p.probs if isinstance(p, Dist) else np.asarray(p, dtype=float)


def _matrix(ch):
    if isinstance(ch, (Channel, Joint, DistortionFn)):
        return ch.matrix
    return np.asarray(ch, dtype=float)


def _plogp(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    nz = v > 0
    out[nz] = v[nz] * np.log2(v[nz])
    return out


def entropy_of(v):
    """Entropy in bits of any nonnegative array summing to one."""
    return float(max(0.0, -_plogp(v).sum()))


def joint_mutual_info(j):
    """I(A;B) in bits for a joint table ``j[a, b]``."""
    m = _matrix(j)
    a = m.sum(axis=1)
    b = m.sum(axis=0)
    nz = m > 0
    ratio = m[nz] / (a[:, None] * b[None, :])[nz]
    return float(max(0.0, (m[nz] * np.log2(ratio)).sum()))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def entropy(p):
    return entropy_of(_probs(p))


def binary_entropy(x):
    return entropy_of([x, 1.0 - x])


def push_forward(p, ch):
    pv, m = _probs(p), _matrix(ch)
    if pv.shape[0] != m.shape[0]:
        raise DimensionError(f"law on {pv.shape[0]} symbols vs channel with {m.shape[0]} inputs")
    return Dist(pv @ m)


def mutual_info(p, ch):
    pv, m = _probs(p), _matrix(ch)
    if pv.shape[0] != m.shape[0]:
        raise DimensionError(f"law on {pv.shape[0]} symbols vs channel with {m.shape[0]} inputs")
    return joint_mutual_info(pv[:, None] * m)


def product_extend(p, n, cap=None):
    """Law of n i.i.d. copies, lexicographic block order."""
    if n < 0:
        raise ValueError("block length must be nonnegative")
    pv = _probs(p)
    check_cap(pv.shape[0] ** n, cap)
    out = np.ones(1)
    for _ in range(n):
        out = np.outer(out, pv).ravel()
    return Dist(out)


def compose(a, b):
    """Cascade: feed the output of ``a`` into ``b``."""
    ma, mb = _matrix(a), _matrix(b)
    if ma.shape[1] != mb.shape[0]:
        raise DimensionError(f"channel with {ma.shape[1]} outputs cannot feed {mb.shape[0]} inputs")
    return Channel(ma @ mb)


def tv(p, q):
    pv, qv = _probs(p), _probs(q)
    if pv.shape != qv.shape:
        raise DimensionError(f"laws on {pv.shape} and {qv.shape}")
    return float(0.5 * np.abs(pv - qv).sum())


def expected_distortion(j, d):
    mj, md = _matrix(j), _matrix(d)
    if mj.shape != md.shape:
        raise DimensionError(f"joint {mj.shape} vs distortion {md.shape}")
    return float((mj * md).sum())


def h_inv(r, tol=1e-10):
    """Inverse of binary entropy on [0, 1/2], by bisection."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"binary entropy value {r} outside [0, 1]")
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# block indexing
# ---------------------------------------------------------------------------

def block_to_index(blocks, k):
    """Map rows of symbols (..., n) to lexicographic block indices."""
    blocks = np.asarray(blocks, dtype=np.int64)
    n = blocks.shape[-1]
    weights = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return blocks @ weights


def index_to_block(idx, k, n):
    """Inverse of :func:`block_to_index`; returns an (..., n) int array."""
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty(idx.shape + (n,), dtype=np.int64)
    rem = idx.copy()
    for t in range(n - 1, -1, -1):
        out[..., t] = rem % k
        rem //= k
    return out


def block_marginals(law, k, n):
    """Per-position marginals (n, k) of a law on S^n."""
    t = np.asarray(law, dtype=float).reshape((k,) * n)
    out = np.empty((n, k))
    for pos in range(n):
        axes = tuple(a for a in range(n) if a != pos)
        out[pos] = t.sum(axis=axes)
    return out


def block_channel(ch, m, cap=None):
    """The memoryless extension of ``ch`` to blocks of length ``m``."""
    mat = _matrix(ch)
    check_cap((mat.shape[0] * mat.shape[1]) ** m, cap)
    out = np.ones((1, 1))
    for _ in range(m):
        out = np.kron(out, mat)
    return out


def apply_channel(rows, ch, m):
    """Right-multiply ``rows`` (r, kx**m) by the m-fold memoryless channel.

    Works axis by axis, so the kx**m x ky**m block matrix is never formed.
    """
    mat = _matrix(ch)
    kx, ky = mat.shape
    r = rows.shape[0]
    t = np.asarray(rows, dtype=float).reshape((r,) + (kx,) * m)
    for axis in range(1, m + 1):
        t = np.moveaxis(np.tensordot(t, mat, axes=([axis], [0])), -1, axis)
    return t.reshape(r, ky**m)
