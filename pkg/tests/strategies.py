"""Hypothesis strategies for laws and channels on small alphabets."""

import numpy as np
from hypothesis import strategies as st


def _normalize(v):
    v = np.asarray(v, float) + 1e-3
    return v / v.sum()


def laws(min_size=2, max_size=4, size=None):
    n = st.just(size) if size is not None else st.integers(min_size, max_size)
    return n.flatmap(lambda k: st.lists(st.floats(0, 1), min_size=k, max_size=k).map(_normalize))


def channels(rows=None, cols=None):
    r = st.just(rows) if rows else st.integers(2, 4)
    c = st.just(cols) if cols else st.integers(2, 4)
    return st.tuples(r, c).flatmap(
        lambda rc: st.lists(st.lists(st.floats(0, 1), min_size=rc[1], max_size=rc[1]), min_size=rc[0], max_size=rc[0])
    ).map(lambda m: np.vstack([_normalize(row) for row in m]))
