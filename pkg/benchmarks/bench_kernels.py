"""Time the numba kernels against their numpy twins.

Run:  python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is called once to trigger compilation, then timed over
``repeat`` calls with identical inputs on both backends; the script also
checks the two backends agree on the outputs.
"""

import argparse
import time

import numpy as np

from dpsep import _kernels


def _time(fn, args, repeat):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        out = fn(*args)
    return (time.perf_counter() - t0) / repeat, out


def pfr_case(rng, rows=200_000, width=32):
    w = np.array([[0.9, 0.1], [0.1, 0.9]])
    q = np.array([0.5, 0.5])
    ratio = w / q
    symbols = rng.integers(0, 2, rows)
    cand = rng.integers(0, 2, (rows, width))
    expo = rng.standard_exponential((rows, width))
    return symbols, ratio, ratio.max(axis=1), cand, expo


def sinkhorn_case(rng, k=6):
    p = rng.dirichlet(np.ones(k))
    q = rng.dirichlet(np.ones(k))
    cost = rng.random((k, k))
    return np.log(p), np.log(q), -8.0 * cost, 1e-12, 5000


def sample_case(rng, rows=64, cols=16, draws=1_000_000):
    table = rng.dirichlet(np.ones(cols), size=rows)
    cdf = np.cumsum(table, axis=1)
    cdf[:, -1] = 1.0
    return cdf, rng.integers(0, rows, draws), rng.random(draws)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.BACKEND != "numba":
        print("numba unavailable; nothing to compare")
        return
    rng = np.random.default_rng(0)
    cases = [
        ("pfr_select", _kernels.pfr_select, _kernels.pfr_select_numpy, pfr_case(rng)),
        ("sinkhorn", _kernels.sinkhorn, _kernels.sinkhorn_numpy, sinkhorn_case(rng)),
        ("sample_rows", _kernels.sample_rows, _kernels.sample_rows_numpy, sample_case(rng)),
    ]
    print(f"{'kernel':<12} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}  agree")
    for name, fast, slow, case in cases:
        tf, of = _time(fast, case, args.repeat)
        ts, os_ = _time(slow, case, args.repeat)
        of = of if isinstance(of, tuple) else (of,)
        os_ = os_ if isinstance(os_, tuple) else (os_,)
        agree = all(np.allclose(a, b, atol=1e-10) for a, b in zip(of[:2], os_[:2]))
        print(f"{name:<12} {1e3 * tf:10.3f} {1e3 * ts:10.3f} {ts / tf:8.1f}  {agree}")


if __name__ == "__main__":
    main()
