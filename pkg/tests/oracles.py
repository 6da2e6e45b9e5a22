"""Independent reference solvers used to freeze expected values.

The weak-sense region point is a convex program in the joint law
``J[s, ŝ]`` once the source law is fixed: mutual information is a sum of
relative entropies between ``J`` and ``p ⊗ colsum(J)``. This module
states it directly in cvxpy, sharing no code with the package.
"""

import numpy as np


def weak_point_cvxpy(p, delta, R, P):
    import cvxpy as cp

    p = np.asarray(p, float)
    delta = np.asarray(delta, float)
    k = p.size
    J = cp.Variable((k, k), nonneg=True)
    q = cp.sum(J, axis=0)
    outer = cp.reshape(p, (k, 1), order="F") @ cp.reshape(q, (1, k), order="F")
    cons = [cp.sum(J, axis=1) == p, cp.sum(cp.rel_entr(J, outer)) <= R * np.log(2.0)]
    if np.isfinite(P):
        cons.append(0.5 * cp.norm1(q - p) <= P)
    prob = cp.Problem(cp.Minimize(cp.sum(cp.multiply(J, delta))), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


if __name__ == "__main__":
    cases = {
        "bern02_R03_P005": ([0.8, 0.2], 1 - np.eye(2), 0.3, 0.05),
        "bern02_R03_P0": ([0.8, 0.2], 1 - np.eye(2), 0.3, 0.0),
        "tern_R05_P01": ([0.5, 0.3, 0.2], 1 - np.eye(3), 0.5, 0.1),
        "tern_R05_P0": ([0.5, 0.3, 0.2], 1 - np.eye(3), 0.5, 0.0),
        "tern_abs_R04_P005": ([0.2, 0.5, 0.3], np.abs(np.subtract.outer(np.arange(3), np.arange(3))), 0.4, 0.05),
    }
    for name, args in cases.items():
        print(name, repr(weak_point_cvxpy(*args)))
