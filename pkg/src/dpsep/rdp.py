"""Capacity, single-letter distortion-rate-perception solvers, no-CR oracle.

The weak-sense problem

    minimize   E delta(S, S_hat)
    subject to I(S; S_hat) <= R,  d_1(P_S, P_S_hat) <= P

only touches the reconstruction law through its marginal ``r``. For a
fixed ``r`` the remaining problem is a transport problem between ``P_S``
and ``r`` with a mutual-information budget; its Lagrangian is entropic
optimal transport, solved exactly by Sinkhorn plus a root search on the
inverse temperature. The outer problem minimizes a convex function of
``r`` over the convex perception ball.
"""

import csv
import io
import itertools
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, sparse

from . import _kernels
from .probcore import (
    Channel,
    Dist,
    _matrix,
    _probs,
    entropy_of,
    joint_mutual_info,
    mutual_info,
    push_forward,
)

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class InfeasibleError(SolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    grid_resolution: int = 64
    refinement_iters: int = 200
    tolerance: float = 1e-6
    aux_alphabet_size: int = None
    seed: int = 0
    starts: int = 4

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("solver tolerance must be positive")
        if self.grid_resolution < 2 or self.refinement_iters < 0 or self.starts < 1:
            raise ValueError("grid_resolution >= 2, refinement_iters >= 0, starts >= 1 required")
        if self.aux_alphabet_size is not None and self.aux_alphabet_size < 1:
            raise ValueError("aux_alphabet_size must be positive")


@dataclass
class RegionPoint:
    R: float
    D: float
    P: float
    witness: object
    info: dict = field(default_factory=dict)

    def witness_record(self):
        if isinstance(self.witness, tuple):
            return {"encoder": self.witness[0].matrix.tolist(), "restoration": self.witness[1].matrix.tolist()}
        if self.witness is None:
            return None
        return {"channel": self.witness.matrix.tolist()}


# ---------------------------------------------------------------------------
# channel capacity
# ---------------------------------------------------------------------------

def _divergences(ch, q):
    """D(W_x || q) in nats for every input x."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(ch > 0, ch * np.log(ch / q[None, :]), 0.0)
    return t.sum(axis=1)


def capacity_ba(ch, tol=1e-9, max_iter=100_000):
    """Blahut-Arimoto with the standard upper/lower stopping bounds.

    Returns ``(C, input_law)`` with C in bits, the midpoint of the final
    bracket ``[log sum r e^D, log max e^D]``.
    """
    w = _matrix(ch)
    if tol <= 0:
        raise ValueError("tol must be positive")
    r = np.full(w.shape[0], 1.0 / w.shape[0])
    for _ in range(max_iter):
        q = r @ w
        dv = _divergences(w, q)
        top = dv.max()
        lower = top + np.log(np.sum(r * np.exp(dv - top)))
        if (top - lower) / np.log(2) < tol:
            return float(0.5 * (top + lower) / np.log(2)), Dist(r)
        r = r * np.exp(dv - top)
        r /= r.sum()
    raise SolverError(f"Blahut-Arimoto did not reach tol={tol} in {max_iter} iterations")


# ---------------------------------------------------------------------------
# rate-constrained transport
# ---------------------------------------------------------------------------

SINKHORN_TOL = 1e-14
SINKHORN_MAX_ITER = 3000
BETA_SPAN = 40.0
REDUCED_BETA_SPAN = 1e10
RATE_FLOOR = 1e-13


def _newton_polish(logp, logq, logk, f, g, tol=SINKHORN_TOL, max_iter=100):
    """Newton ascent on the entropic dual; quadratic where Sinkhorn crawls."""
    p, q = np.exp(logp), np.exp(logq)
    ns = p.size

    def dual(f, g):
        with np.errstate(over="ignore"):
            return f @ p + g @ q - np.exp(f[:, None] + g[None, :] + logk).sum()

    err = np.inf
    for _ in range(max_iter):
        plan = np.exp(f[:, None] + g[None, :] + logk)
        rows, cols = plan.sum(axis=1), plan.sum(axis=0)
        grad = np.concatenate([p - rows, (q - cols)[:-1]])
        err = max(np.abs(p - rows).max(), np.abs(q - cols).max())
        if err < tol:
            break
        hess = np.zeros((grad.size, grad.size))
        hess[:ns, :ns] = np.diag(rows)
        hess[ns:, ns:] = np.diag(cols[:-1])
        hess[:ns, ns:] = plan[:, :-1]
        hess[ns:, :ns] = plan[:, :-1].T
        step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        base = dual(f, g)
        t = 1.0
        while t > 1e-12:
            f2 = f + t * step[:ns]
            g2 = g.copy()
            g2[:-1] += t * step[ns:]
            if dual(f2, g2) >= base:
                f, g = f2, g2
                break
            t *= 0.5
        else:
            break
    return f, g, err


def entropic_plan(p, q, cost, beta):
    """Minimizer of <J, cost> + KL(J || p x q) / beta over couplings of p, q."""
    rs, cs = p > 0, q > 0
    logp, logq = np.log(p[rs]), np.log(q[cs])
    logk = np.ascontiguousarray(-beta * cost[np.ix_(rs, cs)])
    f, g, _, err = _kernels.sinkhorn(logp, logq, logk, SINKHORN_TOL, SINKHORN_MAX_ITER)
    if err > SINKHORN_TOL:
        f, g, err = _newton_polish(logp, logq, logk, f, g)
    if err > 1e-10:
        raise SolverError(f"entropic transport stalled at marginal error {err:.3g} (beta={beta:g})")
    plan = np.zeros((p.size, q.size))
    plan[np.ix_(rs, cs)] = np.exp(f[:, None] + g[None, :] + logk)
    return plan, g


def transport_lp(p, q, cost):
    """Unregularized optimal transport between two discrete laws."""
    ns, nq = cost.shape
    cols = np.arange(ns * nq)
    a_eq = sparse.vstack(
        [
            sparse.csr_matrix((np.ones(ns * nq), (cols // nq, cols)), shape=(ns, ns * nq)),
            sparse.csr_matrix((np.ones(ns * nq), (cols % nq, cols)), shape=(nq, ns * nq)),
        ]
    ).tocsr()
    res = optimize.linprog(cost.ravel(), A_eq=a_eq, b_eq=np.concatenate([p, q]), bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"transport LP failed: {res.message}")
    return np.clip(res.x.reshape(ns, nq), 0.0, None)


def transport_face(p, q, cost, face_tol=1e-9, tol=1e-12, max_iter=200_000):
    """Max-entropy optimal transport plan and the LP-reduced cost matrix.

    The optimal face is read off the LP duals (zero reduced cost); the plan
    is the matrix scaling of its indicator, i.e. the ``beta -> inf`` limit
    of :func:`entropic_plan`. Reduced costs ``c - u - v >= 0`` give the same
    entropic plans as ``c`` at every beta.
    """
    ns, nq = cost.shape
    cols = np.arange(ns * nq)
    a_eq = sparse.vstack(
        [
            sparse.csr_matrix((np.ones(ns * nq), (cols // nq, cols)), shape=(ns, ns * nq)),
            sparse.csr_matrix((np.ones(ns * nq), (cols % nq, cols)), shape=(nq, ns * nq)),
        ]
    ).tocsr()
    res = optimize.linprog(cost.ravel(), A_eq=a_eq, b_eq=np.concatenate([p, q]), bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"transport LP failed: {res.message}")
    u, v = res.eqlin.marginals[:ns], res.eqlin.marginals[ns:]
    reduced = np.clip(cost - u[:, None] - v[None, :], 0.0, None)
    kernel = (reduced <= face_tol * max(1.0, float(np.ptp(cost)))).astype(float)
    a, b = np.ones(ns), np.ones(nq)
    plan = np.clip(res.x.reshape(ns, nq), 0.0, None)
    for _ in range(max_iter):
        rows = kernel @ b
        a = np.divide(p, rows, out=np.zeros(ns), where=rows > 0)
        colsum = kernel.T @ a
        b = np.divide(q, colsum, out=np.zeros(nq), where=colsum > 0)
        scaled = a[:, None] * kernel * b[None, :]
        if np.abs(scaled.sum(axis=1) - p).max() < tol:
            plan = scaled
            break
    return plan, reduced


def rate_constrained_plan(p, q, cost, rate):
    """Cheapest coupling of ``p`` and ``q`` whose mutual information is <= ``rate``.

    Returns ``(plan, beta)``; ``beta`` is 0 for the independent coupling and
    ``inf`` when the budget does not bind.
    """
    p, q, cost = np.asarray(p, float), np.asarray(q, float), np.asarray(cost, float)
    if rate <= RATE_FLOOR:
        # below the resolution of the mutual information itself
        return np.outer(p, q), 0.0
    spread = float(np.ptp(cost[np.ix_(p > 0, q > 0)]))
    if spread == 0.0:
        return np.outer(p, q), 0.0
    if rate >= min(entropy_of(p), entropy_of(q)):
        return transport_lp(p, q, cost), np.inf

    work = {"cost": cost}

    def gap(beta):
        return joint_mutual_info(entropic_plan(p, q, work["cost"], beta)[0]) - rate

    def below(beta):
        try:
            return bool(gap(beta) <= 0.0)
        except SolverError:
            return None

    # bracket by doubling; past BETA_SPAN (or on a Sinkhorn stall) switch to
    # LP-reduced costs, which give the same plans but stay well conditioned
    lo, hi = 0.0, 1.0 / spread
    while (state := below(hi)) is not False:
        if state is None or hi * spread > BETA_SPAN:
            if work["cost"] is cost:
                face, reduced = transport_face(p, q, cost)
                if joint_mutual_info(face) <= rate + 1e-12:
                    return face, np.inf
                work["cost"] = reduced
                continue
            if state is None or hi * spread > REDUCED_BETA_SPAN:
                raise SolverError("rate budget sits on a degenerate transport face")
        lo, hi = hi, 2.0 * hi
    if gap(lo) >= 0.0:
        return entropic_plan(p, q, work["cost"], lo)[0], lo
    beta = optimize.brentq(gap, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)
    return entropic_plan(p, q, work["cost"], beta)[0], beta


def relaxed_transport_lp(p, q, cost, tv_budget):
    """Cheapest plan with row law ``p`` whose column law is within ``tv_budget`` of ``q``."""
    ns, nq = cost.shape
    nv = ns * nq + nq
    cols = np.arange(ns * nq)
    rows_eq = sparse.csr_matrix((np.ones(ns * nq), (cols // nq, cols)), shape=(ns, nv))
    col_sum = sparse.csr_matrix((np.ones(ns * nq), (cols % nq, cols)), shape=(nq, nv))
    slack = sparse.hstack([sparse.csr_matrix((nq, ns * nq)), sparse.eye(nq)])
    total = sparse.hstack([sparse.csr_matrix((1, ns * nq)), sparse.csr_matrix(np.ones((1, nq)))])
    a_ub = sparse.vstack([col_sum - slack, -col_sum - slack, total]).tocsr()
    b_ub = np.concatenate([q, -q, [2.0 * tv_budget]])
    c = np.concatenate([cost.ravel(), np.zeros(nq)])
    res = optimize.linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=rows_eq, b_eq=p, bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"relaxed transport LP failed: {res.message}")
    return np.clip(res.x[: ns * nq].reshape(ns, nq), 0.0, None)


def restoration_channel(in_law, target, cost, rate=None, tv_budget=0.0):
    """Channel mapping ``in_law`` onto ``target`` at least expected cost.

    With ``rate`` set, the channel's mutual information is also capped.
    With ``tv_budget > 0`` the output law only has to be within that total
    variation of ``target`` (incompatible with ``rate``).
    Rows for zero-probability inputs copy ``target``.
    """
    a, b = _probs(in_law), _probs(target)
    cost = np.asarray(cost, float)
    if tv_budget > 0.0:
        if rate is not None:
            raise ValueError("rate and tv_budget cannot be combined")
        plan = relaxed_transport_lp(a, b, cost, tv_budget)
    else:
        plan = transport_lp(a, b, cost) if rate is None else rate_constrained_plan(a, b, cost, rate)[0]
    rows = np.tile(b, (a.size, 1))
    nz = a > 0
    rows[nz] = plan[nz] / plan[nz].sum(axis=1, keepdims=True)
    return Channel(rows)


def _plan_channel(p, plan, fallback):
    rows = np.tile(fallback, (p.size, 1))
    nz = p > 0
    rows[nz] = plan[nz] / plan[nz].sum(axis=1, keepdims=True)
    return Channel(rows)


# ---------------------------------------------------------------------------
# weak-sense single-letter region
# ---------------------------------------------------------------------------

def _boundary(fun, inside, outside, iters=80):
    """Bisection for the last point of the segment where ``fun <= 0``."""
    for _ in range(iters):
        mid = 0.5 * (inside + outside)
        if fun(mid) <= 0.0:
            inside = mid
        else:
            outside = mid
    return inside


def _restore_toward(center, x, feasible, excess=None):
    """Pull ``x`` toward ``center`` until feasible; convexity makes the path monotone.

    ``excess`` (continuous, <= 0 exactly when feasible) enables a root
    search instead of plain bisection.
    """
    if feasible(x):
        return x
    if excess is None:
        t = _boundary(lambda t: 0.0 if feasible(center + t * (x - center)) else 1.0, 0.0, 1.0, iters=60)
        return center + t * (x - center)
    if excess(center) >= 0.0:
        return center
    t = optimize.brentq(lambda t: excess(center + t * (x - center)), 0.0, 1.0, xtol=1e-14)
    while t > 0.0 and not feasible(center + t * (x - center)):
        t = max(0.0, t - 1e-13)
    return center + t * (x - center)


class _MarginalProblem:
    """Evaluates F(r) = min E delta over couplings with marginal r and I <= R."""

    def __init__(self, p, cost, rate):
        self.p, self.cost, self.rate = p, cost, rate
        self.calls = 0

    def solve(self, r):
        self.calls += 1
        r = np.clip(np.asarray(r, float), 0.0, None)
        r = r / r.sum()
        plan, beta = rate_constrained_plan(self.p, r, self.cost, self.rate)
        return float((plan * self.cost).sum()), plan, beta

    def value(self, r):
        return self.solve(r)[0]

    def gradient(self, r, eps=1e-7):
        """Central differences along the simplex tangent, one-sided at faces."""
        k = r.size
        g = np.zeros(k)
        base = self.value(r)
        for i in range(k):
            e = -np.full(k, 1.0 / k)
            e[i] += 1.0
            hp = eps if np.all(r + eps * e >= 0) else 0.0
            hm = eps if np.all(r - eps * e >= 0) else 0.0
            fp = self.value(r + hp * e) if hp else base
            fm = self.value(r - hm * e) if hm else base
            g[i] = (fp - fm) / (hp + hm) if hp + hm else 0.0
        return g - g.mean()


def _project_simplex(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (1.0 - css) / ks > 0)[0][-1]
    theta = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + theta, 0.0)


def _binary_outer(prob, p, f, P, cfg):
    def viol(r0):
        return f.d1(p, [r0, 1.0 - r0]) - P

    lo = 0.0 if viol(0.0) <= 0 else _boundary(viol, p[0], 0.0)
    hi = 1.0 if viol(1.0) <= 0 else _boundary(viol, p[0], 1.0)
    cands = [lo, hi]
    if hi - lo > 1e-15:
        res = optimize.minimize_scalar(
            lambda r0: prob.value([r0, 1.0 - r0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12, "maxiter": 500},
        )
        cands.append(float(res.x))
    vals = [prob.value([c, 1.0 - c]) for c in cands]
    best = cands[int(np.argmin(vals))]
    return np.array([best, 1.0 - best]), {"interval": [lo, hi], "starts_spread": 0.0}


def _slsqp_outer(prob, p, f, P, r0, cfg):
    """SLSQP on r; TV budgets become linear constraints through split variables."""
    k = p.size
    linear_tv = f.name in ("tv", "scaled_tv") and np.isfinite(P)
    if linear_tv:
        # x = (r, t) with |r - p| <= t and sum(t) <= 2P
        x0 = np.concatenate([r0, np.abs(r0 - p)])
        eye = np.eye(k)
        cons = [
            {"type": "eq", "fun": lambda x: x[:k].sum() - 1.0, "jac": lambda x: np.r_[np.ones(k), np.zeros(k)]},
            {"type": "ineq", "fun": lambda x: x[k:] - (x[:k] - p), "jac": lambda x: np.hstack([-eye, eye])},
            {"type": "ineq", "fun": lambda x: x[k:] + (x[:k] - p), "jac": lambda x: np.hstack([eye, eye])},
            {"type": "ineq", "fun": lambda x: 2.0 * P - x[k:].sum(), "jac": lambda x: np.r_[np.zeros(k), -np.ones(k)]},
        ]
        bounds = [(0.0, 1.0)] * k + [(0.0, 2.0)] * k
    else:
        x0 = r0.copy()
        cons = [{"type": "eq", "fun": lambda x: x[:k].sum() - 1.0, "jac": lambda x: np.ones(k)}]
        if np.isfinite(P):
            cons.append({"type": "ineq", "fun": lambda x: P - f.d1(p, np.clip(x[:k], 0.0, None) / max(x[:k].sum(), 1e-300))})
        bounds = [(0.0, 1.0)] * k

    def fun(x):
        return prob.value(np.clip(x[:k], 0.0, None))

    def jac(x):
        g = prob.gradient(np.clip(x[:k], 0.0, None) / max(x[:k].sum(), 1e-300))
        return np.r_[g, np.zeros(x.size - k)]

    res = optimize.minimize(fun, x0, jac=jac, method="SLSQP", bounds=bounds, constraints=cons,
                            options={"maxiter": cfg.refinement_iters, "ftol": 1e-13})
    r = np.clip(res.x[:k], 0.0, None)
    r /= r.sum()
    return r


def _general_outer(prob, p, f, P, cfg):
    k = p.size
    rng = np.random.default_rng(cfg.seed)

    def feasible(r):
        return f.d1(p, r) <= P

    def pgd(r):
        val = prob.value(r)
        step = 0.5
        for _ in range(cfg.refinement_iters):
            g = prob.gradient(r)
            if np.linalg.norm(g) < 1e-12:
                break
            improved = False
            while step > 1e-12:
                cand = _restore_toward(p, _project_simplex(r - step * g), feasible)
                cv = prob.value(cand)
                if cv < val - 1e-15:
                    r, val, improved = cand, cv, True
                    step *= 2.0
                    break
                step *= 0.5
            if not improved or step <= 1e-12:
                break
        return r, val

    def local(r):
        r = _restore_toward(p, r, feasible)
        best, best_val = r, prob.value(r)
        try:
            cand = _restore_toward(p, _slsqp_outer(prob, p, f, P, r, cfg), feasible)
            cv = prob.value(cand)
            if cv < best_val:
                best, best_val = cand, cv
        except (ValueError, SolverError, FloatingPointError):
            pass
        # a few projected-gradient steps clean up after SLSQP's last iterate
        return pgd(best)

    starts = [p.copy(), np.full(k, 1.0 / k)]
    grid = max(2, int(round(cfg.grid_resolution ** (1.0 / max(1, k - 1)))))
    lattice = [np.array(c) / grid for c in itertools.product(range(grid + 1), repeat=k) if sum(c) == grid]
    rng.shuffle(lattice)
    for pt in lattice[: max(0, cfg.starts - len(starts))]:
        starts.append(pt)
    while len(starts) < cfg.starts:
        starts.append(rng.dirichlet(np.ones(k)))
    results = [local(s) for s in starts]
    vals = np.array([v for _, v in results])
    best = results[int(np.argmin(vals))][0]
    spread = float(vals.max() - vals.min())
    if spread > 100 * cfg.tolerance:
        log.warning("multi-start disagreement %.3g in weak-region solve", spread)
    return best, {"starts_spread": spread}


def weak_region_point(source, d, f, R, P, cfg=None):
    """Least distortion with I(S;S_hat) <= R and d_1(P_S, P_S_hat) <= P."""
    cfg = cfg or SolverConfig()
    if R < 0 or P < 0:
        raise ValueError("rate and perception budgets must be nonnegative")
    p = _probs(source).copy()
    cost = _matrix(d)
    if cost.shape != (p.size, p.size):
        raise ValueError("distortion table must be square over the source alphabet")
    if f.d1(p, p) > P:
        raise InfeasibleError("d_1(P_S, P_S) exceeds the perception budget")
    prob = _MarginalProblem(p, cost, R)
    outer = _binary_outer if p.size == 2 else _general_outer
    r, info = outer(prob, p, f, P, cfg)
    D, plan, beta = prob.solve(r)
    witness = _plan_channel(p, plan, r)
    achieved_r = mutual_info(p, witness)
    achieved_p = f.d1(p, push_forward(p, witness))
    info.update({"beta": beta, "evaluations": prob.calls, "I": achieved_r, "d1": achieved_p})
    if achieved_r > R + 10 * cfg.tolerance or achieved_p > P + 10 * cfg.tolerance:
        raise InfeasibleError(f"witness violates budgets: I={achieved_r:.6g}, d1={achieved_p:.6g}")
    R_out = float(R) if np.isfinite(R) else achieved_r
    P_out = float(P) if np.isfinite(P) else achieved_p
    return RegionPoint(R=R_out, D=D, P=P_out, witness=witness, info=info)


def drp_function(source, d, f, R, P, cfg=None):
    """D(R, P) through the weak-sense single-letter form."""
    return weak_region_point(source, d, f, R, P, cfg).D


def region_boundary(source, d, f, kappa, ch, num_points=5, cfg=None, p_grid=None, p_max=None):
    """(D, P) pairs of the separated region at rate kappa * C, sorted by P.

    Without an explicit ``p_grid`` the budgets span ``[0, p_max]``, where
    ``p_max`` defaults to the perception value of the unconstrained optimum
    (or, when that is zero, of a constant reconstruction at the mode).
    A failed point is returned with ``D = nan`` and the error in ``info``.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    cfg = cfg or SolverConfig()
    C, _ = capacity_ba(ch)
    rate = kappa * C
    if p_grid is None:
        if p_max is None:
            free = weak_region_point(source, d, f, rate, np.inf, cfg)
            p_max = free.info["d1"]
            if p_max < cfg.tolerance:
                # realism is free here: span up to the loss of a constant output
                pv = _probs(source)
                p_max = f.d1(pv, np.eye(pv.size)[int(np.argmax(pv))])
        p_grid = np.linspace(0.0, p_max, num_points) if num_points > 1 else [p_max]
    points = []
    for P in sorted(float(x) for x in p_grid):
        try:
            pt = weak_region_point(source, d, f, rate, P, cfg)
        except SolverError as exc:
            pt = RegionPoint(R=rate, D=float("nan"), P=P, witness=None, info={"error": str(exc)})
        points.append(pt)
    return points


# ---------------------------------------------------------------------------
# perfect realism without common randomness
# ---------------------------------------------------------------------------

def _simplex_lattice(k, g):
    return [np.array(c, float) / g for c in itertools.product(range(g + 1), repeat=k) if sum(c) == g]


def _restore_rate(p, A, R):
    """Mix the rows of A toward their average until I(S;W) <= R."""
    q = p @ A
    center = np.tile(q, (A.shape[0], 1))
    return _restore_toward(center, A, lambda M: mutual_info(p, M) <= R, lambda M: mutual_info(p, M) - R)


def _nocr_inner(p, cost, A, R):
    q = p @ A
    nz = q > 0
    cw = np.zeros((A.shape[1], p.size))
    cw[nz] = (A[:, nz].T * p[None, :]) @ cost / q[nz, None]
    plan, _ = rate_constrained_plan(q, p, cw, R)
    return float((plan * cw).sum()), plan, q


def nocr_perfect_realism_D(source, d, R, cfg=None):
    """Least distortion of a separated code with exact realism and no shared randomness.

    Searches chains S -> W -> S_hat with I(S;W) <= R, I(W;S_hat) <= R and
    the law of S_hat equal to the source. The second rate bound is what the
    decoder's private restoration may spend; it is what separates this
    value from the common-randomness optimum.
    """
    cfg = cfg or SolverConfig()
    if R < 0:
        raise ValueError("rate must be nonnegative")
    p = _probs(source).copy()
    cost = _matrix(d)
    ks = p.size
    kw = cfg.aux_alphabet_size or ks + 1
    if kw < ks:
        raise ValueError("aux alphabet must be at least as large as the source alphabet")
    rng = np.random.default_rng(cfg.seed)

    def evaluate(A):
        A = _restore_rate(p, A, R)
        D, plan, q = _nocr_inner(p, cost, A, R)
        return D, A, plan, q

    # coarse lattice over the encoder rows, sized to a fixed budget
    budget = max(50, cfg.grid_resolution * 12)
    g = 1
    while len(_simplex_lattice(kw, g + 1)) ** ks <= budget:
        g += 1
    rows = _simplex_lattice(kw, g)
    scored = []
    for combo in itertools.product(range(len(rows)), repeat=ks):
        A = np.vstack([rows[i] for i in combo])
        try:
            D, *_ = evaluate(A)
        except SolverError as exc:
            log.debug("skipping lattice candidate: %s", exc)
            continue
        scored.append((D, combo))
    if not scored:
        raise InfeasibleError("no feasible restoration on the coarse lattice")
    scored.sort(key=lambda t: t[0])

    def to_logits(A):
        return np.log(np.clip(A, 1e-9, None)).ravel()

    def from_logits(z):
        z = z.reshape(ks, kw)
        z = np.exp(z - z.max(axis=1, keepdims=True))
        return z / z.sum(axis=1, keepdims=True)

    def objective(z):
        try:
            return evaluate(from_logits(z))[0]
        except SolverError:
            return np.inf

    starts = [np.vstack([rows[i] for i in combo]) for _, combo in scored[: cfg.starts]]
    starts.append(rng.dirichlet(np.ones(kw), size=ks))
    best = None
    for A0 in starts:
        z0 = to_logits(A0)
        if cfg.refinement_iters:
            res = optimize.minimize(
                objective,
                z0,
                method="Nelder-Mead",
                options={"maxiter": cfg.refinement_iters * ks * kw, "xatol": 1e-8, "fatol": 1e-10},
            )
            z = res.x if res.fun <= objective(z0) else z0
        else:
            z = z0
        D, A, plan, q = evaluate(from_logits(z))
        if best is None or D < best[0] - 1e-12:
            best = (D, A, plan, q)
    D, A, plan, q = best
    enc = Channel(A)
    rest = _plan_channel(q, plan, p)
    used = max(mutual_info(p, enc), mutual_info(q, rest))
    out_law = (p @ enc.matrix) @ rest.matrix
    if np.abs(out_law - p).max() > 1e-9:
        raise InfeasibleError("restoration failed to reproduce the source law")
    info = {"I": used, "lattice_step": 1.0 / g, "candidates": len(scored), "aux_alphabet_size": kw}
    return RegionPoint(R=float(R), D=D, P=0.0, witness=(enc, rest), info=info)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def points_to_csv(points):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["R", "D", "P"])
    for pt in points:
        w.writerow([repr(float(pt.R)), repr(float(pt.D)), repr(float(pt.P))])
    return buf.getvalue()


def points_from_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["R", "D", "P"]:
        raise ValueError("region CSV must start with header R,D,P")
    return [tuple(float(x) for x in r) for r in rows[1:]]


def points_sidecar(points):
    return json.dumps(
        [{"R": pt.R, "D": pt.D, "P": pt.P, "witness": pt.witness_record(), "info": _jsonable(pt.info)} for pt in points],
        indent=2,
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


__all__ = [
    "SolverConfig",
    "RegionPoint",
    "SolverError",
    "InfeasibleError",
    "capacity_ba",
    "rate_constrained_plan",
    "restoration_channel",
    "weak_region_point",
    "drp_function",
    "region_boundary",
    "nocr_perfect_realism_D",
    "points_to_csv",
    "points_from_csv",
    "points_sidecar",
    "entropy_of",
]
