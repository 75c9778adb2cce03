"""Linear-programming oracles for min-entropy questions (HiGHS through scipy).

These solve the same quantities as the combinatorial routines in
:mod:`compentropy.metric` and :mod:`compentropy.distributions` by a different
route, and serve as cross-checks.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import csr_matrix, hstack, identity, kron, vstack

from .distributions import Distribution, JointDistribution
from .errors import NumericError, SizeCapError

# HiGHS defaults (1e-7) leave ~1e-9-bit errors in the oracle values
HIGHS_TOL = 1e-10
LP_MAX_BITS = 10
BRUTE_MAX_BITS = 3
MILP_MAX_BITS = 6


def _solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": HIGHS_TOL, "dual_feasibility_tolerance": HIGHS_TOL})
    if res.status != 0:
        raise NumericError(f"linear program failed: {res.message}")
    return res


def smooth_min_distance_lp(X: Distribution, k: float) -> float:
    """``min Delta(X, Y)`` over ``Y`` with every mass at most ``2^-k``."""
    if X.n > LP_MAX_BITS:
        raise SizeCapError(f"LP oracle is capped at n={LP_MAX_BITS}")
    x = X.dense()
    N = x.size
    cap = 2.0 ** (-k)
    # variables [y, e]: minimise sum e, e >= x - y
    c = np.concatenate([np.zeros(N), np.ones(N)])
    I = identity(N, format="csr")
    A_ub = hstack([-I, -I])
    b_ub = -x
    A_eq = csr_matrix(np.concatenate([np.ones(N), np.zeros(N)])[None, :])
    bounds = [(0.0, cap)] * N + [(0.0, None)] * N
    return float(_solve(c, A_ub, b_ub, A_eq, [1.0], bounds).fun)


def _joint_parts(XZ: JointDistribution):
    if XZ.n + XZ.m > LP_MAX_BITS:
        raise SizeCapError(f"LP oracle is capped at n+m={LP_MAX_BITS}")
    return XZ.table, XZ.marginal_z()


def real_cond_min_entropy(XZ: JointDistribution, epsilon: float = 0.0, average: bool = False) -> float:
    """Conditional min-entropy of ``X|Z`` against all ``[0,1]`` tests on ``(x, z)``.

    For the unbounded class the best advantage is the statistical distance to
    the admissible set, so the answer is ``-log2`` of the smallest cap that
    can be met after moving ``eps`` mass inside each column.  Worst case: one
    relative cap ``c`` (each column capped at ``c P(z)``); average case: one
    absolute cap ``c_z`` per column with ``sum c_z`` minimised.
    """
    T, pz = _joint_parts(XZ)
    N, M = T.shape
    p = T.reshape(-1)
    # excess variables e[x, z] >= p[x, z] - cap[x, z]
    E = identity(N * M, format="csr")
    if average:
        # variables [c_0..c_{M-1}, e]: p - c_z - e <= 0
        C = kron(np.ones((N, 1)), identity(M), format="csr")
        c = np.concatenate([np.ones(M), np.zeros(N * M)])
        lb_c = pz / N
    else:
        C = csr_matrix(np.tile(pz, N)[:, None])
        c = np.concatenate([[1.0], np.zeros(N * M)])
        lb_c = np.array([1.0 / N])
    A_ub = vstack([hstack([-C, -E]), hstack([csr_matrix((1, C.shape[1])), csr_matrix(np.ones((1, N * M)))])])
    b_ub = np.concatenate([-p, [epsilon]])
    bounds = [(lo, None) for lo in lb_c] + [(0.0, None)] * (N * M)
    res = _solve(c, A_ub, b_ub, bounds=bounds)
    return float(min(XZ.n, -math.log2(res.fun)))


def relaxed_real_distance(XZ: JointDistribution, k: float) -> float:
    """``min Delta((X,Z), (Y,Z'))`` over pairs with ``H_inf(Y|Z'=z) >= k`` for all z (Z' free)."""
    T, _ = _joint_parts(XZ)
    N, M = T.shape
    p = T.reshape(-1)
    n_var = N * M
    cap = 2.0 ** (-k)
    I = identity(n_var, format="csr")
    # variables [q, e]; e >= p - q; q[x,z] <= cap * sum_x' q[x',z]
    A1 = hstack([-I, -I])
    same_z = kron(np.ones((N, N)), identity(M), format="csr")
    A2 = hstack([I - cap * same_z, csr_matrix((n_var, n_var))])
    A_ub = vstack([A1, A2])
    b_ub = np.concatenate([-p, np.zeros(n_var)])
    A_eq = csr_matrix(np.concatenate([np.ones(n_var), np.zeros(n_var)])[None, :])
    c = np.concatenate([np.zeros(n_var), np.ones(n_var)])
    res = _solve(c, A_ub, b_ub, A_eq, [1.0], [(0.0, None)] * (2 * n_var))
    return float(res.fun)


def relaxed_real_entropy(XZ: JointDistribution, epsilon: float = 0.0, iters: int = 50) -> float:
    """Largest ``k`` with :func:`relaxed_real_distance` at most ``eps`` (bisection)."""
    n = XZ.n
    if relaxed_real_distance(XZ, n) <= epsilon + 1e-10:
        return float(n)
    lo, hi = 0.0, float(n)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if relaxed_real_distance(XZ, mid) <= epsilon + 1e-10:
            lo = mid
        else:
            hi = mid
    return lo


def inner_max_lp(D: np.ndarray, XZ: JointDistribution, k: float, average: bool) -> float:
    """``max E D(Y,Z)`` over admissible ``(Y,Z)`` sharing the marginal of ``Z``."""
    T, pz = _joint_parts(XZ)
    N, M = T.shape
    nq = N * M
    d = np.asarray(D, dtype=np.float64).reshape(-1)
    colsum = kron(np.ones((1, N)), identity(M), format="csr")
    if average:
        # variables [q, c_z]: q[x,z] <= c_z, sum c_z <= 2^-k
        C = kron(np.ones((N, 1)), identity(M), format="csr")
        A_ub = vstack([hstack([identity(nq), -C]), hstack([csr_matrix((1, nq)), csr_matrix(np.ones((1, M)))])])
        b_ub = np.concatenate([np.zeros(nq), [2.0 ** (-k)]])
        A_eq = hstack([colsum, csr_matrix((M, M))])
        c = np.concatenate([-d, np.zeros(M)])
        bounds = [(0.0, None)] * (nq + M)
    else:
        A_ub, b_ub = None, None
        A_eq = colsum
        c = -d
        bounds = [(0.0, 2.0 ** (-k) * pz[i % M]) for i in range(nq)]
    res = _solve(c, A_ub, b_ub, A_eq, pz, bounds)
    return float(-res.fun)


def bruteforce_cond_advantage(XZ: JointDistribution, k: float, average: bool = False) -> float:
    """Best boolean advantage, enumerating every ``D`` on ``(x, z)`` and solving each inner LP."""
    if XZ.n + XZ.m > BRUTE_MAX_BITS:
        raise SizeCapError(f"per-distinguisher enumeration is capped at n+m={BRUTE_MAX_BITS}")
    p = XZ.probs
    best = 0.0
    for bits in itertools.product((0.0, 1.0), repeat=p.size):
        D = np.array(bits)
        best = max(best, float(D @ p) - inner_max_lp(D, XZ, k, average))
    return best


def milp_cond_advantage(XZ: JointDistribution, k: float, average: bool = False) -> float:
    """Best boolean advantage as one mixed-integer program.

    The inner maximisation is replaced by its LP dual, so ``D`` (binary) and
    the dual multipliers are optimised jointly.
    """
    if XZ.n + XZ.m > MILP_MAX_BITS:
        raise SizeCapError(f"MILP oracle is capped at n+m={MILP_MAX_BITS}")
    T, pz = XZ.table, XZ.marginal_z()
    N, M = T.shape
    nq = N * M
    c_k = 2.0 ** (-k)
    p = T.reshape(-1)
    zcol = np.tile(np.arange(M), N)
    # variables [D (nq), mu (M), nu (nq), lam]
    nv = 2 * nq + M + 1
    obj = np.zeros(nv)
    obj[:nq] = -p
    obj[nq:nq + M] = pz
    if average:
        obj[-1] = c_k
    else:
        obj[nq + M:nq + M + nq] = c_k * pz[zcol]
    rows = []
    # D - mu_z - nu <= 0
    A = np.zeros((nq, nv))
    A[np.arange(nq), np.arange(nq)] = 1.0
    A[np.arange(nq), nq + zcol] = -1.0
    A[np.arange(nq), nq + M + np.arange(nq)] = -1.0
    rows.append(LinearConstraint(A, -np.inf, 0.0))
    if average:
        B = np.zeros((M, nv))
        for i in range(nq):
            B[zcol[i], nq + M + i] = 1.0
        B[:, -1] = -1.0
        rows.append(LinearConstraint(B, -np.inf, 0.0))
    lb = np.concatenate([np.zeros(nq), -np.full(M, np.inf), np.zeros(nq), [0.0]])
    ub = np.concatenate([np.ones(nq), np.full(M, np.inf), np.full(nq, np.inf), [np.inf if average else 0.0]])
    integrality = np.concatenate([np.ones(nq), np.zeros(nv - nq)])
    res = milp(obj, constraints=rows, integrality=integrality, bounds=Bounds(lb, ub),
               options={"mip_rel_gap": 0.0})
    if res.status != 0:
        raise NumericError(f"MILP failed: {res.message}")
    return float(-res.fun)
