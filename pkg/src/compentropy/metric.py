"""Metric computational entropy against the class of all boolean distinguishers.

Against every boolean ``D`` of size ``d`` the largest achievable ``E D(X)``
is the mass of the ``d`` heaviest points, and the best a distribution of
entropy ``k`` can do is ``gamma(d)`` from :mod:`compentropy.extreme`.  So
``X`` has metric entropy ``k`` at advantage ``eps`` iff every sorted prefix
sum stays below ``gamma(d) + eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import Distribution, EntropyOrder, JointDistribution, _as_order
from .errors import DomainError, SizeCapError, ValidationError
from .extreme import gamma_values, two_valued_entropy

DECIDE_SLACK = 1e-12
SEARCH_ITERATIONS = 60
COND_MAX_BITS = 10


@dataclass(frozen=True)
class MetricQuery:
    order: EntropyOrder
    epsilon: float = 0.0
    target_k: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "order", _as_order(self.order))
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValidationError(f"epsilon must lie in [0, 1], got {self.epsilon}")


@dataclass(frozen=True)
class MetricDecision:
    """Outcome of a decision query.  On failure ``witness_d`` and ``distinguisher`` certify it."""

    holds: bool
    k: float
    epsilon: float
    margin: float
    witness_d: Optional[int] = None
    distinguisher: Optional[np.ndarray] = field(default=None, repr=False)

    def __bool__(self) -> bool:
        return self.holds


def sorted_prefix(X: Distribution) -> np.ndarray:
    """``S[d-1]`` = total mass of the ``d`` heaviest points, over the stored masses."""
    return np.cumsum(X.sorted_masses())


def top_mass(X: Distribution, d: int) -> float:
    """Sum of the ``d`` largest probabilities of ``X``."""
    if not (1 <= d <= X.size):
        raise DomainError(f"d must lie in [1, 2^n], got {d}")
    s = sorted_prefix(X)
    return float(s[min(d, s.size) - 1])


def _heaviest(X: Distribution, d: int) -> np.ndarray:
    order = np.argsort(-X.masses(), kind="stable")[:d]
    if X.is_dense:
        return np.sort(order)
    return np.sort(X.support[order])


def metric_entropy_decide(X: Distribution, query, k: Optional[float] = None,
                          epsilon: Optional[float] = None) -> MetricDecision:
    """Decide whether ``X`` has metric entropy at least ``k`` at advantage ``epsilon``.

    ``query`` is a :class:`MetricQuery` carrying ``target_k``, or an order with
    ``k``/``epsilon`` given separately.
    """
    if isinstance(query, MetricQuery):
        order, eps, k = query.order, query.epsilon, query.target_k if k is None else k
    else:
        order, eps = _as_order(query), 0.0 if epsilon is None else float(epsilon)
    if k is None:
        raise ValidationError("decision mode needs a target k")
    k = float(k)
    n = X.n
    if k > n + 1e-12:
        return MetricDecision(False, k, eps, -math.inf)
    if k <= 0:
        return MetricDecision(True, k, eps, math.inf)
    S = sorted_prefix(X)
    # beyond the last positive mass the prefix sum is 1 while gamma keeps rising
    live = int(np.count_nonzero(X.sorted_masses() > 0))
    d_max = min(int(math.floor(2.0 ** k * (1.0 + 1e-12))), X.size, max(live, 1))
    d = np.arange(1, d_max + 1, dtype=np.float64)
    gamma = gamma_values(order, n, min(k, n), d)
    excess = S[:d_max] - gamma - eps
    worst = int(np.argmax(excess))
    margin = float(-excess[worst])
    if excess[worst] <= DECIDE_SLACK:
        return MetricDecision(True, k, eps, margin)
    return MetricDecision(False, k, eps, margin, worst + 1, _heaviest(X, worst + 1))


def per_size_thresholds(X: Distribution, order, epsilon: float) -> np.ndarray:
    """For each ``d``, the largest ``k`` the size-``d`` constraint allows (``inf`` if none binds)."""
    order = _as_order(order)
    S = sorted_prefix(X)
    N = 2.0 ** X.n
    d = np.arange(1, S.size + 1, dtype=np.float64)
    g = np.minimum(S - epsilon, 1.0)
    binding = g > d / N
    out = np.full(S.size, np.inf)
    if binding.any():
        out[binding] = two_valued_entropy(order, X.n, d[binding], g[binding])
    return out


def metric_entropy_search(X: Distribution, order, epsilon: float = 0.0,
                          method: str = "bisect") -> float:
    """Largest ``k`` with :func:`metric_entropy_decide` true.

    ``method="bisect"`` runs a fixed-length bisection over ``[0, n]`` calling
    the decision routine; ``method="invert"`` reads the answer off the per-size
    thresholds directly.
    """
    order = _as_order(order)
    n = X.n
    if method == "invert":
        return float(min(n, per_size_thresholds(X, order, epsilon).min()))
    if method != "bisect":
        raise ValidationError(f"unknown method {method!r}")
    if metric_entropy_decide(X, order, n, epsilon).holds:
        return float(n)
    lo, hi = 0.0, float(n)
    for _ in range(SEARCH_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if metric_entropy_decide(X, order, mid, epsilon).holds:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------- conditional


def _column_prefix(XZ: JointDistribution) -> np.ndarray:
    """``(N+1, M)`` array: row ``t`` holds each column's top-``t`` mass."""
    cols = -np.sort(-XZ.table, axis=0)
    S = np.cumsum(cols, axis=0)
    return np.vstack([np.zeros((1, S.shape[1])), S])


def relaxed_scan(XZ: JointDistribution) -> np.ndarray:
    """``R[t-1]`` = max of ``E D(X,Z)`` over boolean ``D`` with every ``|D(.,z)| <= t``."""
    return _column_prefix(XZ)[1:].sum(axis=1)


def relaxed_metric_decide(XZ: JointDistribution, k: float, epsilon: float = 0.0) -> MetricDecision:
    """``E D(X,Z) <= 2^-k max_z |D(.,z)| + eps`` for every boolean ``D``."""
    if k > XZ.n + 1e-12:
        return MetricDecision(False, k, epsilon, -math.inf)
    R = relaxed_scan(XZ)
    t = np.arange(1, R.size + 1, dtype=np.float64)
    excess = R - 2.0 ** (-k) * t - epsilon
    worst = int(np.argmax(excess))
    margin = float(-excess[worst])
    if excess[worst] <= DECIDE_SLACK:
        return MetricDecision(True, k, epsilon, margin)
    top = np.argsort(-XZ.table, axis=0, kind="stable")[: worst + 1]
    mask = np.zeros(XZ.table.shape, dtype=bool)
    np.put_along_axis(mask, top, True, axis=0)
    return MetricDecision(False, k, epsilon, margin, worst + 1, mask)


def relaxed_metric_entropy(XZ: JointDistribution, epsilon: float = 0.0) -> float:
    """Largest ``k <= n`` passing :func:`relaxed_metric_decide`."""
    R = relaxed_scan(XZ)
    t = np.arange(1, R.size + 1, dtype=np.float64)
    g = R - epsilon
    ok = g > 0
    if not ok.any():
        return float(XZ.n)
    return float(min(XZ.n, np.log2(t[ok] / g[ok]).min()))


def _check_cond_size(XZ: JointDistribution) -> None:
    if XZ.n + XZ.m > COND_MAX_BITS:
        raise SizeCapError(f"conditional metric entropy is capped at n+m={COND_MAX_BITS}")


def cond_worst_advantage(XZ: JointDistribution, k: float) -> float:
    """Best boolean advantage against pairs ``(Y,Z)`` with ``H_inf(Y|Z=z) >= k`` for all z."""
    S = _column_prefix(XZ)
    pz = XZ.marginal_z()
    t = np.arange(S.shape[0], dtype=np.float64)[:, None]
    gain = S - pz[None, :] * np.minimum(t * 2.0 ** (-k), 1.0)
    return float(gain.max(axis=0).sum())


def _avg_profile(XZ: JointDistribution) -> np.ndarray:
    """``B[lam]`` for integer multipliers ``lam = 0..N`` of the averaged budget."""
    S = _column_prefix(XZ)
    pz = XZ.marginal_z()
    N = S.shape[0] - 1
    lam = np.arange(N + 1, dtype=np.float64)[:, None]
    d = np.arange(N + 1, dtype=np.float64)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(lam <= d, 1.0 - lam / np.where(d > 0, d, 1.0), (d - lam) / N)
    mu[0, 0] = 0.0
    B = np.zeros(N + 1)
    for z in range(S.shape[1]):
        B += (S[None, :, z] - pz[z] * mu).max(axis=1)
    return B


def cond_avg_advantage(XZ: JointDistribution, k: float) -> float:
    """Best boolean advantage against pairs ``(Y,Z)`` with average min-entropy ``>= k``.

    The inner maximisation is a linear program in the per-z caps; its dual has
    a single multiplier ``lam`` for the averaged budget, and the optimum sits at
    an integer ``lam``.
    """
    B = _avg_profile(XZ)
    lam = np.arange(B.size, dtype=np.float64)
    return float((B - lam * 2.0 ** (-k)).max())


def min_metric_conditional_decide(XZ: JointDistribution, k: float, epsilon: float = 0.0,
                                  average: bool = False) -> MetricDecision:
    """Conditional metric min-entropy decision against all boolean ``D`` on ``(x, z)``."""
    _check_cond_size(XZ)
    if k > XZ.n + 1e-12:
        return MetricDecision(False, k, epsilon, -math.inf)
    adv = cond_avg_advantage(XZ, k) if average else cond_worst_advantage(XZ, k)
    return MetricDecision(adv <= epsilon + DECIDE_SLACK, k, epsilon, epsilon - adv)


def min_metric_conditional_entropy(XZ: JointDistribution, epsilon: float = 0.0,
                                   average: bool = False) -> float:
    """Largest ``k <= n`` passing :func:`min_metric_conditional_decide`."""
    _check_cond_size(XZ)
    n = XZ.n
    if average:
        B = _avg_profile(XZ)
        lam = np.arange(B.size, dtype=np.float64)
        g = B - epsilon
        ok = (lam > 0) & (g > 0)
        if not ok.any():
            return float(n)
        return float(min(n, np.log2(lam[ok] / g[ok]).min()))
    if cond_worst_advantage(XZ, n) <= epsilon + DECIDE_SLACK:
        return float(n)
    lo, hi = 0.0, float(n)
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if cond_worst_advantage(XZ, mid) <= epsilon + DECIDE_SLACK:
            lo = mid
        else:
            hi = mid
    return _polish_worst(XZ, epsilon, lo, hi)


def _polish_worst(XZ: JointDistribution, epsilon: float, lo: float, hi: float) -> float:
    """Solve the advantage equation exactly on the linear piece found by bisection."""
    S = _column_prefix(XZ)
    pz = XZ.marginal_z()
    c = 2.0 ** (-0.5 * (lo + hi))
    t = np.arange(S.shape[0], dtype=np.float64)[:, None]
    arg = (S - pz[None, :] * np.minimum(t * c, 1.0)).argmax(axis=0)
    tz = arg.astype(np.float64)
    below = tz * c < 1.0
    A = S[arg, np.arange(S.shape[1])].sum() - pz[~below].sum()
    B = float((pz * tz)[below].sum())
    if B <= 0 or A - epsilon <= 0:
        return lo
    k = -math.log2((A - epsilon) / B)
    if abs(k - lo) < 1e-9 and cond_worst_advantage(XZ, k) <= epsilon + DECIDE_SLACK:
        return k
    return lo
