"""Ground-truth routines: exhaustive boolean enumeration, HILL entropy for the
unbounded class, support functions of entropy superlevel sets and separating
hyperplanes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .distributions import (
    Distribution,
    TVBall,
    _as_order,
    entropy_of_masses,
    smooth_entropy_bruteforce,
)
from .errors import DimensionError, NumericError, SizeCapError, ValidationError
from .extreme import two_valued_entropy

ENUM_MAX_BITS = 4
HILL_MAX_BITS = 20
SEPARATION_MAX_BITS = 16
EQUALITY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class BoolDistinguisher:
    """Accept set of a boolean test on ``{0,1}^n`` stored as a boolean mask."""

    n: int
    accept: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.accept, dtype=bool).copy()
        if mask.shape != (1 << self.n,):
            raise ValidationError(f"mask must have 2^{self.n} entries")
        mask.setflags(write=False)
        object.__setattr__(self, "accept", mask)

    @classmethod
    def from_bits(cls, n: int, bits: int) -> "BoolDistinguisher":
        idx = np.arange(1 << n)
        return cls(n, (bits >> idx) & 1)

    @property
    def size(self) -> int:
        return int(self.accept.sum())

    def complement(self) -> "BoolDistinguisher":
        return BoolDistinguisher(self.n, ~self.accept)

    def values(self) -> np.ndarray:
        return self.accept.astype(np.float64)

    def expectation(self, X: Distribution) -> float:
        return float(X.dense()[self.accept].sum())


@dataclass(frozen=True, eq=False)
class RealDistinguisher:
    """A ``[0,1]``-valued test on ``{0,1}^n``."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (1 << self.n,):
            raise ValidationError(f"expected 2^{self.n} values")
        if np.any(v < 0) or np.any(v > 1) or not np.all(np.isfinite(v)):
            raise ValidationError("distinguisher values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def expectation(self, X: Distribution) -> float:
        if X.n != self.n:
            raise DimensionError(f"distinguisher is on {self.n} bits, distribution on {X.n}")
        return float(np.dot(self.values, X.dense()))


def all_boolean_masks(n: int) -> np.ndarray:
    """Every subset of ``{0,1}^n`` as rows of a ``(2^(2^n), 2^n)`` boolean array."""
    if n > ENUM_MAX_BITS:
        raise SizeCapError(f"exhaustive enumeration is capped at n={ENUM_MAX_BITS}")
    N = 1 << n
    codes = np.arange(1 << N, dtype=np.int64)[:, None]
    return ((codes >> np.arange(N)) & 1).astype(bool)


def bruteforce_metric(X: Distribution, order, epsilon: float = 0.0, absolute: bool = False) -> float:
    """Metric entropy against all ``2^(2^n)`` boolean distinguishers, one by one.

    For each ``D`` with ``E D(X) - eps`` above ``|D|/N`` the largest admissible
    ``k`` is the entropy of the two-valued vector carrying exactly that mass on
    ``D``.  With ``absolute=True`` each ``D`` must also be matched from below,
    which is the same as testing its complement.
    """
    order = _as_order(order)
    n = X.n
    N = 1 << n
    masks = all_boolean_masks(n)
    p = X.dense()
    e = masks.astype(np.float64) @ p
    sizes = masks.sum(axis=1).astype(np.float64)

    def bound(mass, size):
        g = np.minimum(mass - epsilon, 1.0)
        live = (size > 0) & (g > size / N)
        if not live.any():
            return float(n)
        return float(two_valued_entropy(order, n, size[live], g[live]).min())

    k = bound(e, sizes)
    if absolute:
        # lower side: E D(Y) >= E D(X) - eps  <=>  E (1-D)(Y) <= E (1-D)(X) + eps
        k = min(k, bound(1.0 - e, N - sizes))
    return min(float(n), k)


def hill_entropy_unbounded(X: Distribution, order, epsilon: float) -> float:
    """HILL entropy against all ``[0,1]`` tests: largest ``k`` with some ``Y`` of entropy ``k`` within ``eps``."""
    order = _as_order(order)
    if X.n > HILL_MAX_BITS:
        raise SizeCapError(f"HILL computation is capped at n={HILL_MAX_BITS}")
    n = X.n
    if smooth_entropy_bruteforce(X, order, n) <= epsilon:
        return float(n)
    lo, hi = 0.0, float(n)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if smooth_entropy_bruteforce(X, order, mid) <= epsilon:
            lo = mid
        else:
            hi = mid
    return lo


# ------------------------------------------------------------- support function


def _bisect_monotone(f, lo: float, hi: float, iters: int = 200) -> float:
    """Root of a function with ``f(lo) >= 0 > f(hi)``; returns the ``>= 0`` end."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return lo


def support_value(D: np.ndarray, order, k: float) -> float:
    """``max E D(Y)`` over distributions ``Y`` with ``H_alpha(Y) >= k``.

    The maximiser has the form ``(D - nu)_+^(1/(alpha-1))`` (normalised) for
    finite orders, ``exp(s D)`` for Shannon and a water-filled vector capped at
    ``2^-k`` for min-entropy; the free parameter is found by bisection.
    """
    order = _as_order(order)
    D = np.asarray(D, dtype=np.float64)
    N = D.size
    n = math.log2(N)
    top = D.max()
    if k <= 0:
        return float(top)
    if k >= n:
        return float(D.mean())
    if order.is_min:
        cap = 2.0 ** (-k)
        srt = np.sort(D)[::-1]
        full = int(math.floor(2.0 ** k))
        rest = 1.0 - full * cap
        val = cap * srt[:full].sum()
        if full < N:
            val += rest * srt[full]
        return float(val)
    n_top = int(np.count_nonzero(D == top))
    if math.log2(n_top) >= k:
        return float(top)
    if order.is_shannon:
        def y_of(s):
            logw = s * (D - top)
            return np.exp(logw - logsumexp(logw))

        def ent(s):
            return entropy_of_masses(y_of(s), order) - k

        hi = 1.0
        while ent(hi) >= 0:
            hi *= 2.0
            if hi > 1e300:
                raise NumericError("could not bracket the Gibbs parameter")
        s = _bisect_monotone(ent, 0.0, hi)
        return float(np.dot(D, y_of(s)))

    a = order.alpha
    span = max(top - D.min(), 1.0)

    def y_of_log(t):
        w = np.clip(D - (top - math.exp(t)), 0.0, None)
        with np.errstate(divide="ignore"):
            logw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)) / (a - 1.0), -np.inf)
        return np.exp(logw - logsumexp(logw))

    def ent(t):
        # larger offset spreads mass further, raising entropy
        return k - entropy_of_masses(y_of_log(t), order)

    lo_t, hi_t = math.log(span) - 1.0, math.log(span) + 1.0
    while ent(hi_t) > 0:
        hi_t += 2.0
        if hi_t > 700:
            raise NumericError("could not bracket the water level")
    while ent(lo_t) <= 0:
        lo_t -= 2.0
        if lo_t < -745:
            return float(top)
    # ent(lo_t) > 0 (too concentrated); keep the feasible end hi_t
    for _ in range(200):
        mid = 0.5 * (lo_t + hi_t)
        if not lo_t < mid < hi_t:
            break
        if ent(mid) > 0:
            lo_t = mid
        else:
            hi_t = mid
    return float(np.dot(D, y_of_log(hi_t)))


# --------------------------------------------------------- separating hyperplane


@dataclass(frozen=True, eq=False)
class Separation:
    """Optimal ``[0,1]`` test against the set of entropy-``k`` distributions."""

    distinguisher: RealDistinguisher
    advantage: float
    distance: float
    closest: np.ndarray = field(repr=False)


def separating_hyperplane(X: Distribution, order, k: float) -> Separation:
    """Test ``D`` maximising ``E D(X) - max_Y E D(Y)`` over ``Y`` with ``H_alpha(Y) >= k``.

    The closest point ``Y*`` of the superlevel set in statistical distance is
    the flattened ``X``; the optimal ``D`` equals 1 where ``X`` was capped, 0
    where it was raised, and interpolates through the normal cone of the
    entropy constraint at ``Y*`` in between.  The advantage is evaluated with
    the support function, independently of ``Y*``.
    """
    order = _as_order(order)
    if X.n > SEPARATION_MAX_BITS:
        raise SizeCapError(f"separation is capped at n={SEPARATION_MAX_BITS}")
    x = X.dense()
    N = x.size
    delta = smooth_entropy_bruteforce(X, order, k)
    if delta <= 0.0:
        return Separation(RealDistinguisher(X.n, np.zeros(N)), 0.0, 0.0, x.copy())
    ball = TVBall(x)
    y = ball.flatten(delta)
    a, b = ball.levels(delta)
    if delta >= ball.radius_to_uniform or a <= b:
        D = (x > 1.0 / N).astype(np.float64)
    elif order.is_min:
        D = (x > a).astype(np.float64)
    elif order.is_shannon:
        D = (np.log(y) - math.log(b)) / (math.log(a) - math.log(b))
    else:
        e = order.alpha - 1.0
        D = (y ** e - b ** e) / (a ** e - b ** e)
    D = np.clip(D, 0.0, 1.0)
    adv = float(np.dot(D, x)) - support_value(D, order, k)
    return Separation(RealDistinguisher(X.n, D), max(adv, 0.0), delta, y)


def real_metric_entropy(X: Distribution, order, epsilon: float) -> float:
    """Metric entropy against all ``[0,1]`` tests, by bisection on the separation advantage."""
    order = _as_order(order)
    n = X.n
    tol = 1e-12
    if separating_hyperplane(X, order, n).advantage <= epsilon + tol:
        return float(n)
    lo, hi = 0.0, float(n)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if separating_hyperplane(X, order, mid).advantage <= epsilon + tol:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class EqualityCheck:
    metric: float
    hill: float

    @property
    def gap(self) -> float:
        return abs(self.metric - self.hill)

    @property
    def holds(self) -> bool:
        return self.gap <= EQUALITY_TOL

    def __bool__(self) -> bool:
        return self.holds


def metric_equals_hill_check(X: Distribution, order, epsilon: float) -> EqualityCheck:
    """Compare real-class metric entropy with unbounded HILL entropy."""
    if X.n > 6:
        raise SizeCapError("metric/HILL comparison is capped at n=6")
    return EqualityCheck(real_metric_entropy(X, order, epsilon), hill_entropy_unbounded(X, order, epsilon))


# ---------------------------------------------------------- threshold extraction


@dataclass(frozen=True, eq=False)
class ThresholdResult:
    distinguisher: BoolDistinguisher
    threshold: float
    advantage: float
    real_advantage: float


def threshold_extract(D, X: Distribution, Y: Distribution) -> ThresholdResult:
    """Best boolean test of the form ``1{D > t}`` for separating ``X`` from ``Y``.

    Averaging ``1{D > t}`` over ``t`` uniform in ``[0,1]`` gives back ``D``, so
    the best threshold does at least as well as ``D`` itself.
    """
    if isinstance(D, RealDistinguisher):
        vals = D.values
        n = D.n
    else:
        vals = np.asarray(D, dtype=np.float64)
        n = X.n
    if X.n != n or Y.n != n:
        raise DimensionError("distinguisher and distributions must share n")
    diff = X.dense() - Y.dense()
    real_adv = float(np.dot(vals, diff))
    levels = np.unique(vals)
    # t below every value accepts everything (advantage 0); t = each level accepts what lies above it
    thresholds = np.concatenate([[levels[0] - 1.0], levels])
    above = vals[None, :] > thresholds[:, None]
    advs = above.astype(np.float64) @ diff
    best = int(np.argmax(advs))
    t = float(thresholds[best])
    return ThresholdResult(BoolDistinguisher(n, above[best]), t, float(advs[best]), real_adv)


def distinguishing_advantage(D, X: Distribution, Y: Distribution) -> float:
    """``E D(X) - E D(Y)`` for a boolean or real test."""
    vals = D.values() if isinstance(D, BoolDistinguisher) else (
        D.values if isinstance(D, RealDistinguisher) else np.asarray(D, dtype=np.float64))
    return float(np.dot(vals, X.dense() - Y.dense()))
