"""Distributions over binary cubes and their information-theoretic entropies.

Points of ``{0,1}^n`` are indexed by the integer whose binary expansion, most
significant bit first, is the bit string.  All logarithms are base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionError, DomainError, SizeCapError, ValidationError

MASS_TOL = 1e-12
MAX_DENSE_BITS = 20
MAX_EMBEDDED_BITS = 64
LN2 = math.log(2.0)


@dataclass(frozen=True)
class EntropyOrder:
    """Rényi order: ``alpha == 1`` is Shannon, ``alpha == inf`` is min-entropy."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (a == 1.0 or a > 1.0):
            raise ValidationError(f"Rényi order must be 1 (Shannon), >1 or inf; got {self.alpha}")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def shannon(cls) -> "EntropyOrder":
        return cls(1.0)

    @classmethod
    def min_entropy(cls) -> "EntropyOrder":
        return cls(math.inf)

    @classmethod
    def finite(cls, alpha: float) -> "EntropyOrder":
        if not (1.0 < alpha < math.inf):
            raise ValidationError(f"finite order needs 1 < alpha < inf, got {alpha}")
        return cls(alpha)

    @classmethod
    def parse(cls, text: str) -> "EntropyOrder":
        """Parse ``shannon``, ``min``, ``collision`` or ``alpha=<v>``."""
        t = str(text).strip().lower()
        if t in ("shannon", "1", "alpha=1"):
            return cls.shannon()
        if t in ("min", "inf", "alpha=inf", "min-entropy"):
            return cls.min_entropy()
        if t == "collision":
            return cls(2.0)
        if t.startswith("alpha="):
            t = t[len("alpha="):]
        try:
            value = float(t)
        except ValueError:
            raise ValidationError(f"unrecognised entropy order {text!r}") from None
        return cls.finite(value) if math.isfinite(value) else cls.min_entropy()

    @property
    def is_shannon(self) -> bool:
        return self.alpha == 1.0

    @property
    def is_min(self) -> bool:
        return math.isinf(self.alpha)

    @property
    def kind(self) -> str:
        if self.is_shannon:
            return "shannon"
        if self.is_min:
            return "min"
        return "finite"

    def __str__(self) -> str:
        if self.is_shannon:
            return "shannon"
        if self.is_min:
            return "min"
        return f"alpha={self.alpha:g}"


SHANNON = EntropyOrder.shannon()
COLLISION = EntropyOrder(2.0)
MIN_ENTROPY = EntropyOrder.min_entropy()


def _as_order(order) -> EntropyOrder:
    if isinstance(order, EntropyOrder):
        return order
    if isinstance(order, str):
        return EntropyOrder.parse(order)
    return EntropyOrder(float(order))


def _check_mass(probs: np.ndarray, what: str) -> None:
    if probs.ndim != 1:
        raise ValidationError(f"{what}: probabilities must be a flat sequence")
    if not np.all(np.isfinite(probs)):
        raise ValidationError(f"{what}: non-finite probability")
    neg = np.flatnonzero(probs < 0)
    if neg.size:
        raise ValidationError(f"{what}: probs[{neg[0]}] = {probs[neg[0]]!r} is negative")
    total = math.fsum(probs.tolist())
    if abs(total - 1.0) > MASS_TOL:
        raise ValidationError(f"{what}: total mass {total!r} differs from 1 by more than {MASS_TOL}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability distribution on ``{0,1}^n``.

    Dense form stores all ``2^n`` masses (``n <= 20``).  Embedded form stores
    masses only on ``support`` (distinct point indices, ``n <= 64``); every
    other point has mass zero.
    """

    n: int
    probs: np.ndarray
    support: Optional[np.ndarray] = None

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValidationError(f"bit-width must be positive, got {self.n}")
        probs = _frozen(self.probs)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "probs", probs)
        if self.support is None:
            if n > MAX_DENSE_BITS:
                raise SizeCapError(f"dense distributions are capped at n={MAX_DENSE_BITS}, got {n}")
            if probs.size != 1 << n:
                raise ValidationError(f"expected {1 << n} probabilities for n={n}, got {probs.size}")
        else:
            if n > MAX_EMBEDDED_BITS:
                raise SizeCapError(f"embedded distributions are capped at n={MAX_EMBEDDED_BITS}")
            support = np.array(self.support, dtype=np.uint64)
            support.setflags(write=False)
            if support.shape != probs.shape:
                raise ValidationError("support and probs must have the same length")
            if support.size and (n < 64 and int(support.max()) >= (1 << n)):
                raise ValidationError(f"support index outside {{0,1}}^{n}")
            if np.unique(support).size != support.size:
                raise ValidationError("support indices must be distinct")
            object.__setattr__(self, "support", support)
        _check_mass(probs, "distribution")

    @property
    def size(self) -> int:
        """Number of points in the domain, ``2^n``."""
        return 1 << self.n

    @property
    def is_dense(self) -> bool:
        return self.support is None

    def masses(self) -> np.ndarray:
        """The explicitly stored masses (all of them when dense)."""
        return self.probs

    def dense(self) -> np.ndarray:
        if self.is_dense:
            return self.probs
        if self.n > MAX_DENSE_BITS:
            raise SizeCapError(f"cannot densify a distribution over {{0,1}}^{self.n}")
        out = np.zeros(self.size)
        out[self.support.astype(np.int64)] = self.probs
        return out

    def sorted_masses(self) -> np.ndarray:
        """Stored masses in non-increasing order; unstored points are zeros."""
        return np.sort(self.probs)[::-1]

    def to_dense(self) -> "Distribution":
        return self if self.is_dense else Distribution(self.n, self.dense())

    def __repr__(self) -> str:
        form = "dense" if self.is_dense else f"support={self.probs.size}"
        return f"Distribution(n={self.n}, {form})"


def uniform(n: int) -> Distribution:
    return Distribution(n, np.full(1 << n, 1.0 / (1 << n)))


def point_mass(n: int, x: int = 0) -> Distribution:
    p = np.zeros(1 << n)
    p[x] = 1.0
    return Distribution(n, p)


def normalized(n: int, weights) -> Distribution:
    """Explicit normalisation helper; nothing in the library normalises silently."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or w.sum() <= 0:
        raise ValidationError("weights must be non-negative with positive total")
    return Distribution(n, w / w.sum())


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Distribution of a pair ``(X, Z)`` on ``{0,1}^n x {0,1}^m``.

    ``probs`` is row-major in ``(x, z)`` with ``z`` varying fastest, so
    ``table[x, z] == probs[x * 2**m + z]``.
    """

    n: int
    m: int
    probs: np.ndarray
    _table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n, m = int(self.n), int(self.m)
        if n < 1 or m < 0:
            raise ValidationError(f"need n >= 1 and m >= 0, got n={self.n}, m={self.m}")
        if n + m > MAX_DENSE_BITS:
            raise SizeCapError(f"joint distributions are capped at n+m={MAX_DENSE_BITS}")
        probs = _frozen(self.probs)
        if probs.size != 1 << (n + m):
            raise ValidationError(f"expected {1 << (n + m)} probabilities, got {probs.size}")
        _check_mass(probs, "joint distribution")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "probs", probs)
        table = probs.reshape(1 << n, 1 << m)
        object.__setattr__(self, "_table", table)

    @classmethod
    def from_table(cls, table) -> "JointDistribution":
        t = np.asarray(table, dtype=np.float64)
        rows, cols = t.shape
        n, m = rows.bit_length() - 1, cols.bit_length() - 1
        if 1 << n != rows or 1 << m != cols:
            raise ValidationError(f"table shape {t.shape} is not (2^n, 2^m)")
        return cls(n, m, t.reshape(-1))

    @classmethod
    def independent(cls, x: Distribution, z_probs) -> "JointDistribution":
        z = np.asarray(z_probs, dtype=np.float64)
        m = z.size.bit_length() - 1
        return cls(x.n, m, np.outer(x.dense(), z).reshape(-1))

    @classmethod
    def from_leak(cls, x: Distribution, leak, m: int) -> "JointDistribution":
        """Joint of ``X`` and ``Z = leak[X]`` for a table ``leak`` of m-bit values."""
        leak = np.asarray(leak, dtype=np.int64)
        px = x.dense()
        if leak.shape != px.shape:
            raise DimensionError("leak table must have one entry per point of X")
        if np.any(leak < 0) or np.any(leak >= 1 << m):
            raise ValidationError(f"leak values must lie in [0, 2^{m})")
        t = np.zeros((px.size, 1 << m))
        t[np.arange(px.size), leak] = px
        return cls(x.n, m, t.reshape(-1))

    @property
    def table(self) -> np.ndarray:
        """Read-only ``(2^n, 2^m)`` view."""
        return self._table

    def marginal_x(self) -> Distribution:
        return Distribution(self.n, self._table.sum(axis=1))

    def marginal_z(self) -> np.ndarray:
        return self._table.sum(axis=0)

    def conditional(self, z: int) -> Distribution:
        col = self._table[:, z]
        mass = col.sum()
        if mass <= 0:
            raise DomainError(f"z={z} has zero probability")
        return Distribution(self.n, col / mass)

    def as_distribution(self) -> Distribution:
        """The pair viewed as one distribution on ``{0,1}^(n+m)``."""
        return Distribution(self.n + self.m, self.probs)

    def __repr__(self) -> str:
        return f"JointDistribution(n={self.n}, m={self.m})"


def entropy_of_masses(p: np.ndarray, order) -> float:
    """Rényi entropy (bits) of a vector of masses; zeros are ignored."""
    order = _as_order(order)
    p = np.asarray(p, dtype=np.float64)
    p = p[p > 0]
    if p.size == 0:
        raise ValidationError("no positive mass")
    if order.is_min:
        return float(-math.log2(p.max()))
    if order.is_shannon:
        # 0 log 0 = 0 convention
        return float(-np.dot(p, np.log2(p)))
    a = order.alpha
    lse = logsumexp(a * np.log(p))
    return float(lse / ((1.0 - a) * LN2))


def renyi_entropy(X: Distribution, order) -> float:
    """Rényi entropy of ``X`` in bits (Shannon for order 1, min-entropy for inf)."""
    return entropy_of_masses(X.masses(), order)


def shannon_entropy(X: Distribution) -> float:
    return renyi_entropy(X, SHANNON)


def min_entropy(X: Distribution) -> float:
    return renyi_entropy(X, MIN_ENTROPY)


def collision_entropy(X: Distribution) -> float:
    return renyi_entropy(X, COLLISION)


def statistical_distance(X: Distribution, Y: Distribution) -> float:
    """Total variation distance ``(1/2) sum_x |P_X(x) - P_Y(x)|``."""
    if X.n != Y.n:
        raise DimensionError(f"bit-widths differ: {X.n} vs {Y.n}")
    if X.is_dense and Y.is_dense:
        return 0.5 * float(np.abs(X.probs - Y.probs).sum())
    # embedded: align on the union of supports
    def _items(D):
        if D.is_dense:
            idx = np.flatnonzero(D.probs).astype(np.uint64)
            return idx, D.probs[D.probs > 0]
        return D.support, D.probs

    ix, px = _items(X)
    iy, py = _items(Y)
    keys = np.union1d(ix, iy)
    a = np.zeros(keys.size)
    b = np.zeros(keys.size)
    a[np.searchsorted(keys, ix)] = px
    b[np.searchsorted(keys, iy)] = py
    return 0.5 * float(np.abs(a - b).sum())


def _columns(XZ: JointDistribution):
    pz = XZ.marginal_z()
    live = np.flatnonzero(pz > 0)
    if live.size == 0:
        raise DomainError("no z value has positive probability")
    return XZ.table[:, live], pz[live]


def cond_min_entropy_worst(XZ: JointDistribution) -> float:
    """``min_z H_inf(X | Z=z)`` over z in the support of Z."""
    cols, pz = _columns(XZ)
    worst = (cols.max(axis=0) / pz).max()
    return float(-math.log2(worst))


def cond_min_entropy_avg(XZ: JointDistribution) -> float:
    """Average conditional min-entropy ``-log E_z max_x P(x|z)``."""
    cols, _ = _columns(XZ)
    return float(-math.log2(cols.max(axis=0).sum()))


class TVBall:
    """Flattest distribution inside a total-variation ball around ``x``.

    For radius ``delta`` the vector ``clip(x, b, a)`` (top capped at level a,
    bottom raised to level b, each moving ``delta`` mass) is majorized by every
    distribution within distance ``delta`` of ``x``.  Every Schur-concave
    entropy is therefore maximised over the ball at this vector.
    """

    def __init__(self, x: np.ndarray):
        self.x = np.asarray(x, dtype=np.float64)
        N = self.x.size
        self._desc = np.sort(self.x)[::-1]
        self._asc = self._desc[::-1]
        self._cdesc = np.cumsum(self._desc)
        self._casc = np.cumsum(self._asc)
        self._j = np.arange(1, N + 1, dtype=np.float64)
        self.radius_to_uniform = 0.5 * float(np.abs(self.x - 1.0 / N).sum())

    def levels(self, delta: float):
        """Cap and floor levels ``(a, b)`` for radius ``delta``."""
        a_j = (self._cdesc - delta) / self._j
        nxt = np.append(self._desc[1:], -np.inf)
        a = a_j[np.argmax(nxt <= a_j)]
        b_j = (self._casc + delta) / self._j
        nxt = np.append(self._asc[1:], np.inf)
        b = b_j[np.argmax(nxt >= b_j)]
        return float(a), float(b)

    def flatten(self, delta: float) -> np.ndarray:
        N = self.x.size
        if delta <= 0:
            return self.x.copy()
        if delta >= self.radius_to_uniform:
            return np.full(N, 1.0 / N)
        a, b = self.levels(delta)
        if a <= b:
            return np.full(N, 1.0 / N)
        return np.clip(self.x, b, a)


def flattest_within(X: Distribution, delta: float) -> Distribution:
    """Majorization-minimal distribution at statistical distance <= delta from X."""
    return Distribution(X.n, TVBall(X.dense()).flatten(delta))


def smooth_entropy(X: Distribution, order, epsilon: float) -> float:
    """Smooth Rényi entropy: the largest ``H_alpha(Y)`` with ``Delta(X, Y) <= epsilon``."""
    return entropy_of_masses(TVBall(X.dense()).flatten(epsilon), order)


def smooth_entropy_bruteforce(X: Distribution, order, k: float, *, tol: float = 1e-15) -> float:
    """Smallest ``Delta(X, Y)`` over ``Y`` with ``H_alpha(Y) >= k``.

    ``H^eps_alpha(X) >= k`` iff the returned distance is at most ``eps``.
    Min-entropy is closed form (excess mass above ``2^-k``); other orders
    bisect on the radius of the flattest-distribution family, returning the
    feasible end of the bracket.
    """
    order = _as_order(order)
    if X.n > 10 and not X.is_dense:
        raise SizeCapError("smooth entropy needs a dense distribution")
    x = X.dense()
    n = X.n
    if k > n + 1e-12:
        raise DomainError(f"no distribution on {{0,1}}^{n} has entropy {k} > {n}")
    if k <= 0:
        return 0.0
    if order.is_min:
        return float(np.clip(x - 2.0 ** (-k), 0.0, None).sum())
    if entropy_of_masses(x, order) >= k:
        return 0.0
    ball = TVBall(x)
    lo, hi = 0.0, ball.radius_to_uniform
    target = min(k, float(n)) - 1e-12
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if entropy_of_masses(ball.flatten(mid), order) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def cond_smooth_min_distance(XZ: JointDistribution, k: float) -> float:
    """Smallest distance from (X,Z) to some (Y,Z) with ``H_inf(Y|Z=z) >= k`` for every z."""
    if k > XZ.n + 1e-12:
        raise DomainError(f"k={k} exceeds n={XZ.n}")
    if k <= 0:
        return 0.0
    cap = 2.0 ** (-k) * XZ.marginal_z()
    return float(np.clip(XZ.table - cap[None, :], 0.0, None).sum())


def cond_smooth_min_entropy(XZ: JointDistribution, epsilon: float) -> float:
    """Largest ``k`` with :func:`cond_smooth_min_distance` at most ``epsilon``."""
    n = XZ.n
    if cond_smooth_min_distance(XZ, n) <= epsilon:
        return float(n)
    lo, hi = 0.0, float(n)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if cond_smooth_min_distance(XZ, mid) <= epsilon:
            lo = mid
        else:
            hi = mid
    return lo
