"""Extreme distributions: the maximiser of ``E D(Y)`` over an entropy superlevel set.

For a boolean ``D`` with ``|D| = d`` on ``{0,1}^n`` the maximiser of
``E D(Y)`` subject to ``H_alpha(Y) >= k`` is two-valued: mass ``p`` on each
accepted point and ``q`` on each rejected one.  Writing ``gamma = p*d`` the
pair satisfies

    d*p + (N-d)*q = 1,    d*p^alpha + (N-d)*q^alpha = 2^(-(alpha-1)k),

with the Shannon limit ``-d p log p - (N-d) q log q = k`` and the
min-entropy limit ``p = 2^-k``.  ``gamma`` is the largest root; it lies on
the branch ``[d/N, 1]`` where the entropy of the two-valued vector is
strictly decreasing in ``gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import xlogy

from .distributions import LN2, EntropyOrder, _as_order
from .errors import DomainError, NumericError, SaturationError

MAX_ITER = 200
SATURATION_RTOL = 1e-12


@dataclass(frozen=True)
class ExtremeSolution:
    """Two-valued maximiser; ``gamma`` is the total mass on the accepted set."""

    order: EntropyOrder
    n: int
    k: float
    d: float
    p: float
    q: float
    gamma: float
    unique: bool

    def mass_residual(self) -> float:
        N = 2.0 ** self.n
        return abs(self.p * self.d + self.q * (N - self.d) - 1.0)

    def entropy(self) -> float:
        return two_valued_entropy(self.order, self.n, self.d, self.gamma)

    def entropy_residual(self) -> float:
        """``|H_alpha(solution) - k|`` in bits."""
        return abs(self.entropy() - self.k)

    def power_residual(self) -> float:
        """Relative residual of ``d p^a + (N-d) q^a = 2^(-(a-1)k)`` (finite orders only)."""
        a = self.order.alpha
        if not (1.0 < a < math.inf):
            return self.entropy_residual()
        N = 2.0 ** self.n
        log_lhs = _log_power_sum(a, self.d, N, np.float64(self.gamma))
        return abs(math.expm1(float(log_lhs) + self.k * (a - 1.0) * LN2))

    def as_dict(self) -> dict:
        return {
            "order": str(self.order),
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "p": self.p,
            "q": self.q,
            "gamma": self.gamma,
            "unique": self.unique,
        }


def _log_power_sum(a: float, d, N: float, g):
    """``ln(g^a d^(1-a) + (1-g)^a (N-d)^(1-a))``, safe for large ``a``."""
    g = np.asarray(g, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    with np.errstate(divide="ignore"):
        t1 = a * np.log(g) + (1.0 - a) * np.log(d)
        rest = N - d
        t2 = np.where(
            rest > 0,
            a * np.log1p(-g) + (1.0 - a) * np.log(np.where(rest > 0, rest, 1.0)),
            -np.inf,
        )
    return np.logaddexp(t1, t2)


def two_valued_entropy(order, n: int, d, gamma):
    """Entropy (bits) of mass ``gamma`` spread evenly on ``d`` points and ``1-gamma`` on the rest."""
    order = _as_order(order)
    N = 2.0 ** n
    d = np.asarray(d, dtype=np.float64)
    g = np.asarray(gamma, dtype=np.float64)
    rest = N - d
    safe_rest = np.where(rest > 0, rest, 1.0)
    if order.is_min:
        p = g / d
        q = np.where(rest > 0, (1.0 - g) / safe_rest, 0.0)
        out = -np.log2(np.maximum(p, q))
    elif order.is_shannon:
        # -g log(g/d) - (1-g) log((1-g)/(N-d)), with 0 log 0 = 0
        out = (-xlogy(g, g) + g * np.log(d) - xlogy(1.0 - g, 1.0 - g)
               + (1.0 - g) * np.log(safe_rest)) / LN2
    else:
        a = order.alpha
        out = _log_power_sum(a, d, N, g) / ((1.0 - a) * LN2)
    return out if out.ndim else float(out)


def _signed_gap(order: EntropyOrder, n: int, k: float, d: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Positive once ``gamma`` has moved past the root (entropy dropped below k)."""
    return k - two_valued_entropy(order, n, d, g)


def _bisect(order: EntropyOrder, n: int, k: float, d: np.ndarray):
    """Vectorised bisection on ``gamma`` over ``[d/N, 1]`` down to adjacent floats."""
    N = 2.0 ** n
    lo = d / N
    hi = np.ones_like(d)
    it = 0
    for it in range(1, MAX_ITER + 1):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not active.any():
            break
        up = _signed_gap(order, n, k, d, mid) <= 0.0
        lo = np.where(active & up, mid, lo)
        hi = np.where(active & ~up, mid, hi)
    else:
        raise NumericError(f"bisection did not reach float resolution in {MAX_ITER} steps")
    # of the two bracketing floats, keep the one with the smaller residual
    rl = np.abs(_signed_gap(order, n, k, d, lo))
    rh = np.abs(_signed_gap(order, n, k, d, hi))
    return np.where(rh <= rl, hi, lo), it


def _closed_form(order: EntropyOrder, n: int, k: float, d: np.ndarray):
    N = 2.0 ** n
    if order.is_min:
        return np.minimum(d * 2.0 ** (-k), 1.0)
    if order.alpha == 2.0:
        spread = max(2.0 ** (-k - n) - 2.0 ** (-2 * n), 0.0)
        return np.minimum(d / N + np.sqrt(d * (N - d) * spread), 1.0)
    return None


def _validate(n: int, k: float, d) -> np.ndarray:
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not (0.0 <= k <= n + 1e-12):
        raise DomainError(f"k must lie in [0, n]; got k={k}, n={n}")
    d = np.atleast_1d(np.asarray(d, dtype=np.float64))
    N = 2.0 ** n
    if np.any(d < 1) or np.any(d > N):
        raise DomainError(f"d must lie in [1, 2^n]; got {d.min()}..{d.max()}")
    budget = 2.0 ** k
    if np.any(d > budget * (1.0 + SATURATION_RTOL)):
        raise SaturationError(f"d={d.max():g} exceeds 2^k={budget:g}; the maximum of E D(Y) is 1")
    return d


def gamma_values(order, n: int, k: float, d, method: str = "bisect"):
    """Vector of ``gamma(d)`` values; ``method`` picks the root-finder for non-closed-form orders."""
    order = _as_order(order)
    d = _validate(n, k, d)
    k = min(float(k), float(n))
    N = 2.0 ** n
    full = d >= N
    g = _closed_form(order, n, k, d)
    if g is None:
        if method == "bisect":
            g, _ = _bisect(order, n, k, d)
        elif method == "brent":
            g = np.array([_brent_one(order, n, k, float(di)) for di in d])
        else:
            raise DomainError(f"unknown method {method!r}")
    g = np.where(full, 1.0, g)
    return np.minimum(g, 1.0)


def _brent_one(order: EntropyOrder, n: int, k: float, d: float) -> float:
    N = 2.0 ** n
    lo, hi = d / N, 1.0
    f = lambda g: float(_signed_gap(order, n, k, np.float64(d), np.float64(g)))
    flo, fhi = f(lo), f(hi)
    if flo >= 0.0:
        return lo
    if fhi <= 0.0:
        return hi
    try:
        return brentq(f, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=MAX_ITER)
    except (RuntimeError, ValueError) as exc:
        raise NumericError(f"Brent failed on [{lo}, {hi}] with f = ({flo}, {fhi}): {exc}") from None


def solve_extreme(order, n: int, k: float, d: float, method: str = "bisect") -> ExtremeSolution:
    """Greatest solution ``(p, q, gamma)`` of the extreme-distribution system.

    Raises :class:`SaturationError` when ``d > 2^k``: every distribution of
    entropy ``k`` can then put all its mass on the accepted set.
    """
    order = _as_order(order)
    gamma = float(gamma_values(order, n, k, d, method)[0])
    N = 2.0 ** n
    d = float(d)
    p = gamma / d
    q = 0.0 if d >= N else max((1.0 - gamma) / (N - d), 0.0)
    # a second root on the decreasing branch exists iff the rejected set alone is not too small
    unique = bool(order.is_min or N - d > 2.0 ** k)
    return ExtremeSolution(order, int(n), float(k), d, p, q, gamma, unique)


def gamma_curve(order, n: int, k: float, d_max: int, method: str = "bisect") -> np.ndarray:
    """``gamma(d)`` for ``d = 1..d_max``."""
    return gamma_values(order, n, k, np.arange(1, int(d_max) + 1, dtype=np.float64), method)


def gamma_derivative(order, n: int, k: float, d: float) -> float:
    """Derivative of ``gamma`` with respect to a real-valued ``d``.

    Finite order: ``(a-1)(p^a - q^a) / (a (p^(a-1) - q^(a-1)))``; Shannon
    limit ``(p - q) / (ln p - ln q)``; min-entropy ``2^-k``.
    """
    order = _as_order(order)
    if order.is_min:
        return 2.0 ** (-k)
    sol = solve_extreme(order, n, k, d)
    p, q = sol.p, sol.q
    if not p > q:
        raise DomainError(f"degenerate solution p = q = {p!r}; the derivative is undefined")
    if order.is_shannon:
        if q == 0.0:
            return 0.0
        return (p - q) / (math.log(p) - math.log(q))
    a = order.alpha
    r = q / p
    return (a - 1.0) / a * p * (1.0 - r ** a) / (1.0 - r ** (a - 1.0))
