"""Explicit separating distributions and the hard-subset separation experiments.

The fooling distributions put decreasing masses ``gamma(d) - gamma(d-1)`` on
a support of size ``2^k``, so every sorted prefix sum meets the extreme bound
exactly: no boolean test beats an entropy-``k`` distribution, yet the actual
entropy is noticeably below ``k``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .distributions import (
    MIN_ENTROPY,
    SHANNON,
    Distribution,
    EntropyOrder,
    JointDistribution,
    _as_order,
    cond_min_entropy_avg,
    cond_min_entropy_worst,
    cond_smooth_min_entropy,
    smooth_entropy,
)
from .errors import DomainError, ValidationError
from .extreme import gamma_curve
from .randomized import make_rng

SHANNON_MAX_K = 16
DEFAULT_SHANNON_C = 1.0 / 8.0
MAX_SEPARATION_BITS = 20
MAX_FAMILY = 1_000_000


@dataclass(frozen=True)
class FoolingSpec:
    order: EntropyOrder
    n: int
    k: int
    c: float = DEFAULT_SHANNON_C

    def __post_init__(self):
        object.__setattr__(self, "order", _as_order(self.order))
        if float(self.k) != int(self.k) or self.k < 1:
            raise ValidationError(f"k must be a positive integer (support size 2^k), got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if self.k > self.n - 2:
            raise ValidationError(f"need k <= n - 2, got n={self.n}, k={self.k}")
        if not (self.order.is_shannon or self.order.alpha == 2.0):
            raise ValidationError("fooling distributions are built for Shannon or collision entropy")
        if self.order.is_shannon:
            if self.k > self.c * self.n:
                raise ValidationError(f"Shannon construction needs k <= c*n (c={self.c}), got n={self.n}, k={self.k}")
            if self.k > SHANNON_MAX_K:
                raise ValidationError(f"Shannon construction is capped at k={SHANNON_MAX_K}")


def support_points(n: int, k: int) -> np.ndarray:
    """``x^d`` for ``d = 1..2^k``: the bits of ``d-1`` followed by ``n-k`` zeros."""
    return np.arange(1 << k, dtype=np.uint64) << np.uint64(n - k)


def _embed(n: int, k: int, masses: np.ndarray) -> Distribution:
    idx = support_points(n, k)
    if n <= 20:
        dense = np.zeros(1 << n)
        dense[idx.astype(np.int64)] = masses
        return Distribution(n, dense)
    return Distribution(n, masses, idx)


def collision_masses(n: int, k: int) -> np.ndarray:
    """``2^-n + (sqrt(d(N-d)) - sqrt((d-1)(N-d+1))) * sqrt(2^(-k-n) - 2^(-2n))``, d = 1..2^k."""
    N = 2.0 ** n
    d = np.arange(1, (1 << k) + 1, dtype=np.float64)
    scale = math.sqrt(2.0 ** (-k - n) - 2.0 ** (-2 * n))
    return 1.0 / N + (np.sqrt(d * (N - d)) - np.sqrt((d - 1.0) * (N - d + 1.0))) * scale


@lru_cache(maxsize=32)
def _shannon_masses(n: int, k: int) -> np.ndarray:
    gamma = gamma_curve(SHANNON, n, k, 1 << k)
    masses = np.diff(np.concatenate([[0.0], gamma]))
    masses.setflags(write=False)
    return masses


def build_collision_fooler(spec: FoolingSpec) -> Distribution:
    if spec.order.alpha != 2.0:
        raise ValidationError("collision fooler needs order alpha=2")
    return _embed(spec.n, spec.k, collision_masses(spec.n, spec.k))


def build_shannon_fooler(spec: FoolingSpec) -> Distribution:
    if not spec.order.is_shannon:
        raise ValidationError("Shannon fooler needs the Shannon order")
    return _embed(spec.n, spec.k, np.array(_shannon_masses(spec.n, spec.k)))


def build_fooler(spec: FoolingSpec) -> Distribution:
    return build_shannon_fooler(spec) if spec.order.is_shannon else build_collision_fooler(spec)


# ------------------------------------------------------------ separation runs


@dataclass(frozen=True)
class SeparationSpec:
    """Hard-subset experiment: ``X`` uniform on a random ``A`` of size ``2^k`` inside ``S`` of size ``2^(k+C)``.

    ``epsilon`` is the target advantage; the experiment compares each
    distinguisher's score ``Pr[D(U_A)=1] + Pr[D(U_B)=0] - 1`` (``B = S \\ A``)
    against ``delta = epsilon / (1 - 2^-C)``.
    """

    k: int
    C: int
    n: int
    m: int = 0
    epsilon: float = 0.225
    trials: int = 100
    family_size: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.C < 0 or self.k < 0:
            raise ValidationError("k and C must be non-negative")
        if self.k + self.C > self.n:
            raise ValidationError(f"need k + C <= n, got k={self.k}, C={self.C}, n={self.n}")
        if self.n + self.m > MAX_SEPARATION_BITS:
            raise ValidationError(f"experiments are capped at n+m={MAX_SEPARATION_BITS}")
        if self.m > 6:
            raise ValidationError("conditional experiments are capped at m=6")
        if self.family_size > MAX_FAMILY or self.family_size < 1:
            raise ValidationError(f"family size must lie in [1, {MAX_FAMILY}]")
        if self.trials < 1:
            raise ValidationError("need at least one trial")

    @classmethod
    def from_delta(cls, delta: float, **kw) -> "SeparationSpec":
        C = kw["C"]
        return cls(epsilon=delta * (1.0 - 2.0 ** (-C)), **kw)

    @property
    def delta(self) -> float:
        if self.C == 0:
            return math.inf
        return self.epsilon / (1.0 - 2.0 ** (-self.C))


def partial_shuffle(rng: np.random.Generator, size: int, take: int) -> np.ndarray:
    """First ``take`` entries of a Fisher-Yates shuffle of ``range(size)``."""
    a = np.arange(size)
    for i in range(take):
        j = int(rng.integers(i, size))
        a[i], a[j] = a[j], a[i]
    return np.sort(a[:take])


def _random_family(rng: np.random.Generator, universe: int, size: int, members: int) -> np.ndarray:
    """``members`` uniformly random ``size``-subsets of ``range(universe)`` (rows of indices)."""
    keys = rng.random((members, universe))
    if size >= universe:
        return np.tile(np.arange(universe), (members, 1))
    return np.argpartition(keys, size - 1, axis=1)[:, :size]


def _scores(family: np.ndarray, in_A: np.ndarray, a: int, b: int) -> np.ndarray:
    """``Pr[D(U_A)=1] + Pr[D(U_B)=0] - 1`` per family member."""
    hits = in_A[family].sum(axis=1).astype(np.float64)
    size = family.shape[1]
    if b == 0:
        return np.zeros(family.shape[0])
    return hits / a + (b - (size - hits)) / b - 1.0


def _one_trial(spec: SeparationSpec, seed_seq: np.random.SeedSequence, trial: int) -> dict:
    rng = make_rng(seed_seq)
    a = 1 << spec.k
    s = 1 << (spec.k + spec.C)
    b = s - a
    shift = spec.n - spec.k - spec.C
    M = 1 << spec.m
    subsets, scores = [], []
    for _ in range(M):
        A = partial_shuffle(rng, s, a)
        in_A = np.zeros(s, dtype=bool)
        in_A[A] = True
        family = _random_family(rng, s, a, spec.family_size)
        subsets.append(A)
        scores.append(_scores(family, in_A, a, b))
    scores = np.stack(scores, axis=1)  # (family, M)
    # X | Z=z uniform on A(z); Z uniform
    table = np.zeros((1 << spec.n, M))
    for z, A in enumerate(subsets):
        table[A << shift, z] = 1.0 / (a * M)
    delta = spec.delta
    rec = {"trial": trial, "seed_entropy": int(seed_seq.entropy), "spawn_key": list(seed_seq.spawn_key)}
    if spec.m == 0:
        X = Distribution(spec.n, table[:, 0])
        smooth = smooth_entropy(X, MIN_ENTROPY, 0.5)
        rec["min_entropy"] = float(spec.k)
    else:
        XZ = JointDistribution.from_table(table)
        smooth = cond_smooth_min_entropy(XZ, 0.5)
        rec["min_entropy_worst"] = cond_min_entropy_worst(XZ)
        rec["min_entropy_avg"] = cond_min_entropy_avg(XZ)
    rec["smooth_min_entropy_half"] = smooth
    rec["exact_holds"] = bool(smooth <= spec.k + 1 + 1e-9)
    best = scores.min(axis=1)
    rec["max_advantage"] = float(best.max())
    if spec.m > 0:
        rec["per_z_max_advantage"] = [float(v) for v in scores.max(axis=0)]
    rec["empirical_holds"] = bool(rec["max_advantage"] < delta)
    return rec


def run_conditional_separation(spec: SeparationSpec, threads: int = 1) -> dict:
    """Run ``spec.trials`` seeded trials; ``m = 0`` is the unconditional experiment.

    Each trial gets its own child of ``SeedSequence(spec.seed)``, so results do
    not depend on how trials are scheduled.
    """
    children = np.random.SeedSequence(spec.seed).spawn(spec.trials)
    work = lambda i: _one_trial(spec, children[i], i)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trials = list(pool.map(work, range(spec.trials)))
    else:
        trials = [work(i) for i in range(spec.trials)]
    exact = sum(t["exact_holds"] for t in trials)
    emp = sum(t["empirical_holds"] for t in trials)
    return {
        "spec": {**asdict(spec), "delta": spec.delta},
        "seed": spec.seed,
        "vacuous": spec.C == 0,
        "trials": trials,
        "aggregate": {
            "trials": spec.trials,
            "exact_holds": exact,
            "empirical_holds": emp,
            "max_advantage": max(t["max_advantage"] for t in trials),
        },
    }


def run_unconditional_separation(spec: SeparationSpec, threads: int = 1) -> dict:
    if spec.m != 0:
        raise DomainError("unconditional experiment needs m = 0")
    return run_conditional_separation(spec, threads)
