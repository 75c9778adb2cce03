"""Boolean randomized simulation of a real-valued distinguisher.

On input ``x`` the simulator flips up to ``ell`` fair coins, takes the index
``j`` of the first head and outputs the ``j``-th binary digit of ``D(x)``
(0 when every coin is tails).  Its acceptance probability is the
``ell``-digit truncation of ``D(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .oracle import RealDistinguisher


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator (Philox) from an int seed or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def binary_digits(values: np.ndarray, ell: int) -> np.ndarray:
    """``r[x, j-1]`` = ``j``-th digit after the binary point of ``values[x]``; 1 is read as 0.111..."""
    v = np.asarray(values, dtype=np.float64)
    j = np.arange(1, ell + 1)
    r = np.floor(v[:, None] * 2.0 ** j).astype(np.int64) % 2
    r[v >= 1.0] = 1
    return r.astype(np.int8)


class RandomizedDistinguisher:
    def __init__(self, D, ell: int):
        if ell < 1:
            raise ValidationError(f"ell must be at least 1, got {ell}")
        if not isinstance(D, RealDistinguisher):
            vals = np.asarray(D, dtype=np.float64)
            D = RealDistinguisher(int(vals.size).bit_length() - 1, vals)
        self.D = D
        self.ell = int(ell)
        self.digits = binary_digits(D.values, self.ell)
        self._weights = 2.0 ** -np.arange(1, self.ell + 1)

    def exact_expectation(self) -> np.ndarray:
        """``sum_j 2^-j r_j(x)`` for every ``x``."""
        return self.digits @ self._weights

    def sample(self, x: int, rng: np.random.Generator) -> int:
        """One run on input ``x``, flipping coins one at a time."""
        for j in range(self.ell):
            if rng.integers(0, 2) == 1:
                return int(self.digits[x, j])
        return 0

    def first_head_probs(self) -> np.ndarray:
        """Probabilities of ``j = 1..ell`` and of "no head" (last entry)."""
        return np.append(self._weights, 2.0 ** -self.ell)

    def empirical_means(self, samples: int, rng: np.random.Generator):
        """Acceptance frequency per input over ``samples`` independent runs each, with standard errors.

        Only the index of the first head matters, so runs are drawn as
        multinomial counts over ``j``.
        """
        N = self.digits.shape[0]
        counts = rng.multinomial(samples, self.first_head_probs(), size=N)
        hits = (counts[:, : self.ell] * self.digits).sum(axis=1)
        mean = hits / samples
        var = mean * (1.0 - mean) * samples / max(samples - 1, 1)
        return mean, np.sqrt(var / samples)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    seed: Optional[int]
    ell: int
    samples: int
    values: np.ndarray = field(repr=False)
    exact_expectation: np.ndarray = field(repr=False)
    empirical_mean: np.ndarray = field(repr=False)
    standard_error: np.ndarray = field(repr=False)

    @property
    def truncation_bias(self) -> float:
        return float(np.abs(self.exact_expectation - self.values).max())

    @property
    def empirical_bias(self) -> np.ndarray:
        return np.abs(self.empirical_mean - self.values)

    def within(self, bound: float, n_se: float = 3.0) -> np.ndarray:
        """Per-input check ``|empirical - D(x)| <= bound + n_se * SE``."""
        return self.empirical_bias <= bound + n_se * self.standard_error

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "ell": self.ell,
            "samples": self.samples,
            "truncation_bias": self.truncation_bias,
            "max_empirical_bias": float(self.empirical_bias.max()),
            "bias_bound": 2.0 ** (-self.ell - 1),
            "inputs_within_bound_plus_3se": int(self.within(2.0 ** (-self.ell - 1)).sum()),
            "inputs": int(self.values.size),
        }


def simulate_randomized(D, ell: int, seed=0, samples: int = 100_000) -> SimulationResult:
    """Run the simulator on every input and compare with the exact acceptance probability."""
    sim = RandomizedDistinguisher(D, ell)
    rng = make_rng(seed)
    mean, se = sim.empirical_means(samples, rng)
    seed_out = seed if isinstance(seed, int) else None
    return SimulationResult(seed_out, sim.ell, samples, sim.D.values, sim.exact_expectation(), mean, se)


def simulate_acceptance(D, ell: int, X=None, seed=0, samples: int = 100_000) -> dict:
    """Estimate ``E D~(X)`` from ``samples`` full runs with ``x ~ X`` (uniform by default).

    Returns the estimate with its standard error next to the exact values of
    ``E D(X)`` and of the truncated ``E D~(X)``.
    """
    sim = RandomizedDistinguisher(D, ell)
    N = sim.digits.shape[0]
    p = np.full(N, 1.0 / N) if X is None else X.dense()
    rng = make_rng(seed)
    xs = rng.choice(N, size=samples, p=p)
    j = rng.geometric(0.5, size=samples)
    live = j <= sim.ell
    out = np.zeros(samples)
    out[live] = sim.digits[xs[live], j[live] - 1]
    mean = float(out.mean())
    se = float(out.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return {
        "seed": seed if isinstance(seed, int) else None,
        "ell": sim.ell,
        "samples": samples,
        "estimate": mean,
        "standard_error": se,
        "target": float(p @ sim.D.values),
        "truncated_target": float(p @ sim.exact_expectation()),
        "bias": abs(mean - float(p @ sim.D.values)),
    }
