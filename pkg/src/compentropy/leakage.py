"""Numerical checks of the leakage chain rule for relaxed metric min-entropy
and of the leakage lemma for average conditional metric min-entropy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .distributions import Distribution, JointDistribution
from .errors import DimensionError, SizeCapError, ValidationError
from .metric import (
    metric_entropy_decide,
    metric_entropy_search,
    min_metric_conditional_decide,
    min_metric_conditional_entropy,
    relaxed_metric_decide,
    relaxed_metric_entropy,
)

CHAIN_MAX_BITS = 12
LEMMA_MAX_BITS = 10
TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LeakageInstance:
    """Joint distribution of ``(X, Z1, Z2)`` laid out as ``(x, z1, z2)`` with ``z2`` fastest."""

    XZ1Z2: JointDistribution
    n: int
    m1: int
    m2: int
    k: Optional[float] = None
    epsilon: float = 0.0

    def __post_init__(self):
        J = self.XZ1Z2
        if J.n != self.n or J.m != self.m1 + self.m2:
            raise DimensionError(f"joint has (n={J.n}, m={J.m}); expected n={self.n}, m1+m2={self.m1 + self.m2}")
        if self.n + self.m1 + self.m2 > CHAIN_MAX_BITS:
            raise SizeCapError(f"chain-rule checks are capped at n+m1+m2={CHAIN_MAX_BITS}")
        if self.m1 < 0 or self.m2 < 0:
            raise ValidationError("leak widths must be non-negative")

    @classmethod
    def from_joint(cls, XZ: JointDistribution, m2: int, k=None, epsilon: float = 0.0) -> "LeakageInstance":
        """Treat the last ``m2`` bits of the conditioning part as the fresh leak."""
        if not 0 <= m2 <= XZ.m:
            raise ValidationError(f"m2 must lie in [0, {XZ.m}]")
        return cls(XZ, XZ.n, XZ.m - m2, m2, k, epsilon)

    def without_leak(self) -> JointDistribution:
        """Joint of ``(X, Z1)``."""
        t = self.XZ1Z2.table.reshape(1 << self.n, 1 << self.m1, 1 << self.m2).sum(axis=2)
        return JointDistribution(self.n, self.m1, t.reshape(-1))


def verify_chain_rule(inst: LeakageInstance) -> dict:
    """Compare relaxed metric entropy of ``X|Z1`` at ``eps`` with that of ``X|Z1,Z2`` at ``2^m2 eps``."""
    eps = inst.epsilon
    eps2 = eps * 2 ** inst.m2
    base = inst.without_leak()
    k1 = relaxed_metric_entropy(base, eps)
    k2 = relaxed_metric_entropy(inst.XZ1Z2, min(eps2, 1.0))
    slack = k2 - (k1 - inst.m2)
    report = {
        "n": inst.n,
        "m1": inst.m1,
        "m2": inst.m2,
        "epsilon": eps,
        "epsilon_after_leak": eps2,
        "k_before": k1,
        "k_after": k2,
        "bound": k1 - inst.m2,
        "slack": slack,
        "holds": bool(slack >= -TOL),
    }
    if inst.k is not None:
        before = relaxed_metric_decide(base, inst.k, eps).holds
        after = relaxed_metric_decide(inst.XZ1Z2, inst.k - inst.m2, min(eps2, 1.0)).holds
        report["decide_before"] = bool(before)
        report["decide_after"] = bool(after)
        report["holds"] = report["holds"] and (after or not before)
    return report


def _leak_joint(X: Distribution, Z2) -> JointDistribution:
    if isinstance(Z2, JointDistribution):
        if Z2.n != X.n:
            raise DimensionError("leak joint must be over the same X")
        if np.abs(Z2.marginal_x().probs - X.dense()).max() > 1e-12:
            raise ValidationError("leak joint has a different X-marginal")
        return Z2
    leak = np.asarray(Z2, dtype=np.int64)
    m2 = max(int(leak.max()).bit_length(), 0) if leak.size else 0
    return JointDistribution.from_leak(X, leak, m2)


def verify_leakage_lemma(X: Distribution, Z2: Union[JointDistribution, np.ndarray],
                         k: Optional[float] = None, epsilon: float = 0.0,
                         m2: Optional[int] = None) -> dict:
    """Average conditional metric min-entropy of ``X|Z2`` against ``H^Metric(X) - m2``.

    ``Z2`` is either a joint ``(X, Z2)`` or a table giving ``Z2 = f(X)``;
    ``m2`` defaults to the bit-width needed for the leak values.
    """
    XZ = _leak_joint(X, Z2)
    if m2 is None:
        m2 = XZ.m
    if XZ.n + XZ.m > LEMMA_MAX_BITS:
        raise SizeCapError(f"leakage-lemma checks are capped at n+m2={LEMMA_MAX_BITS}")
    eps2 = min(epsilon * 2 ** m2, 1.0)
    right = metric_entropy_search(X, "min", epsilon, method="invert")
    left = min_metric_conditional_entropy(XZ, eps2, average=True)
    worst = min_metric_conditional_entropy(XZ, eps2, average=False)
    slack = left - (right - m2)
    report = {
        "n": X.n,
        "m2": m2,
        "epsilon": epsilon,
        "epsilon_after_leak": eps2,
        "metric_entropy": right,
        "avg_conditional_metric_entropy": left,
        "worst_conditional_metric_entropy": worst,
        "bound": right - m2,
        "slack": slack,
        "holds": bool(slack >= -TOL),
    }
    if k is not None:
        before = metric_entropy_decide(X, "min", k, epsilon).holds
        after = min_metric_conditional_decide(XZ, k - m2, eps2, average=True).holds
        report["decide_before"] = bool(before)
        report["decide_after"] = bool(after)
        report["holds"] = report["holds"] and (after or not before)
    return report
