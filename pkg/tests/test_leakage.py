import numpy as np
import pytest

from compentropy import (
    COLLISION,
    Distribution,
    FoolingSpec,
    JointDistribution,
    LeakageInstance,
    SizeCapError,
    build_collision_fooler,
    uniform,
    verify_chain_rule,
    verify_leakage_lemma,
)
from compentropy.metric import metric_entropy_search, relaxed_metric_entropy

from conftest import random_distribution, random_joint

TABLE = JointDistribution.from_table([[0.25, 0.25], [0.375, 0.125]])


def _with_independent_leak(XZ, m2, rng):
    z2 = rng.dirichlet(np.ones(1 << m2))
    t = XZ.table[:, :, None] * z2[None, None, :]
    return JointDistribution(XZ.n, XZ.m + m2, t.reshape(-1))


def test_independent_leak_costs_nothing(rng):
    for _ in range(50):
        base = random_joint(rng, 2, 1)
        inst = LeakageInstance.from_joint(_with_independent_leak(base, 2, rng), 2)
        rep = verify_chain_rule(inst)
        assert rep["holds"]
        assert rep["k_after"] >= rep["k_before"] - 1e-9


def test_leak_of_first_bits():
    X = uniform(4)
    leak = np.arange(16) >> 2
    XZ = JointDistribution.from_leak(X, leak, 2)
    rep = verify_chain_rule(LeakageInstance(XZ, 4, 0, 2))
    assert rep["holds"]
    assert rep["k_before"] == 4.0
    assert rep["k_after"] == pytest.approx(2.0, abs=1e-12)


def test_no_leak_is_identity(rng):
    for _ in range(30):
        XZ = random_joint(rng, 3, 1)
        rep = verify_chain_rule(LeakageInstance.from_joint(XZ, 0, epsilon=0.05))
        assert rep["k_after"] == rep["k_before"]


@pytest.mark.parametrize("profile", [(3, 1, 1), (4, 0, 2), (2, 2, 2)])
@pytest.mark.parametrize("eps", [0.0, 0.1])
def test_chain_rule_random(rng, profile, eps):
    n, m1, m2 = profile
    for _ in range(100):
        rep = verify_chain_rule(LeakageInstance(random_joint(rng, n, m1 + m2), n, m1, m2, epsilon=eps))
        assert rep["holds"], rep


def test_chain_rule_decide_fields():
    rep = verify_chain_rule(LeakageInstance.from_joint(TABLE, 1, k=0.5, epsilon=0.0))
    assert rep["decide_before"] is True or rep["decide_before"] is False
    assert rep["holds"]


def test_size_cap():
    XZ = JointDistribution(10, 3, np.full(1 << 13, 2.0 ** -13))
    with pytest.raises(SizeCapError):
        LeakageInstance(XZ, 10, 1, 2)


def test_relaxed_cost_never_exceeds_leak_width(rng):
    for _ in range(50):
        XZ = random_joint(rng, 3, 2)
        k1 = relaxed_metric_entropy(JointDistribution(3, 1, XZ.table.reshape(8, 2, 2).sum(axis=2).reshape(-1)))
        assert relaxed_metric_entropy(XZ) >= k1 - 1 - 1e-9


# ------------------------------------------------------------ leakage lemma


def test_constant_leak_is_equality(rng):
    for _ in range(20):
        X = random_distribution(rng, 4)
        rep = verify_leakage_lemma(X, np.zeros(16, dtype=int), m2=0)
        assert rep["avg_conditional_metric_entropy"] == pytest.approx(rep["metric_entropy"], abs=1e-9)


def test_parity_leak_is_three_bits():
    parity = np.array([bin(x).count("1") & 1 for x in range(16)])
    rep = verify_leakage_lemma(uniform(4), parity)
    assert rep["m2"] == 1
    assert rep["avg_conditional_metric_entropy"] == 3.0
    assert rep["holds"]


def test_fooler_top_bit_leak():
    n, k = 6, 3
    X = build_collision_fooler(FoolingSpec(COLLISION, n, k))
    top = np.arange(1 << n) >> (n - 1)
    rep = verify_leakage_lemma(X, top, epsilon=0.01)
    assert rep["holds"]
    assert rep["slack"] >= -1e-9
    assert rep["worst_conditional_metric_entropy"] <= rep["avg_conditional_metric_entropy"] + 1e-9


def test_lemma_random(rng):
    for _ in range(100):
        n = int(rng.integers(2, 6))
        m2 = int(rng.integers(1, 3))
        X = random_distribution(rng, n)
        leak = rng.integers(0, 1 << m2, size=1 << n)
        eps = float(rng.choice([0.0, 0.02, 0.1]))
        rep = verify_leakage_lemma(X, leak, epsilon=eps, m2=m2)
        assert rep["holds"], rep


def test_lemma_accepts_joint(rng):
    XZ = random_joint(rng, 3, 1)
    rep = verify_leakage_lemma(XZ.marginal_x(), XZ)
    assert rep["metric_entropy"] == pytest.approx(metric_entropy_search(XZ.marginal_x(), "min", 0.0, "invert"))
    other = Distribution(3, np.full(8, 1 / 8))
    with pytest.raises(Exception):
        verify_leakage_lemma(other, XZ)
