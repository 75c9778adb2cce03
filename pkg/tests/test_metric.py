import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compentropy import (
    COLLISION,
    MIN_ENTROPY,
    SHANNON,
    Distribution,
    EntropyOrder,
    FoolingSpec,
    JointDistribution,
    MetricQuery,
    ValidationError,
    build_collision_fooler,
    bruteforce_metric,
    metric_entropy_decide,
    min_metric_conditional_decide,
    point_mass,
    relaxed_metric_decide,
    renyi_entropy,
    top_mass,
    uniform,
)
from compentropy.convex import bruteforce_cond_advantage, milp_cond_advantage, relaxed_real_entropy
from compentropy.metric import (
    cond_avg_advantage,
    cond_worst_advantage,
    metric_entropy_search,
    min_metric_conditional_entropy,
    relaxed_metric_entropy,
)

from conftest import random_distribution, random_joint

SKEWED = Distribution(2, [0.5, 0.25, 0.125, 0.125])
ORDERS = (SHANNON, COLLISION, MIN_ENTROPY)


def test_top_mass():
    X = Distribution(2, [0.5, 0.3, 0.2, 0.0])
    assert top_mass(X, 2) == 0.8
    assert top_mass(X, 4) == 1.0
    assert top_mass(uniform(3), 5) == pytest.approx(5 / 8, abs=1e-15)


def test_decide_examples():
    assert metric_entropy_decide(uniform(4), MetricQuery(COLLISION, 0.0, 4.0)).holds
    dec = metric_entropy_decide(point_mass(3), MIN_ENTROPY, 1.0, 0.0)
    assert not dec.holds
    assert dec.witness_d == 1
    assert list(dec.distinguisher) == [0]
    assert metric_entropy_decide(build_collision_fooler(FoolingSpec(COLLISION, 12, 5)), COLLISION, 5, 0.0)


def test_query_requires_target():
    with pytest.raises(ValidationError):
        metric_entropy_decide(uniform(2), MetricQuery(SHANNON))
    with pytest.raises(ValidationError):
        MetricQuery(SHANNON, 1.5)


@pytest.mark.parametrize("method", ["bisect", "invert"])
def test_search_examples(method):
    assert metric_entropy_search(uniform(3), SHANNON, 0.0, method) == 3.0
    assert metric_entropy_search(SKEWED, MIN_ENTROPY, 0.0, method) == pytest.approx(1.0, abs=1e-9)
    assert metric_entropy_search(SKEWED, MIN_ENTROPY, 0.25, method) == pytest.approx(2.0, abs=1e-9)
    assert bruteforce_metric(SKEWED, MIN_ENTROPY, 0.25) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("order", ORDERS, ids=str)
def test_invert_matches_bisect(rng, order):
    for _ in range(60):
        X = random_distribution(rng, int(rng.integers(1, 8)))
        eps = float(rng.choice([0.0, 0.01, 0.1, 0.3]))
        a = metric_entropy_search(X, order, eps, "bisect")
        b = metric_entropy_search(X, order, eps, "invert")
        assert a == pytest.approx(b, abs=1e-9)


def test_matches_bruteforce_small(rng):
    for _ in range(30):
        X = random_distribution(rng, 3)
        for order in ORDERS:
            for eps in (0.0, 0.05):
                assert metric_entropy_search(X, order, eps) == pytest.approx(bruteforce_metric(X, order, eps), abs=1e-6)


def test_monotone_in_eps_and_order(rng):
    orders = [SHANNON, EntropyOrder.finite(1.5), COLLISION, EntropyOrder.finite(5.0), MIN_ENTROPY]
    for _ in range(40):
        X = random_distribution(rng, int(rng.integers(1, 7)))
        by_eps = [metric_entropy_search(X, COLLISION, e, "invert") for e in (0.0, 0.02, 0.1, 0.3)]
        assert all(b >= a - 1e-9 for a, b in zip(by_eps, by_eps[1:]))
        by_order = [metric_entropy_search(X, o, 0.05, "invert") for o in orders]
        assert all(b <= a + 1e-9 for a, b in zip(by_order, by_order[1:]))


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1), st.sampled_from(ORDERS), st.floats(0.0, 0.5))
def test_sandwich(n, seed, order, eps):
    X = random_distribution(np.random.Generator(np.random.Philox(seed)), n)
    assert renyi_entropy(X, order) <= metric_entropy_search(X, order, eps, "invert") + 1e-9


def test_witness_within_budget(rng):
    for _ in range(200):
        X = random_distribution(rng, int(rng.integers(1, 8)), 0.1)
        k = float(rng.uniform(0.5, X.n))
        dec = metric_entropy_decide(X, SHANNON, k, 0.0)
        if not dec.holds:
            assert 1 <= dec.witness_d <= 2 ** k
            assert len(dec.distinguisher) == dec.witness_d


def test_sparse_and_dense_decide_agree():
    X = build_collision_fooler(FoolingSpec(COLLISION, 10, 4))
    sparse = Distribution(10, X.dense()[X.dense() > 0], np.flatnonzero(X.dense() > 0))
    for k in (3.0, 4.0, 4.5):
        assert metric_entropy_decide(X, COLLISION, k).holds == metric_entropy_decide(sparse, COLLISION, k).holds


# --------------------------------------------------------------- conditional


def _diag(n):
    N = 1 << n
    return JointDistribution(n, n, (np.eye(N) / N).reshape(-1))


def test_relaxed_examples():
    indep = JointDistribution.independent(uniform(2), [0.25, 0.75])
    assert relaxed_metric_decide(indep, 2.0).holds
    dec = relaxed_metric_decide(_diag(2), 1.0)
    assert not dec.holds
    assert dec.witness_d == 1
    assert np.array_equal(dec.distinguisher, np.eye(4, dtype=bool))
    assert relaxed_metric_decide(_diag(2), 0.0).holds


def test_conditional_examples():
    indep = JointDistribution.independent(uniform(3), [0.5, 0.5])
    for average in (False, True):
        assert min_metric_conditional_decide(indep, 3.0, 0.0, average).holds
        assert not min_metric_conditional_decide(_diag(2), 1.0, 0.0, average).holds


def test_relaxed_at_least_non_relaxed(rng):
    for i in range(200):
        n, m = [(1, 1), (2, 1), (2, 2), (3, 1), (1, 3)][i % 5]
        XZ = random_joint(rng, n, m)
        k = float(rng.uniform(0, n))
        eps = float(rng.choice([0.0, 0.05, 0.2]))
        for average in (False, True):
            if min_metric_conditional_decide(XZ, k, eps, average).holds:
                assert relaxed_metric_decide(XZ, k, eps).holds


def test_worst_below_average(rng):
    for _ in range(100):
        XZ = random_joint(rng, 2, 2)
        eps = float(rng.choice([0.0, 0.1]))
        worst = min_metric_conditional_entropy(XZ, eps, average=False)
        avg = min_metric_conditional_entropy(XZ, eps, average=True)
        assert worst <= avg + 1e-9


@pytest.mark.parametrize("average", [False, True])
def test_closed_form_matches_bruteforce(rng, average):
    for i in range(12):
        n, m = [(1, 1), (2, 1), (1, 2)][i % 3]
        XZ = random_joint(rng, n, m)
        k = float(rng.uniform(0, n))
        fast = cond_avg_advantage(XZ, k) if average else cond_worst_advantage(XZ, k)
        assert fast == pytest.approx(bruteforce_cond_advantage(XZ, k, average), abs=1e-8)


@pytest.mark.parametrize("average", [False, True])
def test_closed_form_matches_milp(rng, average):
    for i in range(15):
        n, m = [(2, 2), (3, 2), (2, 3), (4, 1)][i % 4]
        XZ = random_joint(rng, n, m)
        k = float(rng.uniform(0, n))
        fast = cond_avg_advantage(XZ, k) if average else cond_worst_advantage(XZ, k)
        # HiGHS MIP feasibility tolerance is ~1e-7 and not adjustable through scipy
        assert fast == pytest.approx(milp_cond_advantage(XZ, k, average), abs=1e-6)


def test_relaxed_real_class_is_stronger(rng):
    # with Z' free, max over columns does not commute with thresholding, so [0,1]
    # tests can beat every boolean test; only the inequality holds
    strict = 0
    for i in range(30):
        n, m = [(1, 1), (2, 1), (2, 2), (3, 1)][i % 4]
        XZ = random_joint(rng, n, m)
        eps = float(rng.choice([0.0, 0.05, 0.2]))
        boolean, real = relaxed_metric_entropy(XZ, eps), relaxed_real_entropy(XZ, eps)
        assert real <= boolean + 1e-8
        strict += real < boolean - 1e-3
    assert strict > 0


def test_relaxed_real_without_leak_matches_boolean(rng):
    for _ in range(20):
        XZ = random_joint(rng, 3, 0)
        eps = float(rng.choice([0.0, 0.05, 0.2]))
        assert relaxed_real_entropy(XZ, eps) == pytest.approx(relaxed_metric_entropy(XZ, eps), abs=1e-8)


def test_no_leak_is_unconditional(rng):
    for _ in range(30):
        X = random_distribution(rng, 3)
        XZ = JointDistribution(3, 0, X.probs)
        for eps in (0.0, 0.1):
            expected = metric_entropy_search(X, MIN_ENTROPY, eps, "invert")
            assert min_metric_conditional_entropy(XZ, eps, average=True) == pytest.approx(expected, abs=1e-9)
            assert min_metric_conditional_entropy(XZ, eps, average=False) == pytest.approx(expected, abs=1e-9)
            assert relaxed_metric_entropy(XZ, eps) == pytest.approx(expected, abs=1e-9)


def test_k_beyond_n_fails():
    assert not metric_entropy_decide(uniform(2), SHANNON, 2.5).holds
    assert not relaxed_metric_decide(_diag(1), 1.5).holds
    assert math.isinf(metric_entropy_decide(uniform(2), SHANNON, 2.5).margin)
