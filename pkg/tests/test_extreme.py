import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compentropy import (
    COLLISION,
    MIN_ENTROPY,
    SHANNON,
    DomainError,
    EntropyOrder,
    SaturationError,
    gamma_curve,
    gamma_derivative,
    solve_extreme,
)
from compentropy.extreme import gamma_values, two_valued_entropy


def test_min_entropy_closed_form():
    sol = solve_extreme(MIN_ENTROPY, 4, 2, 3)
    assert sol.p == 0.25
    assert sol.gamma == 0.75


def test_collision_example():
    sol = solve_extreme(COLLISION, 2, 1, 1)
    p = 0.25 + math.sqrt(3 * (2 ** -3 - 2 ** -4))
    assert sol.p == pytest.approx(p, abs=1e-15)
    assert sol.p == pytest.approx(0.683013, abs=1e-6)
    assert sol.q == pytest.approx((1 - p) / 3, abs=1e-15)
    assert sol.q == pytest.approx(0.105662, abs=1e-6)
    assert sol.p ** 2 + 3 * sol.q ** 2 == pytest.approx(0.5, abs=1e-15)


def test_collision_gamma_one():
    g = gamma_curve(COLLISION, 4, 2, 1)[0]
    assert g == pytest.approx(1 / 16 + math.sqrt(45 / 256), abs=1e-15)
    assert g == pytest.approx(0.48176, abs=1e-5)
    assert g == pytest.approx(solve_extreme(COLLISION, 4, 2, 1).gamma, abs=1e-15)


@pytest.mark.parametrize("n,k", [(3, 1), (6, 3), (10, 4), (12, 7)])
def test_shannon_full_budget(n, k):
    sol = solve_extreme(SHANNON, n, k, 2 ** k)
    assert sol.gamma == 1.0
    assert sol.p == pytest.approx(2.0 ** -k, abs=1e-15)


def test_shannon_small_example():
    sol = solve_extreme(SHANNON, 2, 1, 1)
    assert sol.gamma == pytest.approx(0.8107, abs=1e-3)
    assert sol.entropy_residual() < 1e-12
    # frozen from the independent brent route
    assert sol.gamma == pytest.approx(solve_extreme(SHANNON, 2, 1, 1, method="brent").gamma, abs=1e-12)


def _orders():
    return [SHANNON, COLLISION, EntropyOrder.finite(1.5), EntropyOrder.finite(3.0), EntropyOrder.finite(7.0)]


@pytest.mark.parametrize("order", _orders(), ids=str)
def test_root_finders_agree(order):
    for n in (4, 7, 10, 14):
        for k in np.linspace(0.5, n - 1.01, 6):
            ds = np.unique(np.floor(np.geomspace(1, 2 ** k, 9)))
            a = gamma_values(order, n, k, ds, "bisect")
            b = gamma_values(order, n, k, ds, "brent")
            np.testing.assert_allclose(a, b, atol=1e-10, rtol=0)


@settings(max_examples=300, deadline=None)
@given(
    st.sampled_from(_orders() + [MIN_ENTROPY]),
    st.integers(2, 30),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
)
def test_residuals(order, n, kf, df):
    k = kf * n
    d = 1.0 + df * (2.0 ** k - 1.0)
    sol = solve_extreme(order, n, k, d)
    assert sol.mass_residual() < 1e-9
    assert sol.entropy_residual() < 1e-9
    assert sol.p >= sol.q >= 0.0
    assert d / 2 ** n <= sol.gamma <= 1.0


def test_saturation():
    with pytest.raises(SaturationError):
        solve_extreme(COLLISION, 6, 2, 5)
    with pytest.raises(DomainError):
        solve_extreme(COLLISION, 6, 7, 1)
    with pytest.raises(DomainError):
        solve_extreme(COLLISION, 6, 2, 0.5)


@pytest.mark.parametrize("order", [COLLISION, SHANNON, EntropyOrder.finite(3.0)], ids=str)
def test_gamma_increasing_and_concave(order):
    for n, k in ((8, 4), (12, 6), (16, 5)):
        g = np.concatenate([[0.0], gamma_curve(order, n, k, 2 ** k)])
        steps = np.diff(g)
        assert np.all(steps > 0)
        assert np.all(np.diff(steps) <= 1e-12)


@pytest.mark.parametrize("order", _orders() + [MIN_ENTROPY], ids=str)
def test_full_budget_is_one(order):
    for n, k in ((5, 2), (9, 4), (14, 8)):
        assert gamma_curve(order, n, k, 2 ** k)[-1] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("alpha", [64.0, 256.0])
def test_large_alpha_approaches_min(alpha):
    for n, k, d in ((8, 3, 2), (10, 5, 7), (12, 6, 20)):
        sol = solve_extreme(EntropyOrder.finite(alpha), n, k, d)
        # p^a d ~ 2^-(a-1)k once q is negligible
        assert sol.p == pytest.approx(2.0 ** (-k * (alpha - 1) / alpha) * d ** (-1 / alpha), rel=1e-3)
        if alpha == 256.0:
            assert sol.p == pytest.approx(2.0 ** -k, abs=1e-3)


def test_large_alpha_error_shrinks():
    errs = [abs(solve_extreme(EntropyOrder.finite(a), 8, 3, 2).p - 2 ** -3) for a in (16, 64, 256, 1024)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("order", [SHANNON, COLLISION, EntropyOrder.finite(4.0)], ids=str)
def test_derivative_matches_finite_difference(order):
    n, k, d = 10, 5, 7
    h = 1e-4
    fd = (solve_extreme(order, n, k, d + h).gamma - solve_extreme(order, n, k, d - h).gamma) / (2 * h)
    assert gamma_derivative(order, n, k, d) == pytest.approx(fd, abs=1e-6)


def test_derivative_positive_and_decreasing():
    n, k = 10, 5
    ds = np.linspace(1.0, 2 ** k - 0.5, 40)
    der = np.array([gamma_derivative(SHANNON, n, k, d) for d in ds])
    assert np.all(der > 0)
    assert np.all(np.diff(der) < 0)


def test_uniqueness_flag():
    assert solve_extreme(COLLISION, 6, 3, 4).unique
    # N - d <= 2^k: the lower branch can also reach entropy k
    assert not solve_extreme(COLLISION, 3, 2.9, 4).unique


def test_two_valued_entropy_endpoints():
    # gamma = d/N is the uniform vector
    assert two_valued_entropy(SHANNON, 6, 8.0, 8 / 64) == pytest.approx(6.0, abs=1e-12)
    assert two_valued_entropy(COLLISION, 6, 8.0, 1.0) == pytest.approx(3.0, abs=1e-12)
