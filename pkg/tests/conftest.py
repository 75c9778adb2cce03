import numpy as np
import pytest

from compentropy import Distribution, JointDistribution

_CRITERIA = {}


def record(number: int, name: str, passed: bool, detail: str = "") -> str:
    line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {name}"
    if detail:
        line += f" :: {detail}"
    _CRITERIA[number] = line
    print(line)
    return line


def random_distribution(rng: np.random.Generator, n: int, concentration=None) -> Distribution:
    """Dirichlet draw; a random concentration makes both flat and spiky vectors likely."""
    if concentration is None:
        concentration = float(10.0 ** rng.uniform(-1.5, 1.0))
    p = rng.dirichlet(np.full(1 << n, concentration))
    return Distribution(n, p / p.sum())


def random_joint(rng: np.random.Generator, n: int, m: int, concentration=None) -> JointDistribution:
    X = random_distribution(rng, n + m, concentration)
    return JointDistribution(n, m, X.probs)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(0))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[key])
