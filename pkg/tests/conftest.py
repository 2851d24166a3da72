import numpy as np
import pytest

from qubitmed import make_ensemble


def random_bloch(rng, pure_fraction=0.5):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    if rng.random() < pure_fraction:
        return v
    return v * rng.random() ** (1 / 3)


def random_ensemble(rng, n, equal=False, pure_fraction=0.5):
    if equal:
        priors = np.full(n, 1.0 / n)
    else:
        priors = rng.dirichlet(np.ones(n))
        priors[-1] = 1.0 - priors[:-1].sum()
    return make_ensemble([(p, random_bloch(rng, pure_fraction)) for p in priors])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
