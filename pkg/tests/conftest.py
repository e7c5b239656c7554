import numpy as np
import pytest

from gaussdag.prior import NormalWishartPrior


def random_pd(rng, n, ridge=0.5):
    A = rng.standard_normal((n, n))
    return A @ A.T + ridge * np.eye(n)


def random_prior(rng, n):
    return NormalWishartPrior(
        nu=rng.standard_normal(n),
        alpha_mu=float(rng.uniform(0.3, 3.0)),
        alpha=float(n - 1 + rng.uniform(0.5, 6.0)),
        T=random_pd(rng, n),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
