import numpy as np
import pytest
from scipy.stats import unitary_group


def random_density(dim, rng, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim, rng, scale=1.0):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + g.conj().T) / 2


def random_unitary(dim, seed):
    return unitary_group.rvs(dim, random_state=seed)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record and assert one acceptance criterion."""

    def report(number, title, passed, detail=""):
        line = f"[{number:>2}] {'PASS' if passed else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        request.config._acceptance_lines.append(line)
        print(line)
        assert passed, line

    return report
