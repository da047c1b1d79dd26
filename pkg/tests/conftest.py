import numpy as np
import pytest

from netgames import LinearQuadraticGame, RacesGame, make_network


def complete_lq(N, K, a=1.0, constraints=None):
    return LinearQuadraticGame(make_network("complete", N), K=K, a=a, constraints=constraints)


def potential_lq():
    """Four agents on a complete network with common substitutes weight 0.5."""
    return complete_lq(4, 0.5, 1.0)


def non_potential_lq():
    """As ``potential_lq`` but agent 0 has complements weight -1.5."""
    return complete_lq(4, np.array([-1.5, 0.5, 0.5, 0.5]), 1.0)


def flat_direction_lq(N):
    """Complements at weight 1/(N-1) with zero intercept: every constant profile is an equilibrium."""
    return complete_lq(N, -1.0 / (N - 1), 0.0)


def heterogeneous_lq():
    """Ten agents, one much more sensitive to others than the rest."""
    K = np.full(10, 0.1)
    K[-1] = 0.9
    return complete_lq(10, K, 1.0)


def star_lq(N=6, K=0.9):
    return LinearQuadraticGame(make_network("asymmetric_star", N), K=K, a=1.0)


def races(gamma, N=2, a=1.0, b=5.0):
    return RacesGame(make_network("complete", N), a=a, b=b, gamma=gamma)


def symmetric_race_effort(gamma, a=1.0, b=5.0):
    """Largest root of gamma x (b - x) = x - a; the symmetric two-agent equilibrium."""
    # gamma x^2 + (1 - gamma b) x - a = 0
    A, B, C = gamma, 1 - gamma * b, -a
    return (-B + np.sqrt(B * B - 4 * A * C)) / (2 * A)


def fd_jacobian(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.column_stack(cols)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE
    except ImportError:
        return
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, msg = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status} {msg}")
