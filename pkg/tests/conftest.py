import numpy as np
import pytest

from app.models.config import SystemConfig
from app.models.models import ModeAssignment, NetworkRealization


@pytest.fixture
def config():
    """Small desk-scale scenario that keeps the solvers fast"""
    return SystemConfig(M=6, N=2, K_d=2, kappa=1.0, drops=3, seed=7)


@pytest.fixture
def unit_config():
    """rho = 10, tau = 200, tau_t = 5: the hand-checked metric examples"""
    return SystemConfig(rho=10.0, rho_t=1.0, K_d=1, tau=200, tau_t=5, kappa=0.0)


@pytest.fixture
def single_link():
    """One C-AP with N = 2 antennas serving one user, gamma = 0.5, beta = 1"""
    return NetworkRealization.from_statistics(beta=[[1.0]], gamma=[[0.5]], antennas=2)


@pytest.fixture
def mixed_pair():
    """AP 0 communicates, AP 1 senses; two users"""
    net = NetworkRealization.from_statistics(
        beta=np.array([[1.0, 0.5], [0.2, 0.8]]),
        gamma=np.array([[0.5, 0.25], [0.1, 0.4]]),
        antennas=2,
    )
    return net, ModeAssignment(np.array([1, 0]))


def random_statistics(M: int, K: int, N: int, seed: int = 0) -> NetworkRealization:
    """Large-scale statistics with a realistic spread, no geometry"""
    rng = np.random.default_rng(seed)
    beta = 10 ** rng.uniform(-1.0, 1.0, size=(M, K))
    gamma = beta * rng.uniform(0.3, 0.95, size=(M, K))
    return NetworkRealization.from_statistics(beta=beta, gamma=gamma, antennas=N)
