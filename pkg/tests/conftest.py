import numpy as np
import pytest

from cit import chains, sources, validate_pmf


@pytest.fixture
def bss25():
    return sources.bss_pmf(0.25)


@pytest.fixture
def gain():
    return sources.gain_pmf(0.1, 0.15, 0.15)


@pytest.fixture
def uniform_copy():
    """X = Y uniform binary."""
    return validate_pmf([[0.5, 0.0], [0.0, 0.5]])


@pytest.fixture
def independent():
    return validate_pmf([[0.25, 0.25], [0.25, 0.25]])


def gain_two_round_chain() -> chains.DeterministicChain:
    """The two-round exchange on the 3x3 gain source: the first terminal
    reveals whether its symbol is 2, then the second reveals whether its
    symbol is 0 unless that is already settled."""
    f1 = np.array([0, 0, 1])                      # x in {0,1} -> 0, x = 2 -> 1
    f2 = np.array([[0, 1], [2, 1], [2, 1]])       # (y, u1) -> u2
    return chains.DeterministicChain("x", (2, 3), (f1, f2))


def random_full_pmf(rng: np.random.Generator, max_side: int = 4):
    nx = int(rng.integers(2, max_side + 1))
    ny = int(rng.integers(2, max_side + 1))
    return sources.random_pmf(rng, nx, ny)
