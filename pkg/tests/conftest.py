import numpy as np
import pytest

from policyfrontier import ActionSet, Cohort


@pytest.fixture
def uti_actions():
    return ActionSet(("NIT", "SXT", "CIP", "LVX"), (0, 0, 1, 1))


@pytest.fixture
def two_actions():
    return ActionSet(("A", "B"), (0, 1))


@pytest.fixture
def small_cohort(uti_actions):
    rng = np.random.default_rng(7)
    n, m = 12, 3
    X = rng.standard_normal((n, m))
    Y = rng.integers(0, 2, size=(n, 4))
    doc = rng.integers(0, 4, size=n)
    return Cohort(X, Y, tuple(range(n)), ("f1", "f2", "f3"), doc)
