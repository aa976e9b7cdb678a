import numpy as np
import pytest

from roofentropy import SolverConfig

# Small solver budget: plenty for dims 2-4 (checked against the closed form
# in test_acceptance) while keeping the suite fast.
FAST = SolverConfig(restarts=5, max_iters=250)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
