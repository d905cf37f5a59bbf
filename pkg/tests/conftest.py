import numpy as np
import pytest

import ialm


@pytest.fixture(scope="session")
def problem2():
    return ialm.build_problem2(42)


@pytest.fixture(scope="session")
def sys_p2(problem2):
    return ialm.build_augmented(problem2, 1.0)


@pytest.fixture(scope="session")
def small_problems():
    """A few seeded instances spanning dimensions and constraint counts."""
    return [
        ialm.random_problem(4, 2, seed=7),
        ialm.random_problem(8, 3, seed=8),
        ialm.random_problem(12, 5, seed=9),
    ]


def spd_matrix(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((n, n))
    B = R.T @ R + scale * np.eye(n)
    return 0.5 * (B + B.T)
