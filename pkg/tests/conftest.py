"""Shared fixtures: the worked 5x7 example and small instance helpers."""

import numpy as np
import pytest

from tropgt import INFINITY, TestDesign

INF = INFINITY

WORKED_MATRIX = [
    [1, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 0, 0, 1],
    [0, 1, 0, 1, 1, 0, 0],
    [0, 1, 0, 0, 1, 1, 0],
    [1, 0, 0, 0, 1, 0, 0],
]

WORKED_TRUTH = [INF, INF, 37, INF, INF, 29, 37]
WORKED_OUTCOMES = [INF, 37, INF, 29, INF]
WORKED_MU = [INF, INF, 37, INF, INF, 29, 37]
WORKED_DD = [INF, INF, INF, INF, INF, 29, INF]
WORKED_SCOMP_MAX = [INF, INF, INF, INF, INF, 29, 37]
WORKED_SCOMP_MIN = [INF, INF, 37, INF, INF, 29, INF]


@pytest.fixture(scope="session")
def worked_design() -> TestDesign:
    return TestDesign.from_rows(WORKED_MATRIX)


@pytest.fixture()
def worked_truth() -> np.ndarray:
    return np.array(WORKED_TRUTH, dtype=np.int64)


@pytest.fixture()
def worked_outcomes() -> np.ndarray:
    return np.array(WORKED_OUTCOMES, dtype=np.int64)


def levels(*values: int) -> np.ndarray:
    """Shorthand: 0 means INFINITY, anything else is the level itself."""
    return np.array([INF if v == 0 else v for v in values], dtype=np.int64)
