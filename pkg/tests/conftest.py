import numpy as np
import pytest

from regkrylov.operators import DenseOperator
from regkrylov.problems import make_random_problem

# diag(2,1), b=(1,1), sigma=0.5; root of 1/(4l+1)^2 + 1/(l+1)^2 = 1/4 at 40 digits (mpmath)
DIAG_LAMBDA = 1.142830794062785368869988807791012538926
DIAG_X = np.array([0.4102547125373469384808028981360277642193, 0.5333275950808928869090589144815934571667])

SUITE_SHAPES = [(30, 20), (40, 25), (45, 30), (50, 40), (60, 40), (64, 48), (70, 50), (80, 60), (90, 70), (100, 80)]


@pytest.fixture
def diag_problem():
    return DenseOperator(np.diag([2.0, 1.0])), np.array([1.0, 1.0]), 0.5


def suite_problem(index, decay=0.85):
    m, n = SUITE_SHAPES[index % len(SUITE_SHAPES)]
    return make_random_problem(m, n, seed=100 + index, level=0.1, decay=decay)


@pytest.fixture(params=range(len(SUITE_SHAPES)), ids=lambda i: "x".join(map(str, SUITE_SHAPES[i])))
def suite(request):
    return suite_problem(request.param)


def gaussian_matrix(m, n, seed):
    return np.random.default_rng(seed).standard_normal((m, n))


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
