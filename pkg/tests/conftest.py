import functools

import numpy as np
import pytest

from vortexchoreo.geometry import DomainMap, boundary_frame
from vortexchoreo.greens import GreenEvaluator
from vortexchoreo.orbit_finder import ChoreographyProblem, continue_family

C2 = 0.05
FAMILY_GRID = (0.08, 0.01, 10)

ACCEPTANCE_LINES = []


def make_domain(kind):
    return DomainMap.unit_disk() if kind == "disk" else DomainMap.perturbed_disk([C2])


@functools.lru_cache(maxsize=None)
def setting(kind):
    domain = make_domain(kind)
    return boundary_frame(domain), GreenEvaluator(domain)


@functools.lru_cache(maxsize=None)
def family(kind, n):
    """Continuation family over the default grid, computed once per session."""
    frame, ev = setting(kind)
    problem = ChoreographyProblem(frame, ev, n, FAMILY_GRID[0])
    return problem, continue_family(problem, *FAMILY_GRID)


@pytest.fixture(scope="session")
def disk():
    return setting("disk")


@pytest.fixture(scope="session")
def perturbed():
    return setting("perturbed")


@pytest.fixture(scope="session")
def families():
    return family


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance():
    def record(number, title, passed, detail=""):
        ACCEPTANCE_LINES.append((number, title, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}  {detail}")
