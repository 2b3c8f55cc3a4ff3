import numpy as np
import pytest

from nbresonance import generate_named, generate_random_regular

# lines recorded by the acceptance module, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def k4():
    return generate_named("complete", 4)


@pytest.fixture(scope="session")
def c3():
    return generate_named("cycle", 3)


@pytest.fixture(scope="session")
def petersen():
    return generate_named("petersen")


def small_graphs():
    """A mix of named and random graphs used by parametrized tests."""
    return [
        generate_named("complete", 4),
        generate_named("cycle", 3),
        generate_named("cycle", 5),
        generate_named("petersen"),
        generate_named("complete_bipartite", 3),
        generate_named("hypercube3"),
        generate_named("complete", 5),
        generate_random_regular(10, 3, 1),
        generate_random_regular(12, 4, 2),
    ]


def ones_state(g, orientation, z=None):
    from nbresonance import ResonantState

    return ResonantState(g, orientation, g.q if z is None else z, np.ones(g.n_directed))
