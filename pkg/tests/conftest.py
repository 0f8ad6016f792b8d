import numpy as np
import pytest

from polardiv.graph import InteractionEvent, build_graph


def ev(u, i):
    return InteractionEvent(u, i)


def random_graph(rng, max_users, max_items, density, min_users=2, min_items=2):
    """Random binary graph with every node of degree >= 1."""
    while True:
        nu = int(rng.integers(min_users, max_users + 1))
        ni = int(rng.integers(min_items, max_items + 1))
        R = rng.random((nu, ni)) < density
        if R.any(axis=1).all() and R.any(axis=0).all():
            rows, cols = np.nonzero(R)
            return build_graph([ev(f"u{u}", f"i{i}") for u, i in zip(rows, cols)])


@pytest.fixture
def two_block():
    # a, b share x, y; c, d share z, w
    pairs = [("a", "x"), ("a", "y"), ("b", "x"), ("b", "y"),
             ("c", "z"), ("c", "w"), ("d", "z"), ("d", "w")]
    return build_graph([ev(u, i) for u, i in pairs])


@pytest.fixture
def path_graph():
    # u1-{i1,i2}, u2-{i2,i3}
    return build_graph([ev("u1", "i1"), ev("u1", "i2"), ev("u2", "i2"), ev("u2", "i3")])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
