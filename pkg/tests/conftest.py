import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import settings

from rcinterface.lattice import Box, endpoints, mu

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def bfs_crossing(omega, pad=2):
    """Crossing oracle: BFS on an explicit padded window, exterior edges set by mu.

    Independent of the supernode contraction used by the library.
    """
    box = omega.box
    L, M = box.L, box.M
    R, H = L + pad, M + pad
    start = [(x, y, H) for x in range(-R, R + 1) for y in range(-R, R + 1)]
    seen = set(start)
    todo = deque(start)

    def state(e):
        return omega[e]

    while todo:
        v = todo.popleft()
        if v[2] == -H:
            return True
        for a in range(3):
            for s in (1, -1):
                w = list(v)
                w[a] += s
                w = tuple(w)
                if not all(-R <= w[i] <= R for i in (0, 1)) or not -H <= w[2] <= H:
                    continue
                e = (*(v if s > 0 else w), a)
                if w not in seen and state(e):
                    seen.add(w)
                    todo.append(w)
    return False


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def toy_box():
    return Box(0, 1)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
