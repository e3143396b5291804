import sys

import numpy as np
import pytest

from copulasim.harness import textured_image


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def texture():
    return textured_image(64, 64, 3, seed=1)


@pytest.fixture
def gray_texture():
    return textured_image(64, 64, 1, seed=2)


def random_image(rng, h, w, c=3):
    return rng.integers(0, 256, size=(h, w, c), dtype=np.uint8)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "RESULTS", []), key=lambda ln: int(ln[3:ln.index("]")]))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
