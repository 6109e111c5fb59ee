import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"
DBR = "http://dbpedia.org/resource/"


@pytest.fixture
def small_dir():
    return FIXTURES / "small"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sparse(rng, shape, density, signed=True):
    mask = rng.random(shape) < density
    vals = rng.standard_normal(shape) if signed else rng.random(shape) + 0.1
    return np.where(mask, vals, 0.0)


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
