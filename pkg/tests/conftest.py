import sys
import warnings

import numpy as np
import pytest

from flatnewt import shapes


@pytest.fixture(scope="session")
def diamond():
    return shapes.diamond()


@pytest.fixture(scope="session")
def square():
    return shapes.square()


@pytest.fixture(scope="session")
def disk():
    return shapes.disk()


@pytest.fixture(scope="session")
def half_disk():
    return shapes.half_disk()


@pytest.fixture(scope="session")
def ellipse():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return shapes.ellipse(2.0, 1.0)


def random_interior_points(domain, n, rng, margin=1e-3):
    lo, hi = domain.polygon.min(axis=0), domain.polygon.max(axis=0)
    out = np.empty((0, 2))
    while len(out) < n:
        cand = rng.uniform(lo, hi, size=(4 * n, 2))
        out = np.vstack([out, cand[domain.inside_margin(cand) > margin * domain.scale]])
    return out[:n]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for i in sorted(results):
        status, detail = results[i]
        terminalreporter.write_line(f"criterion {i:2d}: {status}  {detail}")
