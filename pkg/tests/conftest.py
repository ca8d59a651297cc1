import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from anisotri.geometry import Triangle

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

coord = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def triangles(draw, min_quality=0.05):
    """Non-degenerate triangles: area at least ``min_quality * diameter^2``."""
    pts = draw(st.lists(st.tuples(coord, coord), min_size=3, max_size=3))
    T = Triangle(tuple(pts))
    d = T.diameter
    assume(d > 1e-2 and T.area > min_quality * d * d)
    return T


def random_triangle(rng: np.random.Generator, min_quality: float = 0.05) -> Triangle:
    while True:
        T = Triangle(tuple(map(tuple, rng.uniform(-1.0, 1.0, (3, 2)))))
        if T.diameter > 1e-2 and T.area > min_quality * T.diameter**2:
            return T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


SQRT3 = math.sqrt(3.0)

# acceptance results, criterion number -> (passed, detail); printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
