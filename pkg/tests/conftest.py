import numpy as np
import pytest
from hypothesis import strategies as st

from pmcsurf import ambient as amb


def point_from(theta, phi, r, w):
    ps = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    ph = np.array([np.sinh(r) * np.cos(w), np.sinh(r) * np.sin(w), np.cosh(r)])
    return np.concatenate([ps, ph])


angles = st.floats(0.05, 3.09)
turns = st.floats(-3.1, 3.1)
rapidity = st.floats(0.0, 2.0)
coords = st.floats(-2.0, 2.0)
points = st.builds(point_from, angles, turns, rapidity, turns)
raw_vectors = st.lists(coords, min_size=6, max_size=6).map(np.array)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_point(rng):
    return point_from(rng.uniform(0.1, 3.0), rng.uniform(-3, 3), rng.uniform(0, 2), rng.uniform(-3, 3))


def random_tangent(rng, p):
    return amb.tangent_project(p, rng.normal(size=6))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
