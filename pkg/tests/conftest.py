import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def upper_points(n, seed=0, rmin=0.2, rmax=5.0):
    """Random points of the upper half-plane with modulus in [rmin, rmax]."""
    g = np.random.default_rng(seed)
    r = rmin * (rmax / rmin) ** g.random(n)
    theta = np.pi * (0.02 + 0.96 * g.random(n))
    return r * np.exp(1j * theta)


def atomic_strategy(max_atoms=4, positive=False, lo=-5.0, hi=5.0, min_gap=0.05):
    """Hypothesis strategy for Atomic measures with separated atoms."""
    from hypothesis import strategies as st

    from freemult.measures import Atomic

    lo = max(lo, 0.05) if positive else lo

    @st.composite
    def build(draw):
        k = draw(st.integers(1, max_atoms))
        xs = draw(st.lists(st.floats(lo, hi, allow_nan=False), min_size=k, max_size=k))
        xs = np.round(np.sort(np.asarray(xs)) / min_gap) * min_gap
        xs = np.unique(xs)
        if positive:
            xs = xs[xs > 0]
            if xs.size == 0:
                xs = np.array([1.0])
        w = draw(st.lists(st.floats(0.05, 1.0), min_size=xs.size, max_size=xs.size))
        return Atomic(xs, np.asarray(w) / np.sum(w), normalize=True)

    return build()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
