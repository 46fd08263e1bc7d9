from __future__ import annotations

import pytest

from egame.graph import EGCMGraph, canonicalize_triangle, make_cyclic3

from _corpus import corpus


@pytest.fixture(scope="session")
def all_ones():
    """The unit-amplitude triangle (every m = 3) with its canonical labels."""
    g = make_cyclic3(3, 3, 3)
    return g, canonicalize_triangle(g)


@pytest.fixture(scope="session")
def a2_graph():
    """Two nodes, unit amplitudes both ways: the terminating contrast board."""
    return EGCMGraph(("n1", "n2"), [("n1", "n2", 1.0, 1.0, 3)])


@pytest.fixture(scope="session")
def corpus100():
    return corpus(100)


@pytest.fixture(scope="session")
def corpus1000():
    return corpus(1000)
