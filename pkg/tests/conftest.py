import numpy as np
import pytest

from nrap import Family, GenSpec, ProblemInstance, generate


def quad(b, a, l, u, w, c, sense="eq"):
    return ProblemInstance(
        family="quadratic", sense=sense, b=b, a=a, l=l, u=u, params={"w": w, "c": c}
    )


@pytest.fixture
def qpeg2():
    """Three-variable quadratic with two coordinates pegged at the optimum:
    x* = (2, 2, 0), optimal dual values form the interval [0, 1]."""
    return quad(b=4.0, a=[1, 1, 1], l=[0, 0, 0], u=[2, 2, 2], w=[1, 1, 1], c=[6, 3, 0])


@pytest.fixture
def symmetric2():
    """x* = (0.5, 0.5), mu* = -0.5, fully interior."""
    return quad(b=1.0, a=[1, 1], l=[0, 0], u=[1, 1], w=[1, 1], c=[0, 0])


@pytest.fixture
def degenerate2():
    """x* = (1, 0); every mu in [0, 3] is dual optimal."""
    return quad(b=1.0, a=[1, 1], l=[0, 0], u=[1, 1], w=[1, 1], c=[4, 0])


def small_grid(sizes=(10, 50), h_fracs=(0.0, 0.5, 1.0), seeds=(1, 2, 3), families=tuple(Family)):
    """Generated-instance sweep used by property tests."""
    for fam in families:
        for n in sizes:
            for h in h_fracs:
                for seed in seeds:
                    yield generate(GenSpec(family=fam, n=n, h_frac=h, seed=seed))


def assert_close(actual, expected, rtol=1e-10, atol=1e-12):
    np.testing.assert_allclose(actual, expected, rtol=rtol, atol=atol)
