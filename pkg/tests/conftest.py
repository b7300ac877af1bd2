import numpy as np
import pytest

from ewbench import ChartPoint, SampleDomain, sample

XYT = ("x", "y", "t")
PYT = ("p", "y", "t")


def box_points(chart, lo, hi, count, seed):
    """Plain uniform points in a box, no guards."""
    dim = len(chart)
    dom = SampleDomain(tuple(chart), ((lo, hi),) * dim, (), seed, count)
    return sample(dom)


def pt(chart, *coords):
    return ChartPoint.make(tuple(chart), coords)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260825)
