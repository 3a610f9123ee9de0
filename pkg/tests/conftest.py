import math

import pytest

from fdrrt.geometry import (
    Configuration,
    DiskFootprint,
    RectangleFootprint,
    RobotProfile,
)


@pytest.fixture
def car_profile():
    """Rectangular vehicle with road-scale steering bounds."""
    return RobotProfile(
        id="car",
        footprint=RectangleFootprint(3.6, 1.6),
        kappa_max=0.2,
        sigma_max=0.6,
        connection_radius_r=14.0,
        roadmap_size_n=30,
    )


@pytest.fixture
def disk_profile():
    """Small agile disk robot."""
    return RobotProfile(
        id="disk",
        footprint=DiskFootprint(0.4),
        kappa_max=1.0,
        sigma_max=3.0,
        connection_radius_r=7.0,
        roadmap_size_n=26,
    )


@pytest.fixture
def origin():
    return Configuration(0.0, 0.0, 0.0, 0.0)


def straight_ahead(dist, theta=0.0):
    return Configuration(dist * math.cos(theta), dist * math.sin(theta), theta, 0.0)
