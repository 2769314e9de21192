import numpy as np
import pytest

from zoneplanner.geometry import UserPose
from zoneplanner.layout import TemplateKind, ThetaParams, create_zone


@pytest.fixture
def pose():
    return UserPose(position=[0.0, 0.0, 0.0], forward=[0.0, 0.0, 1.0])


@pytest.fixture
def front_zone(pose):
    """A 2x2 zone dead ahead at two meters."""
    return create_zone(
        "z1", TemplateKind.TWO_BY_TWO, 1.6, 1.0, [0.0, 0.0, 2.0], pose,
        ThetaParams(0.8, 0.5),
    )


def bearing_position(azimuth_deg: float, elevation_deg: float, distance: float):
    """World position at a bearing in the canonical test frame (forward +z)."""
    az = np.radians(azimuth_deg)
    el = np.radians(elevation_deg)
    return [
        distance * np.cos(el) * np.sin(az),
        distance * np.sin(el),
        distance * np.cos(el) * np.cos(az),
    ]
