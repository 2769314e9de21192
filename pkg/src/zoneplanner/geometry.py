"""User-relative 3D math: bearings, angular sizes, head-turn angles, zone orientation.

All angles are radians internally; degrees appear only at I/O boundaries.
Azimuth is measured in the user's horizontal frame, positive to the user's
right; elevation is positive upward. Both live in [-pi, pi] and
[-pi/2, pi/2] respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError

if TYPE_CHECKING:
    from .layout import ZoneSpec

WORLD_UP = np.array([0.0, 1.0, 0.0])

_UNIT_TOL = 1e-9
_PARALLEL_TOL = 1e-9


def _vec3(value) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise DomainError(f"expected a 3-vector, got shape {v.shape}")
    return v


def _normalize(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise DomainError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class UserPose:
    """The user's head position and unit forward viewing vector."""

    position: np.ndarray
    forward: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        object.__setattr__(self, "forward", _vec3(self.forward))
        if not np.all(np.isfinite(self.position)):
            raise DomainError("pose position must be finite")
        norm = float(np.linalg.norm(self.forward))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise DomainError(f"forward vector must be unit length, |v|={norm}")


@dataclass(frozen=True)
class Orientation:
    """A zone plane's orientation: unit normal (toward the viewer) and in-plane up."""

    normal: np.ndarray
    up: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "normal", _vec3(self.normal))
        object.__setattr__(self, "up", _vec3(self.up))

    @property
    def right(self) -> np.ndarray:
        """In-plane rightward axis as seen by a viewer the normal points at."""
        return np.cross(self.normal, self.up)


@dataclass(frozen=True)
class AngularFootprint:
    """Azimuth/elevation intervals a rectangle subtends from the user's viewpoint.

    ``behind_user`` marks footprints whose center bearing is more than a
    quarter turn off the forward direction; their azimuth interval is a
    conservative over-estimate because corner azimuths may wrap.
    """

    azimuth: tuple[float, float]
    elevation: tuple[float, float]
    behind_user: bool = False

    def __post_init__(self):
        if self.azimuth[0] > self.azimuth[1] or self.elevation[0] > self.elevation[1]:
            raise DomainError("footprint interval lower bound exceeds upper bound")

    @property
    def azimuth_center(self) -> float:
        return 0.5 * (self.azimuth[0] + self.azimuth[1])

    @property
    def azimuth_halfwidth(self) -> float:
        return 0.5 * (self.azimuth[1] - self.azimuth[0])

    def overlaps(self, other: "AngularFootprint") -> bool:
        """Strict interval overlap on both axes; touching edges do not conflict."""
        az = self.azimuth[0] < other.azimuth[1] and other.azimuth[0] < self.azimuth[1]
        el = (
            self.elevation[0] < other.elevation[1]
            and other.elevation[0] < self.elevation[1]
        )
        return az and el


def angular_size(width: float, height: float, distance: float) -> tuple[float, float]:
    """Angular extent (azimuthal, elevational) of a width x height rect at a distance.

    Returns (arctan(w/d), arctan(h/d)); the readability rule compares the
    smaller of the two against a minimum angular threshold.
    """
    if width <= 0 or height <= 0 or distance <= 0:
        raise DomainError("angular_size requires positive width, height, distance")
    return math.atan(width / distance), math.atan(height / distance)


def head_turn_angle(pose: UserPose, target) -> float:
    """Angle between the user's forward vector and the direction to ``target``."""
    direction = _vec3(target) - pose.position
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        raise DomainError("head turn direction undefined: target equals position")
    cosine = float(np.dot(pose.forward, direction)) / norm
    return math.acos(max(-1.0, min(1.0, cosine)))


def face_user_orientation(zone_center, pose: UserPose) -> Orientation:
    """Orientation whose plane normal points from the zone center to the user.

    The in-plane up axis is world-up projected onto the plane; when the
    normal is (anti)parallel to world-up the user's forward vector is used
    as the up reference instead.
    """
    center = _vec3(zone_center)
    to_user = pose.position - center
    if float(np.linalg.norm(to_user)) == 0.0:
        raise DomainError("zone center coincides with the user position")
    normal = _normalize(to_user)

    up_ref = WORLD_UP
    if abs(float(np.dot(normal, WORLD_UP))) > 1.0 - _PARALLEL_TOL:
        up_ref = pose.forward
    in_plane = up_ref - float(np.dot(up_ref, normal)) * normal
    if float(np.linalg.norm(in_plane)) < 1e-12:
        raise DomainError("cannot derive an up axis: reference parallel to normal")
    return Orientation(normal=normal, up=_normalize(in_plane))


def user_frame(pose: UserPose) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Horizontal viewing frame (forward_h, right, up) for bearing math.

    A user looking straight up or down has no horizontal forward; world +z
    is used as the fallback reference in that degenerate case.
    """
    f_h = pose.forward - float(np.dot(pose.forward, WORLD_UP)) * WORLD_UP
    if float(np.linalg.norm(f_h)) < 1e-12:
        f_h = np.array([0.0, 0.0, 1.0])
    f_h = _normalize(f_h)
    right = np.cross(WORLD_UP, f_h)
    return f_h, right, WORLD_UP


def bearing(pose: UserPose, point) -> tuple[float, float]:
    """(azimuth, elevation) of a world point in the user's horizontal frame."""
    direction = _vec3(point) - pose.position
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        raise DomainError("bearing undefined: point equals the user position")
    d = direction / norm
    f_h, right, up = user_frame(pose)
    azimuth = math.atan2(float(np.dot(d, right)), float(np.dot(d, f_h)))
    elevation = math.asin(max(-1.0, min(1.0, float(np.dot(d, up)))))
    return azimuth, elevation


def rect_footprint(
    position, orientation: Orientation, width: float, height: float, pose: UserPose
) -> AngularFootprint:
    """Angular footprint of an oriented rectangle's four corners.

    Corner azimuths are wrapped into [-pi, pi] individually; for rectangles
    behind the user this yields an over-wide (conservative) interval, which
    is flagged via ``behind_user``.
    """
    center = _vec3(position)
    half_r = orientation.right * (width / 2.0)
    half_u = orientation.up * (height / 2.0)
    corners = [
        center + half_r + half_u,
        center + half_r - half_u,
        center - half_r + half_u,
        center - half_r - half_u,
    ]
    azimuths = []
    elevations = []
    for corner in corners:
        az, el = bearing(pose, corner)
        azimuths.append(az)
        elevations.append(el)
    center_angle = head_turn_angle(pose, center)
    return AngularFootprint(
        azimuth=(min(azimuths), max(azimuths)),
        elevation=(min(elevations), max(elevations)),
        behind_user=center_angle > math.pi / 2.0,
    )


def angular_footprint(zone: "ZoneSpec", pose: UserPose) -> AngularFootprint:
    """Angular footprint of a zone's rectangle from the user's viewpoint."""
    return rect_footprint(zone.position, zone.orientation, zone.width, zone.height, pose)


def rotate_bearing(pose: UserPose, point, delta_azimuth: float) -> np.ndarray:
    """Rotate a world point about the user's vertical axis by ``delta_azimuth``.

    Preserves distance to the user and elevation; azimuth shifts by exactly
    the given delta (positive = rightward in the user frame).
    """
    f_h, right, up = user_frame(pose)
    v = _vec3(point) - pose.position
    c_f = float(np.dot(v, f_h))
    c_r = float(np.dot(v, right))
    c_u = float(np.dot(v, up))
    radius = math.hypot(c_f, c_r)
    angle = math.atan2(c_r, c_f) + delta_azimuth
    rotated = (
        radius * math.cos(angle) * f_h + radius * math.sin(angle) * right + c_u * up
    )
    return pose.position + rotated
