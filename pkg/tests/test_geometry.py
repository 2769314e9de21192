import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zoneplanner.errors import DomainError
from zoneplanner.geometry import (
    AngularFootprint,
    UserPose,
    angular_footprint,
    angular_size,
    bearing,
    face_user_orientation,
    head_turn_angle,
    rect_footprint,
    rotate_bearing,
)
from zoneplanner.layout import TemplateKind, create_zone

from conftest import bearing_position


class TestAngularSize:
    def test_unit_square_at_unit_distance(self):
        az, el = angular_size(1.0, 1.0, 1.0)
        assert az == pytest.approx(math.radians(45.0))
        assert el == pytest.approx(math.radians(45.0))

    def test_half_meter_window_at_two_meters(self):
        # calculator oracle: arctan(0.25) and arctan(0.2)
        az, el = angular_size(0.5, 0.4, 2.0)
        assert math.degrees(az) == pytest.approx(14.0362434679, abs=1e-9)
        assert math.degrees(el) == pytest.approx(11.3099324740, abs=1e-9)

    def test_meets_ten_degree_threshold(self):
        az, el = angular_size(0.5, 0.4, 2.0)
        assert min(az, el) >= math.radians(10.0)

    @pytest.mark.parametrize("w,h,d", [(0, 1, 1), (1, -1, 1), (1, 1, 0)])
    def test_rejects_non_positive_inputs(self, w, h, d):
        with pytest.raises(DomainError):
            angular_size(w, h, d)

    @given(
        w=st.floats(0.01, 10), h=st.floats(0.01, 10),
        d=st.floats(0.1, 50), factor=st.floats(1.01, 5),
    )
    def test_decreasing_in_distance_increasing_in_size(self, w, h, d, factor):
        az, el = angular_size(w, h, d)
        az_far, el_far = angular_size(w, h, d * factor)
        az_big, el_big = angular_size(w * factor, h * factor, d)
        assert az_far < az and el_far < el
        assert az_big > az and el_big > el


class TestHeadTurnAngle:
    def test_collinear_target(self, pose):
        assert head_turn_angle(pose, [0, 0, 2]) == pytest.approx(0.0)

    def test_unit_diagonal(self, pose):
        assert head_turn_angle(pose, [1, 0, 1]) == pytest.approx(math.radians(45.0))

    def test_antipodal(self, pose):
        assert head_turn_angle(pose, [0, 0, -1]) == pytest.approx(math.pi)

    def test_target_at_position_rejected(self, pose):
        with pytest.raises(DomainError):
            head_turn_angle(pose, [0, 0, 0])

    @given(
        x=st.floats(-5, 5), y=st.floats(-5, 5), z=st.floats(-5, 5),
        scale=st.floats(0.01, 100),
    )
    def test_invariant_under_scaling_of_offset(self, x, y, z, scale):
        pose = UserPose(position=[0.4, -0.2, 0.1], forward=[0.0, 0.0, 1.0])
        offset = np.array([x, y, z])
        if np.linalg.norm(offset) < 1e-3:
            return
        a = head_turn_angle(pose, pose.position + offset)
        b = head_turn_angle(pose, pose.position + scale * offset)
        assert a == pytest.approx(b, abs=1e-7)

    def test_result_in_valid_range(self, pose):
        for target in ([3, 1, -2], [-1, -1, -1], [0, 5, 0.1]):
            assert 0.0 <= head_turn_angle(pose, target) <= math.pi


class TestFaceUserOrientation:
    def test_zone_ahead_faces_back(self, pose):
        orientation = face_user_orientation([0, 0, 2], pose)
        assert orientation.normal == pytest.approx([0, 0, -1])
        assert orientation.up == pytest.approx([0, 1, 0])

    def test_zone_to_the_side(self, pose):
        orientation = face_user_orientation([2, 0, 0], pose)
        assert orientation.normal == pytest.approx([-1, 0, 0])

    def test_zone_overhead_uses_forward_fallback(self, pose):
        orientation = face_user_orientation([0, 2, 0], pose)
        assert orientation.normal == pytest.approx([0, -1, 0])
        # up reference falls back to the user's forward vector
        assert orientation.up == pytest.approx([0, 0, 1])

    def test_zone_at_user_position_rejected(self, pose):
        with pytest.raises(DomainError):
            face_user_orientation([0, 0, 0], pose)

    def test_normal_is_unit_and_orthogonal_to_up(self, pose):
        orientation = face_user_orientation([1.3, 0.4, 1.7], pose)
        assert np.linalg.norm(orientation.normal) == pytest.approx(1.0)
        assert np.linalg.norm(orientation.up) == pytest.approx(1.0)
        assert float(np.dot(orientation.normal, orientation.up)) == pytest.approx(0.0, abs=1e-12)


class TestPoseValidation:
    def test_forward_must_be_unit(self):
        with pytest.raises(DomainError):
            UserPose(position=[0, 0, 0], forward=[0, 0, 2])

    def test_position_must_be_finite(self):
        with pytest.raises(DomainError):
            UserPose(position=[0, math.inf, 0], forward=[0, 0, 1])


class TestAngularFootprint:
    def test_centered_square_zone(self, pose):
        zone = create_zone(
            "z", TemplateKind.ONE_BY_ONE, 1.0, 1.0, [0, 0, 2], pose
        )
        fp = angular_footprint(zone, pose)
        half = math.degrees(math.atan(0.5 / 2.0))
        assert math.degrees(fp.azimuth[0]) == pytest.approx(-half, abs=1e-6)
        assert math.degrees(fp.azimuth[1]) == pytest.approx(half, abs=1e-6)
        assert not fp.behind_user

    def test_symmetric_about_center_bearing(self, pose):
        zone = create_zone(
            "z", TemplateKind.ONE_BY_ONE, 0.8, 0.6, bearing_position(30, 10, 2.5), pose
        )
        fp = angular_footprint(zone, pose)
        az_center, el_center = bearing(pose, zone.position)
        assert fp.azimuth_center == pytest.approx(az_center, abs=1e-6)
        # elevation is symmetric only to first order (asin is nonlinear)
        assert 0.5 * (fp.elevation[0] + fp.elevation[1]) == pytest.approx(
            el_center, abs=5e-3
        )

    def test_disjoint_intervals_do_not_overlap(self):
        a = AngularFootprint(azimuth=(-0.2, -0.1), elevation=(-0.1, 0.1))
        b = AngularFootprint(azimuth=(0.1, 0.2), elevation=(-0.1, 0.1))
        assert not a.overlaps(b)
        assert not b.overlaps(a)

    def test_touching_intervals_do_not_conflict(self):
        a = AngularFootprint(azimuth=(-0.2, 0.0), elevation=(-0.1, 0.1))
        b = AngularFootprint(azimuth=(0.0, 0.2), elevation=(-0.1, 0.1))
        assert not a.overlaps(b)

    def test_overlap_requires_both_axes(self):
        a = AngularFootprint(azimuth=(-0.1, 0.1), elevation=(-0.1, 0.1))
        b = AngularFootprint(azimuth=(0.0, 0.2), elevation=(0.2, 0.4))
        assert not a.overlaps(b)
        c = AngularFootprint(azimuth=(0.0, 0.2), elevation=(0.0, 0.2))
        assert a.overlaps(c)

    def test_zone_behind_user_flagged(self, pose):
        zone = create_zone(
            "z", TemplateKind.ONE_BY_ONE, 1.0, 1.0, [0, 0, -2], pose
        )
        fp = angular_footprint(zone, pose)
        assert fp.behind_user

    def test_invalid_interval_rejected(self):
        with pytest.raises(DomainError):
            AngularFootprint(azimuth=(0.5, -0.5), elevation=(0, 0.1))


class TestRotateBearing:
    def test_rotation_shifts_azimuth_exactly(self, pose):
        start = np.array(bearing_position(10, 5, 2.0))
        rotated = rotate_bearing(pose, start, math.radians(25))
        az, el = bearing(pose, rotated)
        assert math.degrees(az) == pytest.approx(35.0, abs=1e-9)
        assert math.degrees(el) == pytest.approx(5.0, abs=1e-9)
        assert np.linalg.norm(rotated - pose.position) == pytest.approx(2.0)

    def test_rect_footprint_shifts_with_rotation(self, pose):
        position = np.array(bearing_position(0, 0, 2.0))
        orientation = face_user_orientation(position, pose)
        fp = rect_footprint(position, orientation, 0.5, 0.5, pose)
        moved = rotate_bearing(pose, position, math.radians(40))
        fp2 = rect_footprint(
            moved, face_user_orientation(moved, pose), 0.5, 0.5, pose
        )
        assert fp2.azimuth_center - fp.azimuth_center == pytest.approx(
            math.radians(40), abs=1e-9
        )
        assert fp2.elevation == pytest.approx(fp.elevation, abs=1e-9)
