import math
import random

import numpy as np
import pytest

from zoneplanner.errors import (
    DegenerateCellError,
    DomainError,
    UnresolvableIntrusionError,
)
from zoneplanner.geometry import angular_footprint
from zoneplanner.layout import (
    CELL_COUNTS,
    CELL_TEMPLATES,
    TemplateKind,
    ThetaParams,
    create_zone,
    instantiate,
    move_inner_knob,
    move_outer_knob,
    occlusion_conflicts,
    resolve_intrusion,
    scale_zone,
    theta_bounds,
    validate_zone,
)

from conftest import bearing_position

# Index pairs that must share a height (rows) / width (columns) per template.
ROW_PAIRS = {
    TemplateKind.TWO_BY_TWO: [(0, 1), (2, 3)],
    TemplateKind.ONE_BY_TWO_V: [(0, 1)],
    TemplateKind.TWO_BY_ONE_H: [(1, 2)],
}
COLUMN_PAIRS = {
    TemplateKind.TWO_BY_TWO: [(0, 2), (1, 3)],
    TemplateKind.ONE_BY_TWO_H: [(0, 1)],
    TemplateKind.TWO_BY_ONE_V: [(1, 2)],
}


def _merge_close(values, tol):
    merged = []
    for v in sorted(values):
        if not merged or v - merged[-1] > tol:
            merged.append(v)
    return merged


def tiles_exactly(cells, width, height) -> bool:
    """Cells cover the zone rectangle exactly, with edges on shared grid lines."""
    tol = 1e-9 * max(width, height)
    xs = _merge_close([v for c in cells for v in (c.x, c.x + c.width)], tol)
    ys = _merge_close([v for c in cells for v in (c.y, c.y + c.height)], tol)
    if abs(xs[0]) > tol or abs(xs[-1] - width) > tol:
        return False
    if abs(ys[0]) > tol or abs(ys[-1] - height) > tol:
        return False
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            mx, my = (x0 + x1) / 2, (y0 + y1) / 2
            covering = [
                c
                for c in cells
                if c.x - tol <= mx <= c.x + c.width + tol
                and c.y - tol <= my <= c.y + c.height + tol
            ]
            if len(covering) != 1:
                return False
    return True


class TestInstantiate:
    def test_two_by_two_midpoint(self):
        cells = instantiate(TemplateKind.TWO_BY_TWO, 2.0, 1.0, ThetaParams(1.0, 0.5))
        assert len(cells) == 4
        for cell in cells:
            assert cell.width == pytest.approx(1.0)
            assert cell.height == pytest.approx(0.5)

    def test_two_by_two_partition_formulas(self):
        w, h, w0, h0 = 2.0, 1.2, 0.7, 0.4
        cells = instantiate(TemplateKind.TWO_BY_TWO, w, h, ThetaParams(w0, h0))
        by_index = {c.index: c for c in cells}
        assert (by_index[0].width, by_index[0].height) == (w0, h0)
        assert (by_index[1].width, by_index[1].height) == (w - w0, h0)
        assert (by_index[2].width, by_index[2].height) == (w0, h - h0)
        assert (by_index[3].width, by_index[3].height) == (w - w0, h - h0)

    def test_areas_sum_to_zone_area(self):
        cells = instantiate(TemplateKind.TWO_BY_TWO, 1.7, 0.9, ThetaParams(0.33, 0.61))
        assert sum(c.area for c in cells) == pytest.approx(1.7 * 0.9, rel=1e-12)

    def test_three_to_seven_ratio_grid(self):
        cells = instantiate(TemplateKind.ONE_BY_TWO_V, 1.0, 1.0, ThetaParams(0.3, 0.5))
        assert [(c.width, c.height) for c in cells] == [(0.3, 1.0), (0.7, 1.0)]

    def test_boundary_theta_rejected(self):
        with pytest.raises(DegenerateCellError):
            instantiate(TemplateKind.ONE_BY_TWO_V, 1.0, 1.0, ThetaParams(0.0, 0.5))
        with pytest.raises(DegenerateCellError):
            instantiate(TemplateKind.TWO_BY_TWO, 1.0, 1.0, ThetaParams(0.5, 1.0))

    def test_occlusion_template_has_no_cells(self):
        assert instantiate(TemplateKind.OCCLUSION_FREE, 1.0, 1.0, ThetaParams(0.5, 0.5)) == []

    def test_cell_counts_per_template(self):
        for kind in CELL_TEMPLATES:
            cells = instantiate(kind, 1.0, 1.0, ThetaParams(0.4, 0.6))
            assert len(cells) == CELL_COUNTS[kind]
            assert [c.index for c in cells] == list(range(len(cells)))

    def test_partition_completeness_random(self):
        rng = random.Random(7)
        for _ in range(200):
            kind = rng.choice(CELL_TEMPLATES)
            width = rng.uniform(0.2, 5.0)
            height = rng.uniform(0.2, 5.0)
            theta = ThetaParams(
                rng.uniform(0.05, 0.95) * width, rng.uniform(0.05, 0.95) * height
            )
            cells = instantiate(kind, width, height, theta)
            assert sum(c.area for c in cells) == pytest.approx(
                width * height, rel=1e-9
            )
            assert tiles_exactly(cells, width, height)

    def test_row_and_column_sharing(self):
        theta = ThetaParams(0.37, 0.81)
        for kind in CELL_TEMPLATES:
            cells = {c.index: c for c in instantiate(kind, 1.3, 1.1, theta)}
            for a, b in ROW_PAIRS.get(kind, []):
                assert cells[a].height == pytest.approx(cells[b].height, rel=1e-12)
                assert cells[a].y == pytest.approx(cells[b].y, rel=1e-12)
            for a, b in COLUMN_PAIRS.get(kind, []):
                assert cells[a].width == pytest.approx(cells[b].width, rel=1e-12)
                assert cells[a].x == pytest.approx(cells[b].x, rel=1e-12)


class TestKnobs:
    def test_inner_knob_moves_vertical_divider(self, pose):
        zone = create_zone(
            "z", TemplateKind.ONE_BY_TWO_V, 1.0, 1.0, [0, 0, 2], pose,
            ThetaParams(0.3, 0.5),
        )
        result = move_inner_knob(zone, "vertical", 0.5)
        assert not result.clamped
        assert [c.width for c in result.zone.cells] == [pytest.approx(0.5)] * 2

    def test_out_of_bounds_clamped_and_flagged(self, pose):
        zone = create_zone(
            "z", TemplateKind.ONE_BY_TWO_V, 1.0, 1.0, [0, 0, 2], pose,
            ThetaParams(0.3, 0.5),
        )
        result = move_inner_knob(zone, "vertical", 0.95)
        assert result.clamped
        assert result.zone.theta.w0 == pytest.approx(0.85)

    def test_horizontal_knob_preserves_widths_on_two_by_two(self, pose):
        zone = create_zone(
            "z", TemplateKind.TWO_BY_TWO, 2.0, 1.0, [0, 0, 2], pose,
            ThetaParams(0.7, 0.5),
        )
        before = [c.width for c in zone.cells]
        result = move_inner_knob(zone, "horizontal", 0.3)
        assert [c.width for c in result.zone.cells] == before
        assert result.zone.theta.h0 == pytest.approx(0.3)

    def test_missing_divider_rejected(self, pose):
        zone = create_zone("z", TemplateKind.ONE_BY_TWO_V, 1.0, 1.0, [0, 0, 2], pose)
        with pytest.raises(DomainError):
            move_inner_knob(zone, "horizontal", 0.4)

    def test_occupants_survive_inner_knob(self, pose):
        zone = create_zone(
            "z", TemplateKind.TWO_BY_TWO, 2.0, 1.0, [0, 0, 2], pose,
            ThetaParams(0.8, 0.4),
        )
        zone.cells[1].occupant = "browser"
        zone.cells[2].occupant = "mail"
        result = move_inner_knob(zone, "vertical", 1.2)
        assert result.zone.occupants() == {1: "browser", 2: "mail"}

    def test_outer_knob_scales_theta_proportionally(self, pose):
        zone = create_zone(
            "z", TemplateKind.ONE_BY_TWO_V, 1.0, 1.0, [0, 0, 2], pose,
            ThetaParams(0.3, 0.5),
        )
        resized = move_outer_knob(zone, 2.0, 1.0)
        assert resized.theta.w0 == pytest.approx(0.6)

    def test_uniform_doubling_quadruples_cell_areas(self, pose):
        zone = create_zone(
            "z", TemplateKind.TWO_BY_TWO, 1.5, 1.0, [0, 0, 2], pose,
            ThetaParams(0.6, 0.4),
        )
        doubled = move_outer_knob(zone, 3.0, 2.0)
        for before, after in zip(zone.cells, doubled.cells):
            assert after.area == pytest.approx(4.0 * before.area, rel=1e-12)

    def test_double_then_halve_is_bit_exact(self, pose):
        zone = create_zone(
            "z", TemplateKind.TWO_BY_TWO, 1.5, 1.0, [0, 0, 2], pose,
            ThetaParams(0.6, 0.4),
        )
        round_trip = move_outer_knob(move_outer_knob(zone, 3.0, 2.0), 1.5, 1.0)
        assert round_trip.width == zone.width
        assert round_trip.height == zone.height
        assert round_trip.theta == zone.theta
        for a, b in zip(zone.cells, round_trip.cells):
            assert (a.x, a.y, a.width, a.height) == (b.x, b.y, b.width, b.height)

    def test_occupants_survive_outer_knob(self, pose):
        zone = create_zone(
            "z", TemplateKind.TWO_BY_ONE_V, 1.5, 1.0, [0, 0, 2], pose,
            ThetaParams(0.6, 0.4),
        )
        zone.cells[0].occupant = "ide"
        resized = move_outer_knob(zone, 2.5, 1.4)
        assert resized.occupants() == {0: "ide"}

    def test_non_positive_dimensions_rejected(self, pose):
        zone = create_zone("z", TemplateKind.ONE_BY_ONE, 1.0, 1.0, [0, 0, 2], pose)
        with pytest.raises(DomainError):
            move_outer_knob(zone, 0.0, 1.0)

    def test_theta_bounds_only_for_used_axes(self):
        w_bounds, h_bounds = theta_bounds(TemplateKind.ONE_BY_TWO_V, 1.0, 1.0, 0.15)
        assert w_bounds == pytest.approx((0.15, 0.85))
        assert h_bounds is None


class TestOcclusionConflicts:
    def make_occlusion(self, pose, position, width=0.5, height=0.5, occ_id="occ"):
        return create_zone(occ_id, TemplateKind.OCCLUSION_FREE, width, height, position, pose)

    def test_disjoint_bearings_no_conflict(self, pose, front_zone):
        occ = self.make_occlusion(pose, bearing_position(90, 0, 2))
        assert occlusion_conflicts([front_zone], [occ], pose) == []

    def test_co_centered_conflict(self, pose, front_zone):
        occ = self.make_occlusion(pose, [0, 0, 2])
        assert occlusion_conflicts([front_zone], [occ], pose) == [("z1", "occ")]

    def test_three_zones_one_overlapping(self, pose):
        zones = [
            create_zone("a", TemplateKind.ONE_BY_ONE, 0.6, 0.6, bearing_position(-50, 0, 2), pose),
            create_zone("b", TemplateKind.ONE_BY_ONE, 0.6, 0.6, bearing_position(0, 0, 2), pose),
            create_zone("c", TemplateKind.ONE_BY_ONE, 0.6, 0.6, bearing_position(50, 0, 2), pose),
        ]
        occ = self.make_occlusion(pose, bearing_position(2, 0, 2))
        # interval oracle: only zone b's azimuth interval can reach 2 degrees
        half_zone = math.degrees(math.atan(0.3 / 2.0))  # ~8.5 degrees
        assert 2 - 0.25 * 180 / math.pi < half_zone  # occlusion center within b's span
        conflicts = occlusion_conflicts(zones, [occ], pose)
        assert conflicts == [("b", "occ")]

    def test_non_occlusion_entry_rejected(self, pose, front_zone):
        with pytest.raises(DomainError):
            occlusion_conflicts([front_zone], [front_zone], pose)


class TestResolveIntrusion:
    def occlusion_spanning(self, pose, az_lo_deg, az_hi_deg, distance=2.0):
        center = bearing_position((az_lo_deg + az_hi_deg) / 2, 0, distance)
        half = math.radians((az_hi_deg - az_lo_deg) / 2)
        width = 2 * distance * math.tan(half)
        return create_zone(
            "occ", TemplateKind.OCCLUSION_FREE, width, 1.0, center, pose
        )

    def zone_spanning(self, pose, center_deg, span_deg, distance=2.0, zone_id="z"):
        half = math.radians(span_deg / 2)
        width = 2 * distance * math.tan(half)
        return create_zone(
            zone_id, TemplateKind.ONE_BY_ONE, width, 0.8,
            bearing_position(center_deg, 0, distance), pose,
        )

    def test_tie_resolves_rightward(self, pose):
        # 1-D interval sweep oracle: occlusion [-5, 5], zone span 20 centered at 0
        # forbidden shift interval is (-15, 15); nearest clear bearings are +/-15
        occ = self.occlusion_spanning(pose, -5, 5)
        zone = self.zone_spanning(pose, 0, 20)
        moved = resolve_intrusion(zone, [occ], pose)
        fp = angular_footprint(moved, pose)
        assert math.degrees(fp.azimuth_center) == pytest.approx(15.0, abs=0.01)
        assert occlusion_conflicts([moved], [occ], pose) == []

    def test_nearer_side_wins(self, pose):
        occ = self.occlusion_spanning(pose, -5, 5)
        zone = self.zone_spanning(pose, 3, 20)  # already biased right
        moved = resolve_intrusion(zone, [occ], pose)
        fp = angular_footprint(moved, pose)
        assert math.degrees(fp.azimuth_center) == pytest.approx(15.0, abs=0.01)

    def test_no_conflict_is_identity(self, pose):
        occ = self.occlusion_spanning(pose, 60, 80)
        zone = self.zone_spanning(pose, 0, 20)
        moved = resolve_intrusion(zone, [occ], pose)
        assert moved is zone

    def test_distance_preserved(self, pose):
        occ = self.occlusion_spanning(pose, -5, 5)
        zone = self.zone_spanning(pose, 0, 20, distance=2.5)
        moved = resolve_intrusion(zone, [occ], pose)
        assert np.linalg.norm(moved.position - pose.position) == pytest.approx(2.5)

    def test_full_circle_unresolvable(self, pose):
        occlusions = []
        for i, center in enumerate(range(-180, 180, 30)):
            occ = self.occlusion_spanning(pose, center - 16, center + 16)
            occlusions.append(
                create_zone(f"occ{i}", TemplateKind.OCCLUSION_FREE, occ.width,
                            occ.height, occ.position, pose)
            )
        zone = self.zone_spanning(pose, 0, 20)
        with pytest.raises(UnresolvableIntrusionError):
            resolve_intrusion(zone, occlusions, pose)

    def test_resolution_skips_to_gap_between_occlusions(self, pose):
        occ_a = self.occlusion_spanning(pose, -10, 10)
        occ_b = create_zone(
            "occ_b", TemplateKind.OCCLUSION_FREE,
            self.occlusion_spanning(pose, 12, 40).width, 1.0,
            bearing_position(26, 0, 2), pose,
        )
        zone = self.zone_spanning(pose, 0, 10)
        moved = resolve_intrusion(zone, [occ_a, occ_b], pose)
        assert occlusion_conflicts([moved], [occ_a, occ_b], pose) == []


class TestZoneValidation:
    def test_validate_accepts_fresh_zone(self, front_zone):
        validate_zone(front_zone)

    def test_scale_zone_preserves_proportions(self, front_zone):
        scaled = scale_zone(front_zone, 1.5)
        assert scaled.width == pytest.approx(front_zone.width * 1.5)
        assert scaled.theta.w0 / scaled.width == pytest.approx(
            front_zone.theta.w0 / front_zone.width
        )
        validate_zone(scaled)
