"""Zone templates, cell partition geometry, knob semantics, and occlusion handling.

A zone is an oriented planar rectangle of width W and height H holding a
tiled cell layout. Every template is parameterized by a single split point
theta = (w0, h0) measured from the zone's top-left corner; templates that
use only one divider pin the unused axis to the midpoint. Cell-local
coordinates put the origin at the zone's top-left with x rightward and y
downward, and cells are indexed row-major from the top-left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DegenerateCellError, DomainError, UnresolvableIntrusionError
from .geometry import (
    AngularFootprint,
    Orientation,
    UserPose,
    angular_footprint,
    face_user_orientation,
    rotate_bearing,
)


class TemplateKind(str, Enum):
    """The six cell tilings plus the see-through occlusion-free region."""

    ONE_BY_ONE = "1x1"
    TWO_BY_TWO = "2x2"
    ONE_BY_TWO_V = "1x2v"
    ONE_BY_TWO_H = "1x2h"
    TWO_BY_ONE_V = "2x1v"
    TWO_BY_ONE_H = "2x1h"
    OCCLUSION_FREE = "occlusion"


CELL_COUNTS: dict[TemplateKind, int] = {
    TemplateKind.ONE_BY_ONE: 1,
    TemplateKind.TWO_BY_TWO: 4,
    TemplateKind.ONE_BY_TWO_V: 2,
    TemplateKind.ONE_BY_TWO_H: 2,
    TemplateKind.TWO_BY_ONE_V: 3,
    TemplateKind.TWO_BY_ONE_H: 3,
    TemplateKind.OCCLUSION_FREE: 0,
}

# Which split-point axes each template actually uses; unused axes are pinned
# to the midpoint so theta is always well-defined.
USES_W0 = {
    TemplateKind.TWO_BY_TWO,
    TemplateKind.ONE_BY_TWO_V,
    TemplateKind.TWO_BY_ONE_V,
    TemplateKind.TWO_BY_ONE_H,
}
USES_H0 = {
    TemplateKind.TWO_BY_TWO,
    TemplateKind.ONE_BY_TWO_H,
    TemplateKind.TWO_BY_ONE_V,
    TemplateKind.TWO_BY_ONE_H,
}

CELL_TEMPLATES = tuple(k for k in TemplateKind if k is not TemplateKind.OCCLUSION_FREE)

DEFAULT_THETA_MARGIN = 0.15


@dataclass(frozen=True)
class ThetaParams:
    """Split point (w0, h0) in meters from the zone's top-left corner."""

    w0: float
    h0: float


@dataclass
class Cell:
    """One tile of a zone: top-left origin (x, y), size, and optional occupant."""

    index: int
    x: float
    y: float
    width: float
    height: float
    occupant: str | None = None

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.width / 2.0, self.y + self.height / 2.0)


@dataclass
class ZoneSpec:
    """An oriented zone with its template, dimensions, transform, and cells."""

    id: str
    kind: TemplateKind
    width: float
    height: float
    position: np.ndarray
    orientation: Orientation
    theta: ThetaParams
    cells: list[Cell] = field(default_factory=list)
    locked: bool = False

    def cell(self, index: int) -> Cell:
        for c in self.cells:
            if c.index == index:
                return c
        raise DomainError(f"zone {self.id!r} has no cell {index}")

    def occupants(self) -> dict[int, str]:
        return {c.index: c.occupant for c in self.cells if c.occupant is not None}


def normalize_theta(
    kind: TemplateKind, width: float, height: float, theta: ThetaParams | None
) -> ThetaParams:
    """Pin unused split axes to the midpoint and validate the used ones."""
    if width <= 0 or height <= 0:
        raise DomainError("zone dimensions must be positive")
    w0 = theta.w0 if (theta is not None and kind in USES_W0) else width / 2.0
    h0 = theta.h0 if (theta is not None and kind in USES_H0) else height / 2.0
    if kind in USES_W0 and not (0.0 < w0 < width):
        raise DegenerateCellError(f"w0={w0} outside (0, {width})")
    if kind in USES_H0 and not (0.0 < h0 < height):
        raise DegenerateCellError(f"h0={h0} outside (0, {height})")
    return ThetaParams(w0=w0, h0=h0)


def instantiate(
    kind: TemplateKind, width: float, height: float, theta: ThetaParams
) -> list[Cell]:
    """Build the canonical cell tiling for a template.

    Same-row cells share a height and same-column cells share a width, so
    the whole tiling follows from the single split point. The occlusion
    template admits no cells.
    """
    theta = normalize_theta(kind, width, height, theta)
    w0, h0 = theta.w0, theta.h0
    w1, h1 = width - w0, height - h0

    if kind is TemplateKind.OCCLUSION_FREE:
        return []
    if kind is TemplateKind.ONE_BY_ONE:
        rects = [(0.0, 0.0, width, height)]
    elif kind is TemplateKind.ONE_BY_TWO_V:
        rects = [(0.0, 0.0, w0, height), (w0, 0.0, w1, height)]
    elif kind is TemplateKind.ONE_BY_TWO_H:
        rects = [(0.0, 0.0, width, h0), (0.0, h0, width, h1)]
    elif kind is TemplateKind.TWO_BY_ONE_V:
        # Full-height column on the left, two stacked cells on the right.
        rects = [(0.0, 0.0, w0, height), (w0, 0.0, w1, h0), (w0, h0, w1, h1)]
    elif kind is TemplateKind.TWO_BY_ONE_H:
        # Full-width row on top, two side-by-side cells below.
        rects = [(0.0, 0.0, width, h0), (0.0, h0, w0, h1), (w0, h0, w1, h1)]
    elif kind is TemplateKind.TWO_BY_TWO:
        rects = [
            (0.0, 0.0, w0, h0),
            (w0, 0.0, w1, h0),
            (0.0, h0, w0, h1),
            (w0, h0, w1, h1),
        ]
    else:  # pragma: no cover - enum is exhaustive
        raise DomainError(f"unknown template kind {kind}")
    return [Cell(index=i, x=x, y=y, width=w, height=h) for i, (x, y, w, h) in enumerate(rects)]


def create_zone(
    zone_id: str,
    kind: TemplateKind,
    width: float,
    height: float,
    position,
    pose: UserPose,
    theta: ThetaParams | None = None,
    locked: bool = False,
) -> ZoneSpec:
    """Instantiate a zone at a world position, oriented to face the user."""
    position = np.asarray(position, dtype=float)
    theta = normalize_theta(kind, width, height, theta)
    orientation = face_user_orientation(position, pose)
    return ZoneSpec(
        id=zone_id,
        kind=kind,
        width=width,
        height=height,
        position=position,
        orientation=orientation,
        theta=theta,
        cells=instantiate(kind, width, height, theta),
        locked=locked,
    )


def theta_bounds(
    kind: TemplateKind,
    width: float,
    height: float,
    margin: float = DEFAULT_THETA_MARGIN,
) -> tuple[tuple[float, float] | None, tuple[float, float] | None]:
    """Admissible (w0, h0) intervals; None for an axis the template does not use."""
    if not (0.0 < margin < 0.5):
        raise DomainError("theta margin must lie in (0, 0.5)")
    w_bounds = (margin * width, (1.0 - margin) * width) if kind in USES_W0 else None
    h_bounds = (margin * height, (1.0 - margin) * height) if kind in USES_H0 else None
    return w_bounds, h_bounds


def _with_cells(zone: ZoneSpec, theta: ThetaParams, width=None, height=None) -> ZoneSpec:
    """Rebuild a zone's cells for new theta/dimensions, keeping occupants by index."""
    width = zone.width if width is None else width
    height = zone.height if height is None else height
    cells = instantiate(zone.kind, width, height, theta)
    occupants = zone.occupants()
    for cell in cells:
        cell.occupant = occupants.get(cell.index)
    return replace(zone, width=width, height=height, theta=theta, cells=cells)


@dataclass(frozen=True)
class KnobResult:
    """Outcome of an inner-knob move: the updated zone and a clamp flag."""

    zone: ZoneSpec
    clamped: bool = False


def move_inner_knob(
    zone: ZoneSpec,
    axis: str,
    new_value: float,
    margin: float = DEFAULT_THETA_MARGIN,
) -> KnobResult:
    """Move a divider: ``axis='vertical'`` adjusts w0, ``axis='horizontal'`` adjusts h0.

    The axis names the divider's orientation, so moving the horizontal
    divider changes row heights only and leaves every cell width unchanged.
    Values outside the admissible interval are clamped and flagged.
    """
    if axis not in ("vertical", "horizontal"):
        raise DomainError(f"unknown knob axis {axis!r}")
    w_bounds, h_bounds = theta_bounds(zone.kind, zone.width, zone.height, margin)
    if axis == "vertical":
        if w_bounds is None:
            raise DomainError(f"template {zone.kind.value} has no vertical divider")
        clamped_value = min(max(new_value, w_bounds[0]), w_bounds[1])
        theta = ThetaParams(w0=clamped_value, h0=zone.theta.h0)
    else:
        if h_bounds is None:
            raise DomainError(f"template {zone.kind.value} has no horizontal divider")
        clamped_value = min(max(new_value, h_bounds[0]), h_bounds[1])
        theta = ThetaParams(w0=zone.theta.w0, h0=clamped_value)
    return KnobResult(zone=_with_cells(zone, theta), clamped=clamped_value != new_value)


def move_outer_knob(zone: ZoneSpec, new_width: float, new_height: float) -> ZoneSpec:
    """Resize the zone; the split point and contained windows scale proportionally."""
    if new_width <= 0 or new_height <= 0:
        raise DomainError("zone dimensions must be positive")
    theta = ThetaParams(
        w0=zone.theta.w0 * (new_width / zone.width),
        h0=zone.theta.h0 * (new_height / zone.height),
    )
    return _with_cells(zone, theta, width=new_width, height=new_height)


def scale_zone(zone: ZoneSpec, factor: float) -> ZoneSpec:
    """Uniformly scale a zone's dimensions and split point about its center."""
    if factor <= 0:
        raise DomainError("scale factor must be positive")
    return move_outer_knob(zone, zone.width * factor, zone.height * factor)


def occlusion_conflicts(
    zones: list[ZoneSpec], occlusions: list[ZoneSpec], pose: UserPose
) -> list[tuple[str, str]]:
    """(zone id, occlusion id) pairs whose angular footprints overlap.

    An empty list means the layout is occlusion-clean from this viewpoint.
    """
    for occ in occlusions:
        if occ.kind is not TemplateKind.OCCLUSION_FREE:
            raise DomainError(f"occlusion list entry {occ.id!r} is not occlusion-free")
    conflicts = []
    occ_footprints = [(occ, angular_footprint(occ, pose)) for occ in occlusions]
    for zone in zones:
        fp = angular_footprint(zone, pose)
        for occ, occ_fp in occ_footprints:
            if fp.overlaps(occ_fp):
                conflicts.append((zone.id, occ.id))
    return conflicts


_SHIFT_EPS = 1e-12


def clear_bearing_shift(
    footprint: AngularFootprint,
    obstacles: list[AngularFootprint],
) -> float:
    """Smallest azimuth shift that clears ``footprint`` of every obstacle.

    Returns 0.0 when already clear. Candidate shifts sit at obstacle interval
    boundaries; equal left/right shifts resolve rightward (positive).
    """
    a0, a1 = footprint.azimuth

    def conflicts_at(delta: float) -> bool:
        shifted = AngularFootprint(
            azimuth=(a0 + delta, a1 + delta), elevation=footprint.elevation
        )
        return any(shifted.overlaps(obs) for obs in obstacles)

    if not conflicts_at(0.0):
        return 0.0

    candidates = []
    for obs in obstacles:
        o0, o1 = obs.azimuth
        candidates.append(o0 - a1 - _SHIFT_EPS)  # shift left of this obstacle
        candidates.append(o1 - a0 + _SHIFT_EPS)  # shift right of this obstacle
    candidates = [d for d in candidates if abs(d) <= math.pi]
    candidates.sort(key=lambda d: (abs(d), 0 if d > 0 else 1))
    for delta in candidates:
        if not conflicts_at(delta):
            return delta
    raise UnresolvableIntrusionError(
        "no conflict-free bearing within a half turn in either direction"
    )


def resolve_intrusion(
    zone: ZoneSpec, occlusions: list[ZoneSpec], pose: UserPose
) -> ZoneSpec:
    """Translate a zone along its azimuth to the nearest conflict-free bearing.

    Distance from the user and elevation are preserved; the zone is re-faced
    toward the user at its new position. A zone with no conflict is returned
    unchanged.
    """
    for occ in occlusions:
        if occ.kind is not TemplateKind.OCCLUSION_FREE:
            raise DomainError(f"occlusion list entry {occ.id!r} is not occlusion-free")
    footprint = angular_footprint(zone, pose)
    obstacles = [angular_footprint(occ, pose) for occ in occlusions]
    delta = clear_bearing_shift(footprint, obstacles)
    if delta == 0.0:
        return zone
    new_position = rotate_bearing(pose, zone.position, delta)
    moved = replace(
        zone,
        position=new_position,
        orientation=face_user_orientation(new_position, pose),
    )
    if occlusion_conflicts([moved], occlusions, pose):
        raise UnresolvableIntrusionError(
            f"zone {zone.id!r} still conflicts after bearing shift"
        )
    return moved


def validate_zone(zone: ZoneSpec) -> None:
    """Check a zone's structural invariants, raising DomainError on violation."""
    if zone.width <= 0 or zone.height <= 0:
        raise DomainError("zone dimensions must be positive")
    expected = CELL_COUNTS[zone.kind]
    if len(zone.cells) != expected:
        raise DomainError(
            f"zone {zone.id!r} has {len(zone.cells)} cells, expected {expected}"
        )
    normalize_theta(zone.kind, zone.width, zone.height, zone.theta)
    total = 0.0
    for cell in zone.cells:
        if cell.x < -1e-9 or cell.y < -1e-9:
            raise DomainError("cell origin outside the zone")
        if cell.x + cell.width > zone.width + 1e-9 or cell.y + cell.height > zone.height + 1e-9:
            raise DomainError("cell extends beyond the zone")
        total += cell.area
    if expected and abs(total - zone.width * zone.height) > 1e-9 * zone.width * zone.height:
        raise DomainError("cell areas do not sum to the zone area")
