"""Per-zone split-point optimization and the conditional readability scale-up.

Each zone is optimized independently on a uniform grid over the admissible
split-point box: the objective is the intra-zone transition cost plus a
size term that pays zones for giving area to high-relevance apps. Zone
positions never change here; only the split point, and, when text would be
too small to read, a uniform scale-up of the whole zone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .costmodel import CostWeights, world_cell_center
from .errors import DomainError
from .geometry import UserPose
from .layout import (
    ThetaParams,
    ZoneSpec,
    instantiate,
    scale_zone,
    theta_bounds,
)
from .recommender import ReadabilityRules
from .telemetry import TransitionMatrix

if TYPE_CHECKING:
    from .assignment import Assignment
    from .recommender import RelevanceSet

DEFAULT_ALPHA_MIN = math.radians(0.5)


@dataclass(frozen=True)
class SizingConfig:
    """Knobs for the split-point search and the readability constraint."""

    alpha_min: float = DEFAULT_ALPHA_MIN  # radians per text row
    omega_margin: float = 0.15
    grid_resolution: int = 41
    lambda_s: float = 0.5
    max_scale: float = 3.0

    def __post_init__(self):
        if not (0.0 < self.omega_margin < 0.5):
            raise DomainError("omega_margin must lie in (0, 0.5)")
        if self.grid_resolution < 3:
            raise DomainError("grid_resolution must be at least 3")
        if self.alpha_min <= 0:
            raise DomainError("alpha_min must be positive")
        if self.max_scale < 1.0:
            raise DomainError("max_scale must be at least 1")


@dataclass(frozen=True)
class SizingResult:
    """Optimized split point plus the post-optimization scale factor."""

    zone_id: str
    theta_star: ThetaParams
    scale_factor: float = 1.0
    objective_value: float = 0.0
    evaluated_points: int = 0
    scale_clamped: bool = False
    locked: bool = False


def cell_area(zone: ZoneSpec, cell_index: int, theta: ThetaParams) -> float:
    """Area of one cell under a hypothetical split point."""
    cells = instantiate(zone.kind, zone.width, zone.height, theta)
    for cell in cells:
        if cell.index == cell_index:
            return cell.area
    raise DomainError(f"template {zone.kind.value} has no cell {cell_index}")


def _zone_occupants(zone: ZoneSpec, assignment: "Assignment") -> list[tuple[str, int]]:
    """(app id, cell index) pairs living in this zone, stably ordered by app id.

    Combines committed cell occupants with proposed assignment entries.
    """
    pairs = {app: idx for idx, app in zone.occupants().items()}
    for app_id, (zone_id, cell_index) in assignment.entries.items():
        if zone_id == zone.id:
            pairs[app_id] = cell_index
    return sorted(pairs.items())


def _fixed_signal_norms(
    zone: ZoneSpec, occupants: list[tuple[str, int]], pose: UserPose
) -> dict[int, tuple[float, float]]:
    """Per-cell normalized head-turn and hand-travel terms at the current split.

    Only the pointing distance varies with the split point during the search;
    these two stay fixed, evaluated at the zone's committed layout: head turn
    to each occupied cell center, and distance from the zone center to each
    cell center as the in-zone hand-travel proxy. Min-max over the occupied
    cells, constant signals normalizing to zero.
    """
    from .geometry import head_turn_angle

    indices = [cell_index for _, cell_index in occupants]
    h_raws = []
    m_raws = []
    for cell_index in indices:
        center = world_cell_center(zone, cell_index)
        h_raws.append(head_turn_angle(pose, center))
        m_raws.append(float(np.linalg.norm(center - zone.position)))

    def minmax(values: list[float]) -> list[float]:
        lo, hi = min(values), max(values)
        if hi == lo:
            return [0.0] * len(values)
        return [(v - lo) / (hi - lo) for v in values]

    h_norms = minmax(h_raws)
    m_norms = minmax(m_raws)
    return {
        idx: (h, m) for idx, h, m in zip(indices, h_norms, m_norms)
    }


def zone_objective(
    zone: ZoneSpec,
    assignment: "Assignment",
    relevance: "RelevanceSet",
    transitions: TransitionMatrix,
    weights: CostWeights,
    config: SizingConfig,
    theta: ThetaParams,
    pose: UserPose,
) -> float:
    """Local cost plus the weighted negative size term at a candidate split.

    The cost term sums relevance- and transition-weighted intra-zone costs
    over ordered occupant pairs; fewer than two occupants make it zero. The
    size term is the negative relevance-weighted cell-area sum, with areas
    normalized by the zone area so both terms are dimensionless.
    """
    occupants = _zone_occupants(zone, assignment)
    cells = instantiate(zone.kind, zone.width, zone.height, theta)
    centers = {cell.index: cell.center for cell in cells}
    areas = {cell.index: cell.area for cell in cells}
    diagonal = math.hypot(zone.width, zone.height)

    cost_term = 0.0
    if len(occupants) >= 2:
        fixed = _fixed_signal_norms(zone, occupants, pose)
        for app_i, cell_i in occupants:
            for app_j, cell_j in occupants:
                if app_i == app_j:
                    continue
                ci = centers[cell_i]
                cj = centers[cell_j]
                f_norm = math.hypot(ci[0] - cj[0], ci[1] - cj[1]) / diagonal
                h_norm, m_norm = fixed[cell_j]
                intra = (
                    weights.lambda_f * f_norm
                    + weights.lambda_h * h_norm
                    + weights.lambda_m * m_norm
                )
                cost_term += (
                    relevance.score(app_i)
                    * relevance.score(app_j)
                    * transitions.get(app_i, app_j)
                    * intra
                )

    zone_area = zone.width * zone.height
    size_term = -sum(
        relevance.score(app_id) * areas[cell_index] / zone_area
        for app_id, cell_index in occupants
    )
    return cost_term + config.lambda_s * size_term


def grid_axes(zone: ZoneSpec, config: SizingConfig) -> tuple[list[float], list[float]]:
    """Grid values per split axis; a pinned axis contributes its single midpoint."""
    w_bounds, h_bounds = theta_bounds(
        zone.kind, zone.width, zone.height, config.omega_margin
    )
    if w_bounds is None:
        w_values = [zone.width / 2.0]
    else:
        w_values = [float(v) for v in np.linspace(w_bounds[0], w_bounds[1], config.grid_resolution)]
    if h_bounds is None:
        h_values = [zone.height / 2.0]
    else:
        h_values = [float(v) for v in np.linspace(h_bounds[0], h_bounds[1], config.grid_resolution)]
    return w_values, h_values


def optimize_zone(
    zone: ZoneSpec,
    assignment: "Assignment",
    relevance: "RelevanceSet",
    transitions: TransitionMatrix,
    weights: CostWeights,
    config: SizingConfig,
    pose: UserPose,
) -> SizingResult:
    """Grid-search the admissible split box for the objective minimum.

    Single-divider templates search one axis. Ties break to the smallest w0,
    then the smallest h0; a locked zone returns its current split, with the
    objective evaluated there for reference.
    """
    if zone.locked:
        value = zone_objective(
            zone, assignment, relevance, transitions, weights, config, zone.theta, pose
        )
        return SizingResult(
            zone_id=zone.id,
            theta_star=zone.theta,
            objective_value=value,
            evaluated_points=1,
            locked=True,
        )

    w_values, h_values = grid_axes(zone, config)
    best_value = math.inf
    best_theta = zone.theta
    evaluated = 0
    for w0 in w_values:
        for h0 in h_values:
            theta = ThetaParams(w0=w0, h0=h0)
            value = zone_objective(
                zone, assignment, relevance, transitions, weights, config, theta, pose
            )
            evaluated += 1
            if value < best_value:
                best_value = value
                best_theta = theta
    return SizingResult(
        zone_id=zone.id,
        theta_star=best_theta,
        objective_value=best_value,
        evaluated_points=evaluated,
    )


def _worst_readability_ratio(
    zone: ZoneSpec,
    occupants: list[tuple[str, int]],
    pose: UserPose,
    rules: ReadabilityRules,
) -> float:
    """Largest required/actual cell-dimension ratio over occupied cells."""
    worst = 1.0
    for app_id, cell_index in occupants:
        angle = rules.required_angle(app_id)
        if angle >= math.pi / 2.0:
            return math.inf
        cell = zone.cell(cell_index)
        center = world_cell_center(zone, cell_index)
        distance = float(np.linalg.norm(center - pose.position))
        required = distance * math.tan(angle)
        worst = max(worst, required / cell.width, required / cell.height)
    return worst


def _scale_for_cell(
    zone: ZoneSpec,
    cell_index: int,
    dimension: float,
    angle: float,
    pose: UserPose,
) -> float:
    """Smallest scale factor making one cell dimension readable.

    Scaling by s keeps the zone center fixed, so the cell center sits at
    p + s*offset and its viewing distance is sqrt(A + 2Bs + Cs^2). The
    constraint s*dim >= tan(angle)*d(s) is a quadratic in s with a closed
    form; math.inf marks a constraint no finite scale can satisfy.
    """
    if angle >= math.pi / 2.0:
        return math.inf
    t = math.tan(angle)
    offset = world_cell_center(zone, cell_index) - zone.position
    to_zone = zone.position - pose.position
    a_term = float(np.dot(to_zone, to_zone))
    b_term = float(np.dot(to_zone, offset))
    c_term = float(np.dot(offset, offset))
    lead = dimension * dimension - t * t * c_term
    if lead <= 0:
        # the requirement grows at least as fast as the cell; no finite fix
        return math.inf
    disc = t * t * b_term * b_term + lead * a_term
    s = (t * t * b_term + t * math.sqrt(disc)) / lead
    return max(1.0, s)


def readability_scaleup(
    zone: ZoneSpec,
    theta_star: ThetaParams,
    assignment: "Assignment",
    pose: UserPose,
    config: SizingConfig,
    rules: ReadabilityRules,
    base: SizingResult | None = None,
) -> SizingResult:
    """Scale the whole zone up if its smallest occupied cell is unreadable.

    Each occupied cell contributes a closed-form minimum scale per axis
    (scaling moves off-center cells slightly farther away, so the naive
    required/actual ratio alone would undershoot); the zone takes the largest
    of them. Factors above the configured maximum are clamped and flagged.
    Aspect ratios and split proportions are preserved throughout.
    """
    sized = replace(zone, theta=theta_star, cells=instantiate(zone.kind, zone.width, zone.height, theta_star))
    occupants_src = zone.occupants()
    for cell in sized.cells:
        cell.occupant = occupants_src.get(cell.index)
    occupants = _zone_occupants(sized, assignment)

    result = base or SizingResult(zone_id=zone.id, theta_star=theta_star)
    result = replace(result, zone_id=zone.id, theta_star=theta_star)
    if not occupants:
        return replace(result, scale_factor=1.0)

    factor = 1.0
    for app_id, cell_index in occupants:
        angle = rules.required_angle(app_id)
        cell = sized.cell(cell_index)
        for dimension in (cell.width, cell.height):
            factor = max(
                factor, _scale_for_cell(sized, cell_index, dimension, angle, pose)
            )

    clamped = False
    if factor > config.max_scale:
        factor = config.max_scale
        clamped = True
    else:
        final = sized if factor == 1.0 else scale_zone(sized, factor)
        clamped = _worst_readability_ratio(final, occupants, pose, rules) > 1.0 + 1e-9
    return replace(result, scale_factor=factor, scale_clamped=clamped)


def apply_sizing(zone: ZoneSpec, result: SizingResult) -> ZoneSpec:
    """Apply a sizing result: new split point, then the uniform scale-up."""
    sized = replace(
        zone,
        theta=result.theta_star,
        cells=instantiate(zone.kind, zone.width, zone.height, result.theta_star),
    )
    occupants = zone.occupants()
    for cell in sized.cells:
        cell.occupant = occupants.get(cell.index)
    if result.scale_factor != 1.0:
        sized = scale_zone(sized, result.scale_factor)
    return sized
