"""Interaction-cost signals, their normalization, and the placement cost matrix.

Three signals describe one app-to-app transition: pointing distance between
the involved cells, the head-turn angle to the transition target, and the
expected hand travel. Signals are min-max normalized over the candidate set
of one decision step, so every term lives in [0, 1] and uniform scaling of
the raw values never changes a decision.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from .errors import DomainError
from .geometry import UserPose, head_turn_angle
from .layout import ZoneSpec
from .telemetry import SignalStats, TransitionMatrix

if TYPE_CHECKING:
    from .recommender import RelevanceSet

# Telemetry-backed hand-travel estimates need this many samples before they
# replace the pointing-distance proxy.
MIN_HAND_SAMPLES = 10


@dataclass(frozen=True)
class CostWeights:
    """Weights for the three transition signals plus the sizing trade-off weight.

    The three signal weights must sum to 1; equal weights are the default.
    """

    lambda_f: float = 1.0 / 3.0
    lambda_h: float = 1.0 / 3.0
    lambda_m: float = 1.0 / 3.0
    lambda_s: float = 0.5

    def __post_init__(self):
        for value in (self.lambda_f, self.lambda_h, self.lambda_m, self.lambda_s):
            if value < 0:
                raise DomainError("cost weights must be non-negative")
        total = self.lambda_f + self.lambda_h + self.lambda_m
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"signal weights must sum to 1, got {total}")


@dataclass
class SignalBundle:
    """Raw and normalized signals for one directed cell-to-cell transition."""

    source: tuple[str, int]
    target: tuple[str, int]
    f_raw: float
    h_raw: float
    m_raw: float = 0.0
    f_norm: float = 0.0
    h_norm: float = 0.0
    m_norm: float = 0.0
    scope: str = "same_zone"  # same_zone | cross_zone

    def __post_init__(self):
        if self.scope not in ("same_zone", "cross_zone"):
            raise DomainError(f"unknown bundle scope {self.scope!r}")
        if min(self.f_raw, self.h_raw, self.m_raw) < 0:
            raise DomainError("raw signals must be non-negative")


@dataclass(frozen=True)
class CostMatrix:
    """Costs of hypothetically placing apps into cells, against prior occupants."""

    entries: dict[tuple[str, str, int], float]
    context: tuple[str, ...] = ()

    def best_cell(self, app_id: str) -> tuple[str, int] | None:
        """Lowest-cost cell for an app; ties break to the smallest (zone, cell)."""
        best: tuple[float, str, int] | None = None
        for (entry_app, zone_id, cell_index), value in self.entries.items():
            if entry_app != app_id:
                continue
            key = (value, zone_id, cell_index)
            if best is None or key < best:
                best = key
        if best is None:
            return None
        return best[1], best[2]


def world_cell_center(zone: ZoneSpec, cell_index: int) -> np.ndarray:
    """World position of a cell center (zone-local y points down)."""
    cell = zone.cell(cell_index)
    cx, cy = cell.center
    right = zone.orientation.right
    up = zone.orientation.up
    return (
        zone.position
        + right * (cx - zone.width / 2.0)
        + up * (zone.height / 2.0 - cy)
    )


def pointing_distance(
    zone_a: ZoneSpec, cell_a: int, zone_b: ZoneSpec, cell_b: int
) -> float:
    """Pointing distance between two cells.

    Within one zone this is the distance between cell centers; across zones
    it is the distance between the zone centers, regardless of the cells.
    """
    if zone_a.id == zone_b.id:
        a = world_cell_center(zone_a, cell_a)
        b = world_cell_center(zone_a, cell_b)
        return float(np.linalg.norm(a - b))
    return float(np.linalg.norm(zone_a.position - zone_b.position))


def build_bundle(
    zone_a: ZoneSpec,
    cell_a: int,
    zone_b: ZoneSpec,
    cell_b: int,
    pose: UserPose,
    signal_scale: float = 1.0,
) -> SignalBundle:
    """Raw signals for the directed transition (zone_a, cell_a) -> (zone_b, cell_b).

    The head-turn signal always refers to the transition target. Hand travel
    defaults to the pointing-distance proxy; telemetry-backed estimates are
    substituted during normalization when enough samples exist.
    """
    f_raw = pointing_distance(zone_a, cell_a, zone_b, cell_b) * signal_scale
    h_raw = head_turn_angle(pose, world_cell_center(zone_b, cell_b)) * signal_scale
    scope = "same_zone" if zone_a.id == zone_b.id else "cross_zone"
    return SignalBundle(
        source=(zone_a.id, cell_a),
        target=(zone_b.id, cell_b),
        f_raw=f_raw,
        h_raw=h_raw,
        m_raw=f_raw,
        scope=scope,
    )


def _minmax(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0] * len(values)
    span = hi - lo
    return [(v - lo) / span for v in values]


def normalize_signals(
    candidates: list[SignalBundle], stats: SignalStats | None = None
) -> list[SignalBundle]:
    """Min-max normalize each signal over one decision's candidate bundles.

    A constant signal normalizes to 0 for every candidate. Without enough
    telemetry, the normalized hand-travel signal equals the normalized
    pointing distance; with MIN_HAND_SAMPLES or more samples the raw hand
    travel is rescaled from the empirical mean before normalization.
    """
    if not candidates:
        raise DomainError("cannot normalize an empty candidate set")
    f_raws = [b.f_raw for b in candidates]
    h_raws = [b.h_raw for b in candidates]
    f_norms = _minmax(f_raws)
    h_norms = _minmax(h_raws)

    mean_f = sum(f_raws) / len(f_raws)
    use_stats = (
        stats is not None and stats.samples >= MIN_HAND_SAMPLES and mean_f > 0
    )
    if use_stats:
        m_raws = [stats.mean_hand_travel * f / mean_f for f in f_raws]
        m_norms = _minmax(m_raws)
    else:
        m_raws = f_raws
        m_norms = f_norms

    return [
        replace(
            bundle,
            m_raw=m_raw,
            f_norm=f_norm,
            h_norm=h_norm,
            m_norm=m_norm,
        )
        for bundle, m_raw, f_norm, h_norm, m_norm in zip(
            candidates, m_raws, f_norms, h_norms, m_norms
        )
    ]


def instantaneous_cost(bundle: SignalBundle, weights: CostWeights) -> float:
    """Weighted sum of the normalized signals; in [0, 1] for normalized weights."""
    return (
        weights.lambda_f * bundle.f_norm
        + weights.lambda_h * bundle.h_norm
        + weights.lambda_m * bundle.m_norm
    )


def empty_cells(zones: Iterable[ZoneSpec]) -> list[tuple[str, int]]:
    """(zone id, cell index) for every unoccupied cell, in layout order."""
    result = []
    for zone in zones:
        for cell in zone.cells:
            if cell.occupant is None:
                result.append((zone.id, cell.index))
    return result


def _zone_map(zones: Iterable[ZoneSpec]) -> dict[str, ZoneSpec]:
    return {zone.id: zone for zone in zones}


def cost_matrix(
    app_id: str,
    relevance: "RelevanceSet",
    prev: Mapping[str, tuple[str, int]],
    transitions: TransitionMatrix,
    zones: list[ZoneSpec],
    pose: UserPose,
    weights: CostWeights,
    stats: SignalStats | None = None,
    signal_scale: float = 1.0,
) -> CostMatrix:
    """Cost of placing ``app_id`` into each empty cell, against prior occupants.

    For every candidate cell the cost sums, over each previously assigned app,
    the joint-relevance- and transition-frequency-weighted instantaneous costs
    of both transition directions. An empty prior set yields all-zero entries.
    """
    zone_by_id = _zone_map(zones)
    candidates = empty_cells(zones)
    occupied = set(prev.values())
    candidates = [c for c in candidates if c not in occupied]

    entries: dict[tuple[str, str, int], float] = {
        (app_id, zone_id, cell_index): 0.0 for zone_id, cell_index in candidates
    }
    if not prev or not candidates:
        return CostMatrix(entries=entries, context=tuple(sorted(prev)))

    bundles: list[SignalBundle] = []
    bundle_keys: list[tuple[str, int, str, str, int]] = []
    for zone_id, cell_index in candidates:
        candidate_zone = zone_by_id[zone_id]
        for other_app, (other_zone_id, other_cell) in prev.items():
            other_zone = zone_by_id[other_zone_id]
            bundles.append(
                build_bundle(
                    candidate_zone, cell_index, other_zone, other_cell, pose,
                    signal_scale,
                )
            )
            bundle_keys.append((zone_id, cell_index, other_app, "out", other_zone_id))
            bundles.append(
                build_bundle(
                    other_zone, other_cell, candidate_zone, cell_index, pose,
                    signal_scale,
                )
            )
            bundle_keys.append((zone_id, cell_index, other_app, "in", other_zone_id))

    normalized = normalize_signals(bundles, stats)
    costs = {
        key: instantaneous_cost(bundle, weights)
        for key, bundle in zip(bundle_keys, normalized)
    }

    r_i = relevance.score(app_id)
    for zone_id, cell_index in candidates:
        total = 0.0
        for other_app in prev:
            r_other = relevance.score(other_app)
            joint = r_i * r_other
            total += joint * transitions.get(app_id, other_app) * costs[
                (zone_id, cell_index, other_app, "out", prev[other_app][0])
            ]
            total += joint * transitions.get(other_app, app_id) * costs[
                (zone_id, cell_index, other_app, "in", prev[other_app][0])
            ]
        entries[(app_id, zone_id, cell_index)] = total
    return CostMatrix(entries=entries, context=tuple(sorted(prev)))


def pair_cost_table(
    zones: list[ZoneSpec],
    pose: UserPose,
    weights: CostWeights,
    stats: SignalStats | None = None,
    signal_scale: float = 1.0,
) -> dict[tuple[str, int, str, int], float]:
    """Instantaneous cost for every ordered pair of distinct cells.

    One normalization basis covers all pairs, so costs of different placements
    are directly comparable; this is the objective backbone shared by the
    order-free total cost and the exhaustive engine.
    """
    all_cells = [(zone.id, cell.index) for zone in zones for cell in zone.cells]
    zone_by_id = _zone_map(zones)
    bundles = []
    keys = []
    for src in all_cells:
        for dst in all_cells:
            if src == dst:
                continue
            bundles.append(
                build_bundle(
                    zone_by_id[src[0]], src[1], zone_by_id[dst[0]], dst[1], pose,
                    signal_scale,
                )
            )
            keys.append((src[0], src[1], dst[0], dst[1]))
    if not bundles:
        return {}
    normalized = normalize_signals(bundles, stats)
    return {
        key: instantaneous_cost(bundle, weights)
        for key, bundle in zip(keys, normalized)
    }


def total_cost(
    placed: Mapping[str, tuple[str, int]],
    pinned: Mapping[str, tuple[str, int]],
    relevance: "RelevanceSet",
    transitions: TransitionMatrix,
    zones: list[ZoneSpec],
    pose: UserPose,
    weights: CostWeights,
    stats: SignalStats | None = None,
    signal_scale: float = 1.0,
    pair_costs: dict[tuple[str, int, str, int], float] | None = None,
) -> float:
    """Order-free total assignment cost: sum of each placed app's cell cost.

    Each app's context is every other placed app plus the pinned occupants,
    with both transition directions counted as in the per-app cost matrix.
    """
    if pair_costs is None:
        pair_costs = pair_cost_table(zones, pose, weights, stats, signal_scale)
    total = 0.0
    for app_id, cell in placed.items():
        r_i = relevance.score(app_id)
        for other_app, other_cell in list(placed.items()) + list(pinned.items()):
            if other_app == app_id:
                continue
            joint = r_i * relevance.score(other_app)
            total += joint * transitions.get(app_id, other_app) * pair_costs[
                (cell[0], cell[1], other_cell[0], other_cell[1])
            ]
            total += joint * transitions.get(other_app, app_id) * pair_costs[
                (other_cell[0], other_cell[1], cell[0], cell[1])
            ]
    return total
