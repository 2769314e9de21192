"""Application-to-cell assignment: greedy, exhaustive-oracle, and LLM engines.

The greedy engine realizes the sequential reading of the cost matrix: apps
commit one at a time in descending relevance, each taking its cheapest empty
cell. The exhaustive engine is the ground-truth oracle; it minimizes the
order-free total cost over every injective placement and is therefore an
upper bound on nothing and a lower bound on everything, including greedy.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .costmodel import (
    CostWeights,
    cost_matrix,
    empty_cells,
    pair_cost_table,
    total_cost,
)
from .errors import InstanceTooLargeError, ProviderError
from .geometry import UserPose, angular_size
from .layout import ZoneSpec
from .recommender import Provider, ReadabilityRules, RelevanceSet
from .telemetry import SignalStats, TransitionMatrix

logger = logging.getLogger(__name__)

EXHAUSTIVE_BUDGET = 10_000_000
_PERM_CHUNK = 20_000


class Provenance(str, Enum):
    AI_PROPOSED = "ai_proposed"
    USER_PINNED = "user_pinned"
    USER_OVERRIDDEN = "user_overridden"


@dataclass
class Assignment:
    """An app-to-cell map with per-entry provenance and capacity overflow."""

    entries: dict[str, tuple[str, int]] = field(default_factory=dict)
    provenance: dict[str, Provenance] = field(default_factory=dict)
    unassigned: list[str] = field(default_factory=list)

    def cells_used(self) -> set[tuple[str, int]]:
        return set(self.entries.values())

    def merged_with(self, other: "Assignment") -> "Assignment":
        merged = Assignment(
            entries={**self.entries, **other.entries},
            provenance={**self.provenance, **other.provenance},
            unassigned=[*self.unassigned, *other.unassigned],
        )
        return merged


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    detail: str


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def feasible(self) -> bool:
        return not self.violations


def check_feasibility(
    assignment: Assignment,
    zones: list[ZoneSpec],
    pose: UserPose,
    readability: ReadabilityRules | None = None,
) -> FeasibilityReport:
    """Report every violated placement rule.

    Structural rules: no two apps in one cell, referenced cells exist, zone
    occupancy within cell count, split points inside the zone. When
    readability rules are supplied, each occupied cell must subtend at least
    the per-app minimum angle from the user's viewpoint; pass None at
    assignment time if the conditional scale-up runs later.
    """
    from .costmodel import world_cell_center  # local import to avoid cycles

    violations: list[Violation] = []
    zone_by_id = {zone.id: zone for zone in zones}

    seen_cells: dict[tuple[str, int], str] = {}
    per_zone_count: dict[str, int] = {}
    for app_id, (zone_id, cell_index) in assignment.entries.items():
        zone = zone_by_id.get(zone_id)
        if zone is None:
            violations.append(Violation("unknown_zone", app_id, f"zone {zone_id!r}"))
            continue
        if not any(c.index == cell_index for c in zone.cells):
            violations.append(
                Violation("unknown_cell", app_id, f"{zone_id}:{cell_index}")
            )
            continue
        key = (zone_id, cell_index)
        if key in seen_cells:
            violations.append(
                Violation(
                    "duplicate_cell",
                    app_id,
                    f"cell {zone_id}:{cell_index} also assigned to {seen_cells[key]}",
                )
            )
        seen_cells[key] = app_id
        per_zone_count[zone_id] = per_zone_count.get(zone_id, 0) + 1

    for zone_id, count in per_zone_count.items():
        capacity = len(zone_by_id[zone_id].cells)
        if count > capacity:
            violations.append(
                Violation("over_capacity", zone_id, f"{count} apps for {capacity} cells")
            )

    for zone in zones:
        w0, h0 = zone.theta.w0, zone.theta.h0
        if not (0 < w0 < zone.width) or not (0 < h0 < zone.height):
            violations.append(
                Violation("theta_outside_zone", zone.id, f"theta=({w0},{h0})")
            )

    if readability is not None:
        for app_id, (zone_id, cell_index) in assignment.entries.items():
            zone = zone_by_id.get(zone_id)
            if zone is None or not any(c.index == cell_index for c in zone.cells):
                continue
            cell = zone.cell(cell_index)
            center = world_cell_center(zone, cell_index)
            distance = float(np.linalg.norm(center - pose.position))
            az, el = angular_size(cell.width, cell.height, distance)
            if min(az, el) < readability.required_angle(app_id):
                violations.append(
                    Violation(
                        "readability",
                        app_id,
                        f"cell {zone_id}:{cell_index} subtends "
                        f"{math.degrees(min(az, el)):.2f} deg, needs "
                        f"{math.degrees(readability.required_angle(app_id)):.2f} deg",
                    )
                )
    return FeasibilityReport(violations=tuple(violations))


def _placement_order(relevance: RelevanceSet, pinned: Assignment) -> list[str]:
    """Apps to place: descending relevance, catalog order on ties, pinned skipped."""
    candidates = [
        (app_id, score)
        for app_id, score in relevance.entries
        if app_id not in pinned.entries
    ]
    candidates.sort(key=lambda entry: -entry[1])  # stable: catalog order on ties
    return [app_id for app_id, _ in candidates]


def greedy_assign(
    relevance: RelevanceSet,
    zones: list[ZoneSpec],
    pinned: Assignment,
    transitions: TransitionMatrix,
    weights: CostWeights,
    pose: UserPose,
    stats: SignalStats | None = None,
    signal_scale: float = 1.0,
) -> Assignment:
    """Place apps one at a time, each taking its currently cheapest empty cell.

    The committed context grows as placements land, so later apps see earlier
    ones. Cost ties break to the lowest (zone id, cell index); apps beyond
    cell capacity end up unassigned.
    """
    order = _placement_order(relevance, pinned)
    committed: dict[str, tuple[str, int]] = dict(pinned.entries)
    result = Assignment()
    for app_id in order:
        matrix = cost_matrix(
            app_id, relevance, committed, transitions, zones, pose, weights,
            stats, signal_scale,
        )
        choice = matrix.best_cell(app_id)
        if choice is None:
            result.unassigned.append(app_id)
            continue
        committed[app_id] = choice
        result.entries[app_id] = choice
        result.provenance[app_id] = Provenance.AI_PROPOSED
    return result


def exhaustive_assign(
    relevance: RelevanceSet,
    zones: list[ZoneSpec],
    pinned: Assignment,
    transitions: TransitionMatrix,
    weights: CostWeights,
    pose: UserPose,
    stats: SignalStats | None = None,
    signal_scale: float = 1.0,
) -> Assignment:
    """Minimize the order-free total cost over every injective placement.

    When apps outnumber cells, the top apps by relevance (the same set greedy
    places) compete for the cells. Ties break to the lexicographically
    smallest (zone id, cell index) tuple sequence in placement order, which
    is the first optimum found when cells are enumerated in sorted order.
    Instances above the evaluation budget are refused outright.
    """
    order = _placement_order(relevance, pinned)
    free = sorted(set(empty_cells(zones)) - pinned.cells_used())
    n_place = min(len(order), len(free))
    placed_apps = order[:n_place]
    overflow = order[n_place:]

    result = Assignment(unassigned=list(overflow))
    if n_place == 0:
        return result

    evaluations = math.perm(len(free), n_place)
    if evaluations > EXHAUSTIVE_BUDGET:
        raise InstanceTooLargeError(
            f"{evaluations} placements exceed the budget of {EXHAUSTIVE_BUDGET}"
        )

    pair_costs = pair_cost_table(zones, pose, weights, stats, signal_scale)
    cell_list = free
    cell_index = {cell: i for i, cell in enumerate(cell_list)}
    pinned_cells = list(pinned.entries.items())

    # Q[a, b]: instantaneous cost from free cell a to free cell b.
    m = len(cell_list)
    q = np.zeros((m, m))
    for a, cell_a in enumerate(cell_list):
        for b, cell_b in enumerate(cell_list):
            if a != b:
                q[a, b] = pair_costs[(cell_a[0], cell_a[1], cell_b[0], cell_b[1])]

    # W[i, l]: joint relevance times transition frequency, app i -> app l.
    n = n_place
    r = np.array([relevance.score(app) for app in placed_apps])
    w = np.zeros((n, n))
    for i, app_i in enumerate(placed_apps):
        for l, app_l in enumerate(placed_apps):
            if i != l:
                w[i, l] = r[i] * r[l] * transitions.get(app_i, app_l)

    # B[i, a]: both-direction cost of app i in free cell a against pinned apps.
    b = np.zeros((n, m))
    for i, app_i in enumerate(placed_apps):
        for a, cell_a in enumerate(cell_list):
            acc = 0.0
            for pinned_app, pinned_cell in pinned_cells:
                joint = r[i] * relevance.score(pinned_app)
                acc += joint * transitions.get(app_i, pinned_app) * pair_costs[
                    (cell_a[0], cell_a[1], pinned_cell[0], pinned_cell[1])
                ]
                acc += joint * transitions.get(pinned_app, app_i) * pair_costs[
                    (pinned_cell[0], pinned_cell[1], cell_a[0], cell_a[1])
                ]
            b[i, a] = acc

    best_cost = math.inf
    best_perm: tuple[int, ...] | None = None
    perm_iter = itertools.permutations(range(m), n)
    while True:
        chunk = list(itertools.islice(perm_iter, _PERM_CHUNK))
        if not chunk:
            break
        perms = np.array(chunk, dtype=np.intp)
        gathered = q[perms[:, :, None], perms[:, None, :]]
        costs = 2.0 * np.einsum("pij,ij->p", gathered, w)
        costs += b[np.arange(n)[None, :], perms].sum(axis=1)
        idx = int(np.argmin(costs))
        if costs[idx] < best_cost:
            best_cost = float(costs[idx])
            best_perm = chunk[idx]

    assert best_perm is not None
    for app_id, cell_idx in zip(placed_apps, best_perm):
        result.entries[app_id] = cell_list[cell_idx]
        result.provenance[app_id] = Provenance.AI_PROPOSED
    return result


def assignment_cost(
    assignment: Assignment,
    relevance: RelevanceSet,
    zones: list[ZoneSpec],
    pinned: Assignment,
    transitions: TransitionMatrix,
    weights: CostWeights,
    pose: UserPose,
    stats: SignalStats | None = None,
    signal_scale: float = 1.0,
) -> float:
    """Order-free total cost of an assignment, comparable across engines."""
    return total_cost(
        assignment.entries,
        pinned.entries,
        relevance,
        transitions,
        zones,
        pose,
        weights,
        stats,
        signal_scale,
    )


@dataclass(frozen=True)
class LlmAssignOutcome:
    """The repaired assignment plus what happened on the way to it."""

    assignment: Assignment
    fallback: bool = False
    dropped: tuple[str, ...] = ()


def llm_assign(
    payload: str,
    provider: Provider,
    relevance: RelevanceSet,
    zones: list[ZoneSpec],
    pinned: Assignment,
    transitions: TransitionMatrix,
    weights: CostWeights,
    pose: UserPose,
    stats: SignalStats | None = None,
) -> LlmAssignOutcome:
    """Parse the provider's app-to-cell map, repair it, and backfill gaps.

    Structurally infeasible entries (duplicate or unknown cells, occupied
    cells, apps outside the relevance set) are dropped, then greedy placement
    fills any dropped or missing apps. Provider failure falls back to a full
    greedy assignment, flagged.
    """
    try:
        raw = provider.complete(payload)
        parsed = json.loads(raw)
        if not isinstance(parsed, dict):
            raise ProviderError("assignment response is not an object")
    except (ProviderError, json.JSONDecodeError) as exc:
        logger.warning("assignment provider failed (%s); greedy fallback", exc)
        assignment = greedy_assign(
            relevance, zones, pinned, transitions, weights, pose, stats
        )
        return LlmAssignOutcome(assignment=assignment, fallback=True)

    zone_by_id = {zone.id: zone for zone in zones}
    known_apps = set(relevance.apps())
    free = set(empty_cells(zones)) - pinned.cells_used()

    accepted = Assignment()
    dropped: list[str] = []
    for app_id in sorted(parsed):
        target = parsed[app_id]
        if app_id not in known_apps or app_id in pinned.entries:
            dropped.append(app_id)
            continue
        if (
            not isinstance(target, (list, tuple))
            or len(target) != 2
            or target[0] not in zone_by_id
        ):
            dropped.append(app_id)
            continue
        cell_key = (str(target[0]), int(target[1]))
        if cell_key not in free:
            dropped.append(app_id)
            continue
        free.discard(cell_key)
        accepted.entries[app_id] = cell_key
        accepted.provenance[app_id] = Provenance.AI_PROPOSED

    missing = [
        app_id
        for app_id, _ in relevance.entries
        if app_id not in accepted.entries and app_id not in pinned.entries
    ]
    if missing:
        remaining = RelevanceSet(
            entries=tuple(
                (app_id, score)
                for app_id, score in relevance.entries
                if app_id in missing
            ),
            goal=relevance.goal,
            fallback=relevance.fallback,
        )
        context = Assignment(
            entries={**pinned.entries, **accepted.entries},
            provenance={**pinned.provenance, **accepted.provenance},
        )
        backfill = greedy_assign(
            remaining, zones, context, transitions, weights, pose, stats
        )
        accepted = accepted.merged_with(backfill)
    return LlmAssignOutcome(
        assignment=accepted, fallback=False, dropped=tuple(dropped)
    )
