"""The mixed-initiative session state machine.

Every operation takes a state and returns a new one (or raises, leaving the
input untouched); the revision counter increases on every mutation. A
recommendation never changes committed state: it parks a proposal on the
workspace, and only resolving the proposal hosts windows or resizes zones.
Windows never overlap an occlusion footprint in any reachable state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .assignment import (
    Assignment,
    LlmAssignOutcome,
    Provenance,
    exhaustive_assign,
    greedy_assign,
    llm_assign,
)
from .costmodel import CostMatrix, CostWeights, cost_matrix
from .errors import (
    DomainError,
    IntrusionError,
    OccupiedCellError,
    PendingProposalError,
    UnresolvableIntrusionError,
    ValidationError,
)
from .geometry import UserPose, face_user_orientation, rect_footprint, rotate_bearing
from .layout import (
    Cell,
    KnobResult,
    TemplateKind,
    ThetaParams,
    ZoneSpec,
    clear_bearing_shift,
    create_zone as build_zone,
    angular_footprint,
    move_inner_knob,
    move_outer_knob,
    occlusion_conflicts,
    resolve_intrusion,
)
from .recommender import (
    AppDescriptor,
    Goal,
    Provider,
    ReadabilityRules,
    RelevanceSet,
    build_stage1_prompt,
    predict_relevance,
)
from .sizing import SizingConfig, SizingResult, apply_sizing, optimize_zone, readability_scaleup
from .telemetry import InteractionEvent, estimate_transitions, hand_stats


@dataclass(frozen=True)
class WindowInstance:
    """A window either floating freely (with its own rect) or hosted in a cell."""

    app_id: str
    position: tuple[float, float, float] | None = None
    width: float | None = None
    height: float | None = None
    host: tuple[str, int] | None = None

    def __post_init__(self):
        free = self.position is not None
        if free == (self.host is not None):
            raise DomainError("window must be either free or hosted, not both")
        if free and (self.width is None or self.height is None):
            raise DomainError("free windows need explicit dimensions")


@dataclass(frozen=True)
class Proposal:
    """A parked recommendation awaiting per-cell confirmation."""

    id: str
    goal: Goal
    status: str  # pending | ready | failed
    relevance: RelevanceSet | None = None
    assignment: Assignment | None = None
    sizing: tuple[SizingResult, ...] = ()
    cost: CostMatrix | None = None
    total_cost: float = 0.0
    fallback: bool = False
    dropped: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()
    error: str | None = None


@dataclass(frozen=True)
class AcceptanceRecord:
    """Per-cell confirmation outcomes plus the session counters."""

    proposal_id: str
    decisions: dict[str, str]
    proposed: int
    accepted: int
    declined: int
    overridden: int
    layouts_adjusted: int
    reorderings: int

    def __post_init__(self):
        if self.accepted + self.declined + self.overridden != self.proposed:
            raise DomainError("acceptance counters do not reconcile")


@dataclass(frozen=True)
class WorkspaceState:
    """Immutable snapshot of one workspace session."""

    id: str
    pose: UserPose
    zones: tuple[ZoneSpec, ...] = ()
    occlusions: tuple[ZoneSpec, ...] = ()
    windows: tuple[WindowInstance, ...] = ()
    pending: Proposal | None = None
    events: tuple[InteractionEvent, ...] = ()
    revision: int = 0

    def zone(self, zone_id: str) -> ZoneSpec:
        for zone in self.zones:
            if zone.id == zone_id:
                return zone
        raise DomainError(f"no zone {zone_id!r}")

    def window(self, app_id: str) -> WindowInstance | None:
        for window in self.windows:
            if window.app_id == app_id:
                return window
        return None

    def hosted(self) -> dict[str, tuple[str, int]]:
        return {w.app_id: w.host for w in self.windows if w.host is not None}


def _clone_zone(zone: ZoneSpec) -> ZoneSpec:
    return replace(
        zone,
        position=np.array(zone.position, dtype=float),
        cells=[replace(cell) for cell in zone.cells],
    )


def _bump(state: WorkspaceState, **changes) -> WorkspaceState:
    return replace(state, revision=state.revision + 1, **changes)


def _all_ids(state: WorkspaceState) -> set[str]:
    return {z.id for z in state.zones} | {o.id for o in state.occlusions}


def _cell_footprint(zone: ZoneSpec, cell: Cell, pose: UserPose):
    cx, cy = cell.center
    center = (
        zone.position
        + zone.orientation.right * (cx - zone.width / 2.0)
        + zone.orientation.up * (zone.height / 2.0 - cy)
    )
    return rect_footprint(center, zone.orientation, cell.width, cell.height, pose)


def _free_window_footprint(window: WindowInstance, pose: UserPose):
    orientation = face_user_orientation(np.asarray(window.position), pose)
    return rect_footprint(
        np.asarray(window.position), orientation, window.width, window.height, pose
    )


def _window_footprints(state: WorkspaceState, zones=None):
    """Angular footprints of every window: hosted cells plus free rects.

    This is the exact set the occlusion-safety invariant quantifies over;
    zone-level footprints are not a safe proxy because wrapped behind-user
    intervals of a cell can exceed its zone's.
    """
    zones = state.zones if zones is None else zones
    zone_by_id = {zone.id: zone for zone in zones}
    footprints = []
    for window in state.windows:
        if window.host is not None:
            zone = zone_by_id[window.host[0]]
            footprints.append(_cell_footprint(zone, zone.cell(window.host[1]), state.pose))
        else:
            footprints.append(_free_window_footprint(window, state.pose))
    return footprints


def _occupied_cells_clear(
    zone: ZoneSpec, state: WorkspaceState, occlusions=None
) -> bool:
    """Every occupied cell of this zone is clear of every occlusion footprint."""
    occlusions = state.occlusions if occlusions is None else occlusions
    occ_fps = [angular_footprint(occ, state.pose) for occ in occlusions]
    if not occ_fps:
        return True
    for cell in zone.cells:
        if cell.occupant is None:
            continue
        fp = _cell_footprint(zone, cell, state.pose)
        if any(fp.overlaps(occ_fp) for occ_fp in occ_fps):
            return False
    return True


def create_workspace(workspace_id: str, pose: UserPose) -> WorkspaceState:
    return WorkspaceState(id=workspace_id, pose=pose)


def add_zone(
    state: WorkspaceState,
    zone_id: str,
    kind: TemplateKind,
    width: float,
    height: float,
    position,
    theta: ThetaParams | None = None,
    locked: bool = False,
) -> WorkspaceState:
    """Create a zone facing the user; a drop onto an occlusion shifts it aside."""
    if kind is TemplateKind.OCCLUSION_FREE:
        raise DomainError("use add_occlusion for occlusion-free regions")
    if zone_id in _all_ids(state):
        raise ValidationError(f"id {zone_id!r} already exists")
    zone = build_zone(zone_id, kind, width, height, position, state.pose, theta, locked)
    zone = resolve_intrusion(zone, list(state.occlusions), state.pose)
    return _bump(state, zones=state.zones + (zone,))


def add_occlusion(
    state: WorkspaceState, occlusion_id: str, width: float, height: float, position
) -> WorkspaceState:
    """Create an occlusion-free region.

    Overlapping another occlusion is rejected outright; overlapping a zone
    that hosts windows shifts the new occlusion aside instead, since the
    thing being dropped is the thing that moves.
    """
    if occlusion_id in _all_ids(state):
        raise ValidationError(f"id {occlusion_id!r} already exists")
    occ = build_zone(
        occlusion_id, TemplateKind.OCCLUSION_FREE, width, height, position, state.pose
    )
    footprint = angular_footprint(occ, state.pose)
    for existing in state.occlusions:
        if footprint.overlaps(angular_footprint(existing, state.pose)):
            raise ValidationError(
                f"occlusion {occlusion_id!r} would overlap {existing.id!r}"
            )
    obstacles = _window_footprints(state)
    delta = clear_bearing_shift(footprint, obstacles)
    if delta != 0.0:
        new_position = rotate_bearing(state.pose, occ.position, delta)
        occ = replace(
            occ,
            position=new_position,
            orientation=face_user_orientation(new_position, state.pose),
        )
        footprint = angular_footprint(occ, state.pose)
        for existing in state.occlusions:
            if footprint.overlaps(angular_footprint(existing, state.pose)):
                raise ValidationError(
                    f"occlusion {occlusion_id!r} shifts onto {existing.id!r}"
                )
        # bearing shifts reason on numeric intervals; the recomputed wrapped
        # footprint must be re-verified against the windows it had to clear
        if any(footprint.overlaps(fp) for fp in _window_footprints(state)):
            raise IntrusionError(
                f"occlusion {occlusion_id!r} cannot clear the occupied layout"
            )
    return _bump(state, occlusions=state.occlusions + (occ,))


def _settle_free_window(
    state: WorkspaceState, window: WindowInstance
) -> WindowInstance:
    """Shift a free window along its bearing until clear of every occlusion.

    The shifted placement is re-verified on the recomputed footprint; wrapped
    behind-user intervals can defeat the interval arithmetic, in which case
    the drop is refused rather than left overlapping.
    """
    obstacles = [angular_footprint(occ, state.pose) for occ in state.occlusions]
    if not obstacles:
        return window
    fp = _free_window_footprint(window, state.pose)
    delta = clear_bearing_shift(fp, obstacles)
    if delta != 0.0:
        shifted = rotate_bearing(state.pose, np.asarray(window.position), delta)
        window = replace(window, position=tuple(float(v) for v in shifted))
        fp = _free_window_footprint(window, state.pose)
    if any(fp.overlaps(obs) for obs in obstacles):
        raise IntrusionError(
            f"window {window.app_id!r} cannot clear the occlusion-free regions"
        )
    return window


def delete_zone(state: WorkspaceState, zone_id: str) -> WorkspaceState:
    """Remove a zone; hosted windows float free at their former cell rects."""
    zone = state.zone(zone_id)
    freed = []
    for window in state.windows:
        if window.host is not None and window.host[0] == zone_id:
            cell = zone.cell(window.host[1])
            cx, cy = cell.center
            center = (
                zone.position
                + zone.orientation.right * (cx - zone.width / 2.0)
                + zone.orientation.up * (zone.height / 2.0 - cy)
            )
            freed.append(
                _settle_free_window(
                    state,
                    WindowInstance(
                        app_id=window.app_id,
                        position=tuple(float(v) for v in center),
                        width=cell.width,
                        height=cell.height,
                    ),
                )
            )
        else:
            freed.append(window)
    return _bump(
        state,
        zones=tuple(z for z in state.zones if z.id != zone_id),
        windows=tuple(freed),
    )


def translate_zone(state: WorkspaceState, zone_id: str, new_position) -> WorkspaceState:
    """Move a zone (and its windows) to a new position, still facing the user."""
    zone = state.zone(zone_id)
    position = np.asarray(new_position, dtype=float)
    moved = replace(
        _clone_zone(zone),
        position=position,
        orientation=face_user_orientation(position, state.pose),
    )
    moved = resolve_intrusion(moved, list(state.occlusions), state.pose)
    if not _occupied_cells_clear(moved, state):
        raise IntrusionError(
            f"zone {zone_id!r} cannot move there without covering an "
            "occlusion-free region"
        )
    zones = tuple(moved if z.id == zone_id else z for z in state.zones)
    return _bump(state, zones=zones)


def _zone_hosts_windows(state: WorkspaceState, zone_id: str) -> bool:
    return any(host[0] == zone_id for host in state.hosted().values())


def knob_inner(
    state: WorkspaceState, zone_id: str, axis: str, value: float
) -> tuple[WorkspaceState, bool]:
    """Move an inner knob; returns the new state and the clamp flag."""
    zone = state.zone(zone_id)
    result: KnobResult = move_inner_knob(_clone_zone(zone), axis, value)
    if not _occupied_cells_clear(result.zone, state):
        raise IntrusionError(
            f"moving the divider of {zone_id!r} would push a window over an "
            "occlusion-free region"
        )
    zones = tuple(result.zone if z.id == zone_id else z for z in state.zones)
    return _bump(state, zones=zones), result.clamped


def knob_outer(
    state: WorkspaceState, zone_id: str, new_width: float, new_height: float
) -> WorkspaceState:
    """Resize a zone; growth that would push hosted windows over an occlusion fails."""
    zone = state.zone(zone_id)
    resized = move_outer_knob(_clone_zone(zone), new_width, new_height)
    if _zone_hosts_windows(state, zone_id):
        if occlusion_conflicts(
            [resized], list(state.occlusions), state.pose
        ) or not _occupied_cells_clear(resized, state):
            raise IntrusionError(
                f"resizing {zone_id!r} would cover an occlusion-free region"
            )
    zones = tuple(resized if z.id == zone_id else z for z in state.zones)
    return _bump(state, zones=zones)


def drag_window_in(
    state: WorkspaceState, app_id: str, zone_id: str, cell_index: int
) -> WorkspaceState:
    """Snap a window into a cell: it adopts the cell rect and zone orientation."""
    for occ in state.occlusions:
        if occ.id == zone_id:
            raise IntrusionError("cannot drop a window into an occlusion-free region")
    zone = state.zone(zone_id)
    cell = zone.cell(cell_index)
    if cell.occupant is not None:
        raise OccupiedCellError(f"cell {zone_id}:{cell_index} holds {cell.occupant!r}")
    fp = _cell_footprint(zone, cell, state.pose)
    for occ in state.occlusions:
        if fp.overlaps(angular_footprint(occ, state.pose)):
            raise IntrusionError(
                f"cell {zone_id}:{cell_index} overlaps occlusion {occ.id!r}"
            )

    windows = []
    moved = False
    zones = [
        _clone_zone(z) if z.id == zone_id else z for z in state.zones
    ]
    for window in state.windows:
        if window.app_id == app_id:
            if window.host is not None:
                # moving out of another cell frees it
                old_zone_id, old_cell = window.host
                zones = [
                    _clone_zone(z) if z.id == old_zone_id and z.id != zone_id else z
                    for z in zones
                ]
                for z in zones:
                    if z.id == old_zone_id:
                        z.cell(old_cell).occupant = None
            windows.append(WindowInstance(app_id=app_id, host=(zone_id, cell_index)))
            moved = True
        else:
            windows.append(window)
    if not moved:
        windows.append(WindowInstance(app_id=app_id, host=(zone_id, cell_index)))
    for z in zones:
        if z.id == zone_id:
            z.cell(cell_index).occupant = app_id
    return _bump(state, zones=tuple(zones), windows=tuple(windows))


def drag_window_out(
    state: WorkspaceState, app_id: str, target_position
) -> WorkspaceState:
    """Decouple a window from its cell; size and orientation carry over.

    A drop spot overlapping an occlusion-free region moves the window to the
    side along its bearing.
    """
    window = state.window(app_id)
    if window is None or window.host is None:
        raise DomainError(f"window {app_id!r} is not hosted in any cell")
    zone_id, cell_index = window.host
    zone = state.zone(zone_id)
    cell = zone.cell(cell_index)

    position = np.asarray(target_position, dtype=float)
    freed = _settle_free_window(
        state,
        WindowInstance(
            app_id=app_id,
            position=tuple(float(v) for v in position),
            width=cell.width,
            height=cell.height,
        ),
    )

    zones = []
    for z in state.zones:
        if z.id == zone_id:
            clone = _clone_zone(z)
            clone.cell(cell_index).occupant = None
            zones.append(clone)
        else:
            zones.append(z)
    windows = tuple(freed if w.app_id == app_id else w for w in state.windows)
    return _bump(state, zones=tuple(zones), windows=windows)


def ingest_events(
    state: WorkspaceState, events: list[InteractionEvent]
) -> WorkspaceState:
    """Append a telemetry batch; timestamps must not rewind the log."""
    if not events:
        return _bump(state)
    combined = list(state.events) + list(events)
    for prev, cur in zip(combined, combined[1:]):
        if cur.timestamp < prev.timestamp:
            raise ValidationError("event batch rewinds the log timeline")
    return _bump(state, events=tuple(combined))


def build_pinned(state: WorkspaceState) -> Assignment:
    """Currently hosted windows as the immutable context for Stage 1."""
    hosted = state.hosted()
    return Assignment(
        entries=dict(hosted),
        provenance={app: Provenance.USER_PINNED for app in hosted},
    )


def request_recommendation(
    state: WorkspaceState,
    goal: Goal,
    catalog: list[AppDescriptor],
    provider: Provider,
    weights: CostWeights | None = None,
    sizing_config: SizingConfig | None = None,
    engine: str = "llm",
    smoothing: int = 1,
) -> WorkspaceState:
    """Run the full pipeline and park the result as a pending proposal.

    Committed zones and windows are untouched; the proposal holds the
    relevance set, the repaired assignment, per-zone sizing results, and
    diagnostics. Provider failure degrades to the greedy engine, flagged.
    """
    if state.pending is not None:
        raise PendingProposalError(f"workspace {state.id!r} already has a proposal")
    weights = weights or CostWeights()
    sizing_config = sizing_config or SizingConfig()
    rules = ReadabilityRules.from_catalog(catalog, sizing_config.alpha_min)

    relevance = predict_relevance(goal, catalog, provider)
    pinned = build_pinned(state)
    transitions = estimate_transitions(
        list(state.events), [app.id for app in catalog], smoothing
    )
    stats = hand_stats(list(state.events))
    zones = [_clone_zone(z) for z in state.zones]

    placeable = RelevanceSet(
        entries=tuple(
            (app_id, score)
            for app_id, score in relevance.entries
            if app_id not in pinned.entries
        ),
        goal=goal,
        fallback=relevance.fallback,
    )

    diagnostics: dict[tuple[str, str, int], float] = {}
    for app_id, _ in placeable.entries:
        matrix = cost_matrix(
            app_id, relevance, pinned.entries, transitions, zones, state.pose, weights,
            stats,
        )
        diagnostics.update(matrix.entries)
    full_cost = CostMatrix(entries=diagnostics, context=tuple(sorted(pinned.entries)))

    payload = build_stage1_prompt(placeable, zones, pinned, full_cost, rules, goal)
    fallback = relevance.fallback
    dropped: tuple[str, ...] = ()
    if engine in ("llm", "mock"):
        outcome: LlmAssignOutcome = llm_assign(
            payload, provider, placeable, zones, pinned, transitions, weights,
            state.pose, stats,
        )
        assignment = outcome.assignment
        fallback = fallback or outcome.fallback
        dropped = outcome.dropped
    elif engine == "greedy":
        assignment = greedy_assign(
            placeable, zones, pinned, transitions, weights, state.pose, stats
        )
    elif engine == "oracle":
        assignment = exhaustive_assign(
            placeable, zones, pinned, transitions, weights, state.pose, stats
        )
    else:
        raise DomainError(f"unknown assignment engine {engine!r}")

    from .assignment import assignment_cost

    proposal_cost = assignment_cost(
        assignment, relevance, zones, pinned, transitions, weights, state.pose, stats
    )

    sizing_results = []
    warnings: list[str] = []
    for zone in zones:
        result = optimize_zone(
            zone, assignment, relevance, transitions, weights, sizing_config, state.pose
        )
        result = readability_scaleup(
            zone, result.theta_star, assignment, state.pose, sizing_config, rules,
            base=result,
        )
        sizing_results.append(result)
        if result.scale_clamped:
            warnings.append(
                f"zone {zone.id!r} cannot reach readability within the scale cap"
            )
        if result.scale_factor > 1.0:
            preview = apply_sizing(zone, result)
            for _, occ_id in occlusion_conflicts(
                [preview], list(state.occlusions), state.pose
            ):
                warnings.append(
                    f"scaled zone {zone.id!r} would overlap occlusion {occ_id!r}"
                )

    proposal = Proposal(
        id=f"prop-{state.revision + 1}",
        goal=goal,
        status="ready",
        relevance=relevance,
        assignment=assignment,
        sizing=tuple(sizing_results),
        cost=full_cost,
        total_cost=proposal_cost,
        fallback=fallback,
        dropped=dropped,
        warnings=tuple(warnings),
    )
    return _bump(state, pending=proposal)


def _decision_for(
    app_id: str,
    cell: tuple[str, int],
    decisions: dict,
    batch_zones: set[str],
) -> str | tuple[str, int]:
    """Effective decision for one proposed entry; explicit decisions win."""
    if app_id in decisions:
        decision = decisions[app_id]
        if isinstance(decision, dict) and "override" in decision:
            target = decision["override"]
            return (str(target[0]), int(target[1]))
        if decision in ("accept", "decline"):
            return decision
        raise ValidationError(f"unknown decision {decision!r} for {app_id!r}")
    if cell[0] in batch_zones:
        return "accept"
    raise ValidationError(f"no decision for proposed app {app_id!r}")


def resolve_proposal(
    state: WorkspaceState,
    decisions: dict,
    batch_accept_zones: list[str] | None = None,
) -> tuple[WorkspaceState, AcceptanceRecord]:
    """Apply per-cell confirmations: host accepted windows, size accepted zones.

    Every proposed entry needs a decision, directly or through a per-zone
    batch accept. Declined entries vanish; overridden entries land in the
    user's cell instead. Zones receiving at least one accepted window get
    their sizing result applied, shifted aside if the scale-up would cover an
    occlusion-free region.
    """
    if state.pending is None or state.pending.assignment is None:
        raise DomainError(f"workspace {state.id!r} has no pending proposal")
    proposal = state.pending
    batch = set(batch_accept_zones or [])
    entries = proposal.assignment.entries

    resolved: dict[str, str | tuple[str, int]] = {}
    for app_id, cell in entries.items():
        resolved[app_id] = _decision_for(app_id, cell, decisions, batch)

    working = replace(state, pending=None)
    record_decisions: dict[str, str] = {}
    accepted = declined = overridden = 0
    sized_zones: set[str] = set()

    for app_id, cell in entries.items():
        decision = resolved[app_id]
        if decision == "decline":
            record_decisions[app_id] = "declined"
            declined += 1
            continue
        target = cell if decision == "accept" else decision
        try:
            working = drag_window_in(working, app_id, target[0], target[1])
        except (DomainError, OccupiedCellError, IntrusionError):
            # the workspace moved on under the proposal; treat as declined
            record_decisions[app_id] = "declined"
            declined += 1
            continue
        if decision == "accept":
            record_decisions[app_id] = "accepted"
            accepted += 1
            sized_zones.add(cell[0])
        else:
            record_decisions[app_id] = "overridden"
            overridden += 1

    layouts_adjusted = 0
    zones = list(working.zones)
    for result in proposal.sizing:
        if result.zone_id not in sized_zones or result.locked:
            continue
        index = next(i for i, z in enumerate(zones) if z.id == result.zone_id)
        sized = apply_sizing(_clone_zone(zones[index]), result)
        try:
            sized = resolve_intrusion(sized, list(working.occlusions), working.pose)
        except UnresolvableIntrusionError:
            continue  # keep the committed layout rather than violate safety
        if not _occupied_cells_clear(sized, working):
            continue
        zones[index] = sized
        layouts_adjusted += 1
    working = replace(working, zones=tuple(zones))

    record = AcceptanceRecord(
        proposal_id=proposal.id,
        decisions=record_decisions,
        proposed=len(entries),
        accepted=accepted,
        declined=declined,
        overridden=overridden,
        layouts_adjusted=layouts_adjusted,
        reorderings=overridden,
    )
    return _bump(working, pending=None), record


def validate_state(state: WorkspaceState) -> None:
    """Check the cross-cutting workspace invariants; raises on violation."""
    from .layout import validate_zone

    ids = [z.id for z in state.zones] + [o.id for o in state.occlusions]
    if len(set(ids)) != len(ids):
        raise ValidationError("zone and occlusion ids must be unique")
    for zone in state.zones:
        validate_zone(zone)
    for occ in state.occlusions:
        if occ.kind is not TemplateKind.OCCLUSION_FREE:
            raise ValidationError("occlusion list entries must be occlusion-free")
    hosted = {}
    for window in state.windows:
        if window.host is not None:
            zone = state.zone(window.host[0])
            cell = zone.cell(window.host[1])
            if cell.occupant != window.app_id:
                raise ValidationError(
                    f"cell {window.host} occupant does not match window {window.app_id!r}"
                )
            if window.host in hosted:
                raise ValidationError(f"two windows hosted in cell {window.host}")
            hosted[window.host] = window.app_id
    for zone in state.zones:
        for cell in zone.cells:
            if cell.occupant is not None and (zone.id, cell.index) not in hosted:
                raise ValidationError(
                    f"cell {zone.id}:{cell.index} marks occupant without a window"
                )
