"""Canonical wire schema: versioned JSON documents with stable bytes.

Serialization profile: object keys sorted, no whitespace, ASCII escapes,
floats at 9 significant digits (with a forced decimal point so float-ness
survives a round trip). serialize -> parse -> serialize is byte-identical
for every document type. Lengths travel in meters, angles in degrees;
radians stay internal.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .assignment import Assignment, Provenance
from .costmodel import CostMatrix, CostWeights
from .errors import ValidationError
from .geometry import Orientation, UserPose
from .layout import Cell, TemplateKind, ThetaParams, ZoneSpec
from .recommender import AppDescriptor, Goal, RelevanceSet
from .sizing import SizingConfig, SizingResult
from .telemetry import EventKind, InteractionEvent
from .workspace import AcceptanceRecord, Proposal, WindowInstance, WorkspaceState

SCHEMA_VERSION = "1"


# --- canonical serialization ---------------------------------------------

def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValidationError("non-finite numbers are not representable on the wire")
    text = format(value, ".9g")
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"
    return text


def canonical_dumps(value: Any) -> str:
    """Serialize to the canonical profile; same value, same bytes, always."""
    parts: list[str] = []
    _write(value, parts)
    return "".join(parts)


def _write(value: Any, parts: list[str]) -> None:
    if value is None:
        parts.append("null")
    elif value is True:
        parts.append("true")
    elif value is False:
        parts.append("false")
    elif isinstance(value, float):
        parts.append(_format_float(value))
    elif isinstance(value, (int, np.integer)):
        parts.append(str(int(value)))
    elif isinstance(value, str):
        parts.append(json.dumps(value))
    elif isinstance(value, dict):
        parts.append("{")
        first = True
        for key in sorted(value):
            if not isinstance(key, str):
                raise ValidationError(f"non-string key {key!r} in wire document")
            if not first:
                parts.append(",")
            first = False
            parts.append(json.dumps(key))
            parts.append(":")
            _write(value[key], parts)
        parts.append("}")
    elif isinstance(value, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(",")
            _write(item, parts)
        parts.append("]")
    elif isinstance(value, np.floating):
        parts.append(_format_float(float(value)))
    else:
        raise ValidationError(f"type {type(value).__name__} is not wire-serializable")


def canonical_loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}", [str(exc)])


def envelope(kind: str, body: Any, request_id: str = "") -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "request_id": request_id,
        "body": body,
    }


def open_envelope(doc: Any, expected_kind: str | None = None) -> tuple[str, Any, str]:
    """Validate an envelope and return (kind, body, request_id)."""
    if not isinstance(doc, dict):
        raise ValidationError("envelope must be an object", ["<root>: not an object"])
    diagnostics = []
    if doc.get("schema_version") != SCHEMA_VERSION:
        diagnostics.append(
            f"schema_version: expected {SCHEMA_VERSION!r}, got {doc.get('schema_version')!r}"
        )
    kind = doc.get("kind")
    if not isinstance(kind, str):
        diagnostics.append("kind: missing or not a string")
    if "body" not in doc:
        diagnostics.append("body: missing")
    if diagnostics:
        raise ValidationError("invalid envelope", diagnostics)
    if expected_kind is not None and kind != expected_kind:
        raise ValidationError(
            f"unexpected payload kind {kind!r}",
            [f"kind: expected {expected_kind!r}"],
        )
    return kind, doc["body"], str(doc.get("request_id", ""))


def _need(doc: dict, field: str, kind: type, context: str):
    if field not in doc:
        raise ValidationError(f"missing field {field!r}", [f"{context}.{field}: missing"])
    value = doc[field]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ValidationError(
            f"field {field!r} has wrong type",
            [f"{context}.{field}: expected {kind.__name__}"],
        )
    return value


def _vector(doc: dict, field: str, context: str) -> list[float]:
    value = _need(doc, field, list, context)
    if len(value) != 3 or not all(isinstance(v, (int, float)) for v in value):
        raise ValidationError(
            f"field {field!r} must be a 3-vector",
            [f"{context}.{field}: expected [x, y, z]"],
        )
    return [float(v) for v in value]


# --- document builders -----------------------------------------------------

def pose_to_doc(pose: UserPose) -> dict:
    return {
        "position": [float(v) for v in pose.position],
        "forward": [float(v) for v in pose.forward],
    }


def pose_from_doc(doc: Any) -> UserPose:
    if not isinstance(doc, dict):
        raise ValidationError("pose must be an object", ["pose: not an object"])
    return UserPose(
        position=_vector(doc, "position", "pose"),
        forward=_vector(doc, "forward", "pose"),
    )


def orientation_to_doc(orientation: Orientation) -> dict:
    return {
        "normal": [float(v) for v in orientation.normal],
        "up": [float(v) for v in orientation.up],
    }


def orientation_from_doc(doc: dict) -> Orientation:
    return Orientation(
        normal=_vector(doc, "normal", "orientation"),
        up=_vector(doc, "up", "orientation"),
    )


def theta_to_doc(theta: ThetaParams) -> dict:
    return {"w0": float(theta.w0), "h0": float(theta.h0)}


def theta_from_doc(doc: dict) -> ThetaParams:
    return ThetaParams(
        w0=_need(doc, "w0", float, "theta"), h0=_need(doc, "h0", float, "theta")
    )


def cell_to_doc(cell: Cell) -> dict:
    return {
        "index": cell.index,
        "x": float(cell.x),
        "y": float(cell.y),
        "width": float(cell.width),
        "height": float(cell.height),
        "occupant": cell.occupant,
    }


def cell_from_doc(doc: dict) -> Cell:
    occupant = doc.get("occupant")
    return Cell(
        index=_need(doc, "index", int, "cell"),
        x=_need(doc, "x", float, "cell"),
        y=_need(doc, "y", float, "cell"),
        width=_need(doc, "width", float, "cell"),
        height=_need(doc, "height", float, "cell"),
        occupant=str(occupant) if occupant is not None else None,
    )


def zone_to_doc(zone: ZoneSpec) -> dict:
    return {
        "id": zone.id,
        "template": zone.kind.value,
        "width": float(zone.width),
        "height": float(zone.height),
        "position": [float(v) for v in zone.position],
        "orientation": orientation_to_doc(zone.orientation),
        "theta": theta_to_doc(zone.theta),
        "locked": zone.locked,
        "cells": [cell_to_doc(cell) for cell in zone.cells],
    }


def zone_from_doc(doc: Any) -> ZoneSpec:
    if not isinstance(doc, dict):
        raise ValidationError("zone must be an object", ["zone: not an object"])
    try:
        kind = TemplateKind(_need(doc, "template", str, "zone"))
    except ValueError:
        raise ValidationError(
            f"unknown template {doc.get('template')!r}",
            ["zone.template: unknown template"],
        )
    return ZoneSpec(
        id=_need(doc, "id", str, "zone"),
        kind=kind,
        width=_need(doc, "width", float, "zone"),
        height=_need(doc, "height", float, "zone"),
        position=np.array(_vector(doc, "position", "zone")),
        orientation=orientation_from_doc(_need(doc, "orientation", dict, "zone")),
        theta=theta_from_doc(_need(doc, "theta", dict, "zone")),
        locked=bool(doc.get("locked", False)),
        cells=[cell_from_doc(c) for c in _need(doc, "cells", list, "zone")],
    )


def window_to_doc(window: WindowInstance) -> dict:
    return {
        "app": window.app_id,
        "position": [float(v) for v in window.position]
        if window.position is not None
        else None,
        "width": float(window.width) if window.width is not None else None,
        "height": float(window.height) if window.height is not None else None,
        "host": [window.host[0], window.host[1]] if window.host is not None else None,
    }


def window_from_doc(doc: dict) -> WindowInstance:
    host = doc.get("host")
    position = doc.get("position")
    return WindowInstance(
        app_id=_need(doc, "app", str, "window"),
        position=tuple(float(v) for v in position) if position is not None else None,
        width=float(doc["width"]) if doc.get("width") is not None else None,
        height=float(doc["height"]) if doc.get("height") is not None else None,
        host=(str(host[0]), int(host[1])) if host is not None else None,
    )


def event_to_doc(event: InteractionEvent) -> dict:
    return {
        "timestamp": float(event.timestamp),
        "kind": event.kind.value,
        "app": event.app,
        "hand_position": [float(v) for v in event.hand_position]
        if event.hand_position is not None
        else None,
    }


def event_from_doc(doc: dict) -> InteractionEvent:
    try:
        kind = EventKind(_need(doc, "kind", str, "event"))
    except ValueError:
        raise ValidationError(
            f"unknown event kind {doc.get('kind')!r}", ["event.kind: unknown"]
        )
    hand = doc.get("hand_position")
    return InteractionEvent(
        timestamp=_need(doc, "timestamp", float, "event"),
        kind=kind,
        app=doc.get("app"),
        hand_position=tuple(float(v) for v in hand) if hand is not None else None,
    )


def goal_to_doc(goal: Goal) -> dict:
    return {"text": goal.text, "source": goal.source}


def goal_from_doc(doc: Any) -> Goal:
    if isinstance(doc, str):
        return Goal(text=doc)
    if not isinstance(doc, dict):
        raise ValidationError("goal must be an object", ["goal: not an object"])
    return Goal(
        text=_need(doc, "text", str, "goal"),
        source=str(doc.get("source", "typed")),
    )


def relevance_to_doc(relevance: RelevanceSet) -> dict:
    return {
        "goal": goal_to_doc(relevance.goal),
        "entries": [
            {"app": app_id, "score": float(score)}
            for app_id, score in relevance.entries
        ],
        "fallback": relevance.fallback,
    }


def relevance_from_doc(doc: dict) -> RelevanceSet:
    return RelevanceSet(
        entries=tuple(
            (str(e["app"]), float(e["score"]))
            for e in _need(doc, "entries", list, "relevance")
        ),
        goal=goal_from_doc(_need(doc, "goal", dict, "relevance")),
        fallback=bool(doc.get("fallback", False)),
    )


def assignment_to_doc(assignment: Assignment) -> dict:
    return {
        "entries": {
            app: [cell[0], cell[1]] for app, cell in assignment.entries.items()
        },
        "provenance": {
            app: prov.value for app, prov in assignment.provenance.items()
        },
        "unassigned": list(assignment.unassigned),
    }


def assignment_from_doc(doc: dict) -> Assignment:
    entries = {
        str(app): (str(cell[0]), int(cell[1]))
        for app, cell in _need(doc, "entries", dict, "assignment").items()
    }
    provenance = {
        str(app): Provenance(value)
        for app, value in doc.get("provenance", {}).items()
    }
    return Assignment(
        entries=entries,
        provenance=provenance,
        unassigned=[str(a) for a in doc.get("unassigned", [])],
    )


def sizing_result_to_doc(result: SizingResult) -> dict:
    return {
        "zone": result.zone_id,
        "theta_star": theta_to_doc(result.theta_star),
        "scale_factor": float(result.scale_factor),
        "objective_value": float(result.objective_value),
        "evaluated_points": result.evaluated_points,
        "scale_clamped": result.scale_clamped,
        "locked": result.locked,
    }


def sizing_result_from_doc(doc: dict) -> SizingResult:
    return SizingResult(
        zone_id=_need(doc, "zone", str, "sizing"),
        theta_star=theta_from_doc(_need(doc, "theta_star", dict, "sizing")),
        scale_factor=_need(doc, "scale_factor", float, "sizing"),
        objective_value=_need(doc, "objective_value", float, "sizing"),
        evaluated_points=_need(doc, "evaluated_points", int, "sizing"),
        scale_clamped=bool(doc.get("scale_clamped", False)),
        locked=bool(doc.get("locked", False)),
    )


def cost_matrix_to_doc(cost: CostMatrix) -> dict:
    return {
        "entries": {
            f"{app}|{zone}|{cell}": float(value)
            for (app, zone, cell), value in cost.entries.items()
        },
        "context": list(cost.context),
    }


def cost_matrix_from_doc(doc: dict) -> CostMatrix:
    entries = {}
    for key, value in _need(doc, "entries", dict, "cost").items():
        app, zone, cell = key.split("|")
        entries[(app, zone, int(cell))] = float(value)
    return CostMatrix(
        entries=entries, context=tuple(str(a) for a in doc.get("context", []))
    )


def proposal_to_doc(proposal: Proposal) -> dict:
    return {
        "id": proposal.id,
        "status": proposal.status,
        "goal": goal_to_doc(proposal.goal),
        "relevance": relevance_to_doc(proposal.relevance)
        if proposal.relevance is not None
        else None,
        "assignment": assignment_to_doc(proposal.assignment)
        if proposal.assignment is not None
        else None,
        "sizing": [sizing_result_to_doc(r) for r in proposal.sizing],
        "cost": cost_matrix_to_doc(proposal.cost) if proposal.cost is not None else None,
        "total_cost": float(proposal.total_cost),
        "fallback": proposal.fallback,
        "dropped": list(proposal.dropped),
        "warnings": list(proposal.warnings),
        "error": proposal.error,
    }


def proposal_from_doc(doc: dict) -> Proposal:
    relevance = doc.get("relevance")
    assignment = doc.get("assignment")
    cost = doc.get("cost")
    return Proposal(
        id=_need(doc, "id", str, "proposal"),
        goal=goal_from_doc(_need(doc, "goal", dict, "proposal")),
        status=_need(doc, "status", str, "proposal"),
        relevance=relevance_from_doc(relevance) if relevance is not None else None,
        assignment=assignment_from_doc(assignment) if assignment is not None else None,
        sizing=tuple(sizing_result_from_doc(r) for r in doc.get("sizing", [])),
        cost=cost_matrix_from_doc(cost) if cost is not None else None,
        total_cost=float(doc.get("total_cost", 0.0)),
        fallback=bool(doc.get("fallback", False)),
        dropped=tuple(str(d) for d in doc.get("dropped", [])),
        warnings=tuple(str(w) for w in doc.get("warnings", [])),
        error=doc.get("error"),
    )


def record_to_doc(record: AcceptanceRecord) -> dict:
    return {
        "proposal_id": record.proposal_id,
        "decisions": dict(record.decisions),
        "proposed": record.proposed,
        "accepted": record.accepted,
        "declined": record.declined,
        "overridden": record.overridden,
        "layouts_adjusted": record.layouts_adjusted,
        "reorderings": record.reorderings,
    }


def record_from_doc(doc: dict) -> AcceptanceRecord:
    return AcceptanceRecord(
        proposal_id=_need(doc, "proposal_id", str, "record"),
        decisions={str(k): str(v) for k, v in doc.get("decisions", {}).items()},
        proposed=_need(doc, "proposed", int, "record"),
        accepted=_need(doc, "accepted", int, "record"),
        declined=_need(doc, "declined", int, "record"),
        overridden=_need(doc, "overridden", int, "record"),
        layouts_adjusted=_need(doc, "layouts_adjusted", int, "record"),
        reorderings=_need(doc, "reorderings", int, "record"),
    )


def state_to_doc(state: WorkspaceState) -> dict:
    return {
        "id": state.id,
        "revision": state.revision,
        "pose": pose_to_doc(state.pose),
        "zones": [zone_to_doc(z) for z in state.zones],
        "occlusions": [zone_to_doc(o) for o in state.occlusions],
        "windows": [window_to_doc(w) for w in state.windows],
        "pending": proposal_to_doc(state.pending) if state.pending else None,
        "events": [event_to_doc(e) for e in state.events],
    }


def state_from_doc(doc: Any) -> WorkspaceState:
    if not isinstance(doc, dict):
        raise ValidationError("state must be an object", ["state: not an object"])
    pending = doc.get("pending")
    return WorkspaceState(
        id=_need(doc, "id", str, "state"),
        pose=pose_from_doc(_need(doc, "pose", dict, "state")),
        zones=tuple(zone_from_doc(z) for z in doc.get("zones", [])),
        occlusions=tuple(zone_from_doc(o) for o in doc.get("occlusions", [])),
        windows=tuple(window_from_doc(w) for w in doc.get("windows", [])),
        pending=proposal_from_doc(pending) if pending is not None else None,
        events=tuple(event_from_doc(e) for e in doc.get("events", [])),
        revision=int(doc.get("revision", 0)),
    )


def app_to_doc(app: AppDescriptor) -> dict:
    return {
        "id": app.id,
        "name": app.name,
        "category": app.category,
        "preferred_aspect": app.preferred_aspect,
        "min_rows": app.min_rows,
    }


def app_from_doc(doc: dict) -> AppDescriptor:
    return AppDescriptor(
        id=_need(doc, "id", str, "app"),
        name=_need(doc, "name", str, "app"),
        category=_need(doc, "category", str, "app"),
        preferred_aspect=str(doc.get("preferred_aspect", "any")),
        min_rows=int(doc.get("min_rows", 20)),
    )


def weights_to_doc(weights: CostWeights) -> dict:
    return {
        "lambda_f": float(weights.lambda_f),
        "lambda_h": float(weights.lambda_h),
        "lambda_m": float(weights.lambda_m),
        "lambda_s": float(weights.lambda_s),
    }


def weights_from_doc(doc: dict) -> CostWeights:
    return CostWeights(
        lambda_f=_need(doc, "lambda_f", float, "weights"),
        lambda_h=_need(doc, "lambda_h", float, "weights"),
        lambda_m=_need(doc, "lambda_m", float, "weights"),
        lambda_s=float(doc.get("lambda_s", 0.5)),
    )


def sizing_config_to_doc(config: SizingConfig) -> dict:
    return {
        "alpha_min_degrees": math.degrees(config.alpha_min),
        "omega_margin": float(config.omega_margin),
        "grid_resolution": config.grid_resolution,
        "lambda_s": float(config.lambda_s),
        "max_scale": float(config.max_scale),
    }


def sizing_config_from_doc(doc: dict) -> SizingConfig:
    return SizingConfig(
        alpha_min=math.radians(_need(doc, "alpha_min_degrees", float, "sizing_config")),
        omega_margin=float(doc.get("omega_margin", 0.15)),
        grid_resolution=int(doc.get("grid_resolution", 41)),
        lambda_s=float(doc.get("lambda_s", 0.5)),
        max_scale=float(doc.get("max_scale", 3.0)),
    )
