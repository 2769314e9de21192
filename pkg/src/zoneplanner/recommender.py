"""Goal-to-application relevance prediction through a pluggable provider.

A provider is anything that turns a structured text payload into a
structured text response. The deterministic mock provider ships here so the
whole pipeline runs reproducibly without a network; real providers are
configured by endpoint and credential, never linked at build time.
"""

from __future__ import annotations

import json
import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import httpx

from .errors import DomainError, ProviderError

if TYPE_CHECKING:
    from .assignment import Assignment
    from .costmodel import CostMatrix
    from .layout import ZoneSpec

logger = logging.getLogger(__name__)

DEFAULT_MIN_ROWS = 20


@dataclass(frozen=True)
class Goal:
    """A high-level user goal, typed directly or transcribed upstream."""

    text: str
    source: str = "typed"

    def __post_init__(self):
        if not self.text.strip():
            raise DomainError("goal text must be non-empty")
        if self.source not in ("typed", "transcribed"):
            raise DomainError(f"unknown goal source {self.source!r}")


@dataclass(frozen=True)
class AppDescriptor:
    """A catalog entry: one virtual window application."""

    id: str
    name: str
    category: str
    preferred_aspect: str = "any"  # landscape | portrait | any
    min_rows: int = DEFAULT_MIN_ROWS

    def __post_init__(self):
        if self.min_rows < 1:
            raise DomainError("min_rows must be at least 1")
        if self.preferred_aspect not in ("landscape", "portrait", "any"):
            raise DomainError(f"unknown aspect {self.preferred_aspect!r}")


@dataclass(frozen=True)
class RelevanceSet:
    """Predicted per-app likelihoods in [0, 1] for a goal, in catalog order."""

    entries: tuple[tuple[str, float], ...]
    goal: Goal
    fallback: bool = False

    def __post_init__(self):
        seen = set()
        for app_id, score in self.entries:
            if app_id in seen:
                raise DomainError(f"duplicate app id {app_id!r} in relevance set")
            seen.add(app_id)
            if not (0.0 <= score <= 1.0):
                raise DomainError(f"relevance {score} for {app_id!r} outside [0, 1]")

    def apps(self) -> list[str]:
        return [app_id for app_id, _ in self.entries]

    def score(self, app_id: str, default: float = 1.0) -> float:
        for entry_id, score in self.entries:
            if entry_id == app_id:
                return score
        return default


@dataclass(frozen=True)
class ReadabilityRules:
    """Minimum angular size per text row, and the per-app row counts."""

    alpha_min: float  # radians
    rows_by_app: dict[str, int] = field(default_factory=dict)
    default_rows: int = DEFAULT_MIN_ROWS

    def rows(self, app_id: str) -> int:
        return self.rows_by_app.get(app_id, self.default_rows)

    def required_angle(self, app_id: str) -> float:
        return self.alpha_min * self.rows(app_id)

    @classmethod
    def from_catalog(
        cls, catalog: list[AppDescriptor], alpha_min: float
    ) -> "ReadabilityRules":
        return cls(
            alpha_min=alpha_min,
            rows_by_app={app.id: app.min_rows for app in catalog},
        )


class Provider(ABC):
    """Structured text in, structured text out, with a bounded response time."""

    @abstractmethod
    def complete(self, payload: str) -> str:
        """Return the structured response for a request payload.

        Raises ProviderError on timeout or transport failure.
        """


class HTTPProvider(Provider):
    """Generic JSON-over-HTTP provider: POST {model, input} -> {output}.

    Retries once on transport failure; any further failure surfaces as
    ProviderError so callers can fall back.
    """

    def __init__(self, endpoint: str, api_key: str = "", model: str = "", timeout: float = 10.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.timeout = timeout

    def complete(self, payload: str) -> str:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        body = {"model": self.model, "input": payload}
        last_error: Exception | None = None
        for _ in range(2):
            try:
                response = httpx.post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout
                )
                response.raise_for_status()
                data = response.json()
                if isinstance(data, dict) and "output" in data:
                    return str(data["output"])
                return response.text
            except Exception as exc:  # httpx transport/status/JSON errors
                last_error = exc
        raise ProviderError(f"provider call failed: {last_error}")


class MockProvider(Provider):
    """Deterministic scripted provider for tests and offline runs.

    Fixtures map a goal string to canned responses per request kind. Unknown
    goals get a deterministic heuristic: relevance scores from keyword
    matches against the catalog, and assignments filling empty cells in
    relevance order.
    """

    def __init__(
        self,
        fixtures: dict[str, dict] | None = None,
        delay: float = 0.0,
        fail: bool = False,
    ):
        self.fixtures = fixtures if fixtures is not None else DEFAULT_FIXTURES
        self.delay = delay
        self.fail = fail
        self.calls = 0

    def complete(self, payload: str) -> str:
        self.calls += 1
        if self.delay:
            time.sleep(self.delay)
        if self.fail:
            raise ProviderError("mock provider configured to fail")
        request = json.loads(payload)
        kind = request.get("kind")
        goal_text = request.get("goal", {}).get("text", "")
        fixture = self.fixtures.get(goal_text, {})
        if kind == "relevance_request":
            if "relevance" in fixture:
                return json.dumps(fixture["relevance"], sort_keys=True)
            catalog = request.get("catalog", [])
            scores = {
                app["id"]: _keyword_score(goal_text, app) for app in catalog
            }
            return json.dumps(scores, sort_keys=True)
        if kind == "assignment_request":
            if "assignment" in fixture:
                return json.dumps(fixture["assignment"], sort_keys=True)
            return json.dumps(_fill_in_order(request), sort_keys=True)
        raise ProviderError(f"mock provider got unknown payload kind {kind!r}")


def _keyword_score(goal_text: str, app: dict) -> float:
    tokens = set(goal_text.lower().replace(",", " ").split())
    fields = " ".join(
        str(app.get(key, "")) for key in ("id", "name", "category")
    ).lower()
    hits = sum(1 for token in tokens if token and token in fields)
    return round(min(1.0, 0.3 + 0.3 * hits), 6)


def _fill_in_order(request: dict) -> dict[str, list]:
    """Default mock assignment: relevance order into empty cells in zone order."""
    sections = request.get("sections", {})
    apps = sorted(
        sections.get("applications", []),
        key=lambda entry: (-entry["relevance"], entry["id"]),
    )
    empty: list[tuple[str, int]] = []
    for zone in sections.get("zones", []):
        for cell in zone.get("cells", []):
            if cell.get("occupant") is None:
                empty.append((zone["id"], cell["index"]))
    empty.sort()
    assignment = {}
    occupied_apps = {
        cell.get("occupant")
        for zone in sections.get("zones", [])
        for cell in zone.get("cells", [])
        if cell.get("occupant") is not None
    }
    for entry in apps:
        if not empty:
            break
        if entry["id"] in occupied_apps:
            continue
        zone_id, cell_index = empty.pop(0)
        assignment[entry["id"]] = [zone_id, cell_index]
    return assignment


# --- prompt payloads ---------------------------------------------------------

def build_relevance_prompt(goal: Goal, catalog: list[AppDescriptor]) -> str:
    """Canonical relevance-request payload; same inputs give identical bytes."""
    payload = {
        "kind": "relevance_request",
        "goal": {"text": goal.text, "source": goal.source},
        "catalog": [
            {
                "id": app.id,
                "name": app.name,
                "category": app.category,
                "preferred_aspect": app.preferred_aspect,
            }
            for app in catalog
        ],
        "response_schema": {
            "type": "object",
            "description": "map of app id to relevance score in [0, 1]; no other text",
        },
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def build_stage1_prompt(
    relevance: RelevanceSet,
    zones: list["ZoneSpec"],
    occupancy: "Assignment",
    cost: "CostMatrix",
    readability: ReadabilityRules,
    goal: Goal,
) -> str:
    """Canonical assignment-request payload with exactly five data sections.

    Sections: the scored application list, the zones with layout/sizes/occupied
    cells, the cost matrix, the readability constraints, and the goal. The
    response schema pins the output to a bare app-to-cell map.
    """
    sections = {
        "applications": [
            {"id": app_id, "relevance": score} for app_id, score in relevance.entries
        ],
        "zones": [
            {
                "id": zone.id,
                "template": zone.kind.value,
                "width": zone.width,
                "height": zone.height,
                "split": {"w0": zone.theta.w0, "h0": zone.theta.h0},
                "locked": zone.locked,
                "cells": [
                    {
                        "index": cell.index,
                        "width": cell.width,
                        "height": cell.height,
                        "occupant": cell.occupant,
                    }
                    for cell in zone.cells
                ],
            }
            for zone in zones
        ],
        "cost_matrix": {
            f"{app}|{zone}|{cell}": value
            for (app, zone, cell), value in sorted(cost.entries.items())
        },
        "readability": {
            "alpha_min_degrees": math.degrees(readability.alpha_min),
            "rows_by_app": dict(sorted(readability.rows_by_app.items())),
        },
        "goal": {"text": goal.text, "source": goal.source},
    }
    payload = {
        "kind": "assignment_request",
        "goal": {"text": goal.text, "source": goal.source},
        "sections": sections,
        "response_schema": {
            "type": "object",
            "description": (
                "map of app id to [zone id, cell index] drawn from the empty "
                "cells; no free text"
            ),
        },
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def fallback_relevance(goal: Goal, catalog: list[AppDescriptor]) -> RelevanceSet:
    """Category-keyword heuristic used when the provider is unreachable.

    Never empty for a non-empty catalog: every app gets a floor score.
    """
    entries = tuple(
        (
            app.id,
            _keyword_score(
                goal.text,
                {"id": app.id, "name": app.name, "category": app.category},
            ),
        )
        for app in catalog
    )
    return RelevanceSet(entries=entries, goal=goal, fallback=True)


def predict_relevance(
    goal: Goal, catalog: list[AppDescriptor], provider: Provider
) -> RelevanceSet:
    """Predict per-app relevance for a goal, falling back to the heuristic.

    Provider output is restricted to catalog ids (unknown ids dropped with a
    warning) and scores are clamped into [0, 1]. Entries come back in catalog
    order for determinism.
    """
    if not catalog:
        raise DomainError("catalog must be non-empty")
    payload = build_relevance_prompt(goal, catalog)
    try:
        raw = provider.complete(payload)
        scores = json.loads(raw)
        if not isinstance(scores, dict):
            raise ProviderError("relevance response is not an object")
    except (ProviderError, json.JSONDecodeError) as exc:
        logger.warning("relevance provider failed (%s); using heuristic fallback", exc)
        return fallback_relevance(goal, catalog)

    catalog_ids = {app.id for app in catalog}
    for unknown in sorted(set(scores) - catalog_ids):
        logger.warning("relevance response names unknown app %r; dropped", unknown)
    entries = tuple(
        (app.id, min(1.0, max(0.0, float(scores[app.id]))))
        for app in catalog
        if app.id in scores
    )
    if not entries:
        logger.warning("relevance response had no usable entries; using fallback")
        return fallback_relevance(goal, catalog)
    return RelevanceSet(entries=entries, goal=goal)


# --- bundled catalog and fixtures --------------------------------------------

def default_catalog() -> list[AppDescriptor]:
    """A ~20-item application palette in the spirit of a desk workspace."""
    specs = [
        ("ide", "IDE", "coding", "landscape", 30),
        ("terminal", "Terminal", "coding", "landscape", 20),
        ("browser", "Browser", "web", "any", 25),
        ("chat", "Chat", "communication", "portrait", 20),
        ("mail", "Mail", "communication", "any", 24),
        ("calendar", "Calendar", "planning", "any", 18),
        ("notes", "Notes", "writing", "portrait", 20),
        ("docs", "Docs", "writing", "any", 28),
        ("sheets", "Sheets", "data", "landscape", 24),
        ("slides", "Slides", "presentation", "landscape", 16),
        ("pdf-reader", "PDF Reader", "reading", "portrait", 30),
        ("design-tool", "Design Tool", "design", "landscape", 20),
        ("photos", "Photos", "media", "landscape", 12),
        ("music", "Music", "media", "portrait", 12),
        ("video-call", "Video Call", "communication", "landscape", 12),
        ("file-manager", "Files", "system", "any", 18),
        ("todo", "Todo", "planning", "portrait", 16),
        ("news", "News", "reading", "any", 22),
        ("weather", "Weather", "ambient", "any", 10),
        ("timer", "Timer", "ambient", "any", 8),
    ]
    return [
        AppDescriptor(id=i, name=n, category=c, preferred_aspect=a, min_rows=r)
        for i, n, c, a, r in specs
    ]


DEMO_GOAL = "set up a workspace for coding a web game"

DEFAULT_FIXTURES: dict[str, dict] = {
    "coding a web game": {
        "relevance": {"ide": 0.95, "terminal": 0.9, "browser": 0.8, "chat": 0.5},
    },
    DEMO_GOAL: {
        "relevance": {
            "ide": 0.95,
            "terminal": 0.9,
            "browser": 0.85,
            "docs": 0.7,
            "chat": 0.6,
            "music": 0.5,
            "notes": 0.45,
            "mail": 0.4,
        },
    },
}
