"""Interaction-event ingestion, transition-frequency estimation, and hand-travel stats.

The event log is append-only: one structured record per action performed,
persisted as newline-delimited JSON with the wire field names
(timestamp, kind, app, hand_position).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DomainError


class EventKind(str, Enum):
    POINTER_DOWN = "pointer_down"
    POINTER_UP = "pointer_up"
    DRAG_START = "drag_start"
    DRAG_END = "drag_end"
    FOCUS = "focus"
    HOVER = "hover"
    TAP = "tap"


@dataclass(frozen=True)
class InteractionEvent:
    """One logged interaction: when, what, on which app, and where the hand was."""

    timestamp: float
    kind: EventKind
    app: str | None = None
    hand_position: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class SignalStats:
    """Empirical hand-travel summary used as the planning-time movement prior."""

    mean_hand_travel: float = 0.0
    samples: int = 0


@dataclass
class TransitionMatrix:
    """Row-stochastic app-to-app transition frequencies with a zero diagonal."""

    apps: list[str]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        n = len(self.apps)
        if self.matrix.shape != (n, n):
            raise DomainError(f"transition matrix shape {self.matrix.shape} != ({n},{n})")
        if np.any(self.matrix < 0):
            raise DomainError("transition frequencies must be non-negative")
        if np.any(np.abs(np.diag(self.matrix)) > 0):
            raise DomainError("self-transitions are excluded; diagonal must be zero")
        sums = self.matrix.sum(axis=1)
        bad = (sums > 0) & (np.abs(sums - 1.0) > 1e-9)
        if np.any(bad):
            raise DomainError("nonzero rows must sum to 1")

    def get(self, from_app: str, to_app: str) -> float:
        """Transition frequency, 0.0 for unknown apps."""
        try:
            i = self.apps.index(from_app)
            j = self.apps.index(to_app)
        except ValueError:
            return 0.0
        return float(self.matrix[i, j])


def _check_time_ordered(log: list[InteractionEvent]) -> None:
    for prev, cur in zip(log, log[1:]):
        if cur.timestamp < prev.timestamp:
            raise DomainError("event log timestamps must be non-decreasing")


def hand_travel(log: list[InteractionEvent]) -> list[float]:
    """Hand-travel distance for each matched pointer-down/pointer-up pair.

    Pairs missing a hand position on either end are skipped.
    """
    _check_time_ordered(log)
    distances = []
    pending: InteractionEvent | None = None
    for event in log:
        if event.kind is EventKind.POINTER_DOWN:
            pending = event
        elif event.kind is EventKind.POINTER_UP:
            if (
                pending is not None
                and pending.hand_position is not None
                and event.hand_position is not None
            ):
                a = np.asarray(pending.hand_position, dtype=float)
                b = np.asarray(event.hand_position, dtype=float)
                distances.append(float(np.linalg.norm(b - a)))
            pending = None
    return distances


def hand_stats(log: list[InteractionEvent]) -> SignalStats:
    distances = hand_travel(log)
    if not distances:
        return SignalStats()
    return SignalStats(
        mean_hand_travel=float(np.mean(distances)), samples=len(distances)
    )


def estimate_transitions(
    log: list[InteractionEvent], apps: list[str], smoothing: int = 1
) -> TransitionMatrix:
    """Estimate the transition matrix from consecutive focus events.

    P[i][l] = (count(i->l) + smoothing) / sum over l' != i of (count(i->l') + smoothing).
    Consecutive focus events on the same app are collapsed; rows with no data
    under zero smoothing stay all-zero.
    """
    if not apps:
        raise DomainError("app list must be non-empty")
    if len(set(apps)) != len(apps):
        raise DomainError("app ids must be distinct")
    if smoothing < 0:
        raise DomainError("smoothing must be non-negative")
    _check_time_ordered(log)

    n = len(apps)
    index = {app: i for i, app in enumerate(apps)}
    counts = np.zeros((n, n), dtype=float)
    previous: str | None = None
    for event in log:
        if event.kind is not EventKind.FOCUS or event.app is None:
            continue
        if event.app not in index:
            continue
        if previous is not None and previous != event.app:
            counts[index[previous], index[event.app]] += 1.0
        previous = event.app

    matrix = np.zeros((n, n), dtype=float)
    if n > 1:
        smoothed = counts + float(smoothing)
        np.fill_diagonal(smoothed, 0.0)
        row_sums = smoothed.sum(axis=1)
        nonzero = row_sums > 0
        matrix[nonzero] = smoothed[nonzero] / row_sums[nonzero, None]
    return TransitionMatrix(apps=list(apps), matrix=matrix)


# --- newline-delimited log persistence -------------------------------------

def format_event_line(event: InteractionEvent) -> str:
    record = {
        "timestamp": event.timestamp,
        "kind": event.kind.value,
        "app": event.app,
        "hand_position": list(event.hand_position)
        if event.hand_position is not None
        else None,
    }
    return json.dumps(record, sort_keys=True)


def parse_event_line(line: str) -> InteractionEvent:
    record = json.loads(line)
    hand = record.get("hand_position")
    return InteractionEvent(
        timestamp=float(record["timestamp"]),
        kind=EventKind(record["kind"]),
        app=record.get("app"),
        hand_position=tuple(float(v) for v in hand) if hand is not None else None,
    )


def read_event_log(path: str | Path) -> list[InteractionEvent]:
    events = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            events.append(parse_event_line(line))
    _check_time_ordered(events)
    return events


def append_events(path: str | Path, events: list[InteractionEvent]) -> None:
    with open(path, "a") as handle:
        for event in events:
            handle.write(format_event_line(event) + "\n")
