"""Headless mixed-initiative XR window-layout engine.

Zones are user-created oriented rectangles holding tiled cells; an
interaction-cost model scores app placements, a two-stage pipeline proposes
assignments and per-zone sizing, and the human confirms or overrides every
cell. Exposed as a library, an HTTP service, and a scenario CLI.
"""

from .assignment import (
    Assignment,
    FeasibilityReport,
    Provenance,
    check_feasibility,
    exhaustive_assign,
    greedy_assign,
    llm_assign,
)
from .costmodel import CostMatrix, CostWeights, SignalBundle, cost_matrix
from .geometry import AngularFootprint, Orientation, UserPose, angular_size, head_turn_angle
from .layout import Cell, TemplateKind, ThetaParams, ZoneSpec, instantiate
from .recommender import (
    AppDescriptor,
    Goal,
    HTTPProvider,
    MockProvider,
    Provider,
    RelevanceSet,
    predict_relevance,
)
from .sizing import SizingConfig, SizingResult, optimize_zone, readability_scaleup
from .telemetry import InteractionEvent, SignalStats, TransitionMatrix, estimate_transitions
from .workspace import (
    AcceptanceRecord,
    Proposal,
    WindowInstance,
    WorkspaceState,
    create_workspace,
    request_recommendation,
    resolve_proposal,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptanceRecord",
    "AngularFootprint",
    "AppDescriptor",
    "Assignment",
    "Cell",
    "CostMatrix",
    "CostWeights",
    "FeasibilityReport",
    "Goal",
    "HTTPProvider",
    "InteractionEvent",
    "MockProvider",
    "Orientation",
    "Proposal",
    "Provenance",
    "Provider",
    "RelevanceSet",
    "SignalBundle",
    "SignalStats",
    "SizingConfig",
    "SizingResult",
    "TemplateKind",
    "ThetaParams",
    "TransitionMatrix",
    "UserPose",
    "WindowInstance",
    "WorkspaceState",
    "ZoneSpec",
    "angular_size",
    "check_feasibility",
    "cost_matrix",
    "create_workspace",
    "estimate_transitions",
    "exhaustive_assign",
    "greedy_assign",
    "head_turn_angle",
    "instantiate",
    "llm_assign",
    "optimize_zone",
    "predict_relevance",
    "readability_scaleup",
    "request_recommendation",
    "resolve_proposal",
    "__version__",
]
