"""Scenario runner and engine-comparison harness.

A scenario file bundles an initial workspace, a goal, a catalog, and an
engine choice. Running one executes relevance -> assignment -> sizing ->
accept-all and emits a canonical report; comparing engines draws random
desk-scale instances and scores each engine's total cost against the
exhaustive oracle.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .assignment import (
    Assignment,
    assignment_cost,
    exhaustive_assign,
    greedy_assign,
    llm_assign,
)
from .config import EngineConfig, build_provider, config_from_doc
from .costmodel import CostMatrix, cost_matrix
from .errors import ValidationError
from .geometry import UserPose
from .layout import CELL_COUNTS, TemplateKind, create_zone
from .recommender import (
    AppDescriptor,
    Goal,
    MockProvider,
    Provider,
    ReadabilityRules,
    RelevanceSet,
    build_stage1_prompt,
    default_catalog,
)
from .telemetry import TransitionMatrix
from .workspace import WorkspaceState, request_recommendation, resolve_proposal
from . import wire

ENGINES = ("greedy", "oracle", "llm", "mock")

# Exhaustive evaluations per generated instance stay below this so a large
# comparison corpus finishes in seconds, well under the hard engine budget.
INSTANCE_PERM_BUDGET = 200_000


@dataclass
class Scenario:
    workspace: WorkspaceState
    goal: Goal
    catalog: list[AppDescriptor]
    engine: str = "mock"
    seed: int = 0
    telemetry_path: str | None = None
    config: EngineConfig = field(default_factory=EngineConfig)


def scenario_from_doc(doc: dict, base_dir: Path | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be an object")
    engine = str(doc.get("engine", "mock"))
    if engine not in ENGINES:
        raise ValidationError(f"unknown engine {engine!r}")
    config = config_from_doc(doc.get("config", {}))
    if engine == "llm" and config.provider.kind != "http":
        raise ValidationError("engine 'llm' requires an http provider config")
    telemetry = doc.get("telemetry")
    if telemetry is not None and base_dir is not None:
        telemetry = str((base_dir / telemetry).resolve())
    catalog_doc = doc.get("catalog")
    catalog = (
        [wire.app_from_doc(a) for a in catalog_doc]
        if catalog_doc is not None
        else default_catalog()
    )
    scenario = Scenario(
        workspace=wire.state_from_doc(doc["workspace"]),
        goal=wire.goal_from_doc(doc["goal"]),
        catalog=catalog,
        engine=engine,
        seed=int(doc.get("seed", 0)),
        telemetry_path=telemetry,
        config=config,
    )
    if scenario.telemetry_path and not Path(scenario.telemetry_path).exists():
        raise ValidationError(f"telemetry log {scenario.telemetry_path} does not exist")
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise FileNotFoundError(str(exc))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario {path} is not valid JSON: {exc}")
    return scenario_from_doc(doc, base_dir=path.parent)


def _provider_for(scenario: Scenario, engine: str) -> Provider:
    if engine == "llm":
        return build_provider(scenario.config.provider)
    return MockProvider()


def run_scenario(
    scenario: Scenario,
    engine: str | None = None,
    provider: Provider | None = None,
    clock=time.perf_counter,
) -> dict:
    """Execute the pipeline with auto-accept-all and return the report body."""
    engine = engine or scenario.engine
    if engine not in ENGINES:
        raise ValidationError(f"unknown engine {engine!r}")
    provider = provider or _provider_for(scenario, engine)

    state = scenario.workspace
    if scenario.telemetry_path:
        from .telemetry import read_event_log

        events = tuple(read_event_log(scenario.telemetry_path))
        state = replace(state, events=state.events + events)

    started = clock()
    state = request_recommendation(
        state,
        scenario.goal,
        scenario.catalog,
        provider,
        scenario.config.weights,
        scenario.config.sizing,
        engine="llm" if engine in ("llm", "mock") else engine,
        smoothing=scenario.config.smoothing,
    )
    proposal = state.pending
    decisions = {app: "accept" for app in proposal.assignment.entries}
    final_state, record = resolve_proposal(state, decisions, [])
    elapsed = clock() - started

    return {
        "engine": engine,
        "goal": wire.goal_to_doc(scenario.goal),
        "seed": scenario.seed,
        "workspace": {
            "id": scenario.workspace.id,
            "zones": len(scenario.workspace.zones),
            "occlusions": len(scenario.workspace.occlusions),
        },
        "relevance": wire.relevance_to_doc(proposal.relevance),
        "assignment": wire.assignment_to_doc(proposal.assignment),
        "sizing": [wire.sizing_result_to_doc(r) for r in proposal.sizing],
        "total_cost": proposal.total_cost,
        "fallback": proposal.fallback,
        "warnings": list(proposal.warnings),
        "record": wire.record_to_doc(record),
        "final_revision": final_state.revision,
        "wall_time_seconds": elapsed,
    }


# --- randomized instances ----------------------------------------------------

@dataclass
class RandomInstance:
    """One generated desk-scale assignment problem."""

    pose: UserPose
    zones: list
    relevance: RelevanceSet
    transitions: TransitionMatrix
    pinned: Assignment


def generate_instance(
    rng: random.Random,
    catalog: list[AppDescriptor] | None = None,
    perm_budget: int = INSTANCE_PERM_BUDGET,
) -> RandomInstance:
    """Draw a random workspace around the observed study scale.

    Zone counts land in 2..5 and app counts in 4..10; templates are resampled
    until the exhaustive engine's evaluation count fits the per-instance
    budget, so oracle comparisons stay fast.
    """
    catalog = catalog or default_catalog()
    pose = UserPose(position=[0.0, 0.0, 0.0], forward=[0.0, 0.0, 1.0])
    kinds = [k for k in TemplateKind if k is not TemplateKind.OCCLUSION_FREE]

    n_apps = rng.randint(4, 10)
    app_ids = rng.sample([app.id for app in catalog], n_apps)
    app_order = [app.id for app in catalog if app.id in set(app_ids)]
    relevance = RelevanceSet(
        entries=tuple((app_id, round(rng.uniform(0.05, 1.0), 6)) for app_id in app_order),
        goal=Goal(text="generated instance"),
    )

    for _ in range(200):
        n_zones = rng.randint(2, 5)
        templates = [rng.choice(kinds) for _ in range(n_zones)]
        n_cells = sum(CELL_COUNTS[k] for k in templates)
        evaluations = math.perm(n_cells, min(n_apps, n_cells))
        if 0 < evaluations <= perm_budget:
            break
    else:
        templates = [TemplateKind.ONE_BY_ONE, TemplateKind.ONE_BY_TWO_V]

    zones = []
    for i, kind in enumerate(templates):
        azimuth = math.radians(rng.uniform(-100.0, 100.0))
        elevation = math.radians(rng.uniform(-20.0, 20.0))
        distance = rng.uniform(1.5, 3.5)
        position = np.array(
            [
                distance * math.cos(elevation) * math.sin(azimuth),
                distance * math.sin(elevation),
                distance * math.cos(elevation) * math.cos(azimuth),
            ]
        )
        zones.append(
            create_zone(
                f"z{i}",
                kind,
                rng.uniform(0.6, 2.0),
                rng.uniform(0.5, 1.5),
                position,
                pose,
            )
        )

    n = len(catalog)
    matrix = np.zeros((n, n))
    ids = [app.id for app in catalog]
    for i in range(n):
        row = [rng.random() if j != i else 0.0 for j in range(n)]
        total = sum(row)
        matrix[i] = [v / total for v in row]
    transitions = TransitionMatrix(apps=ids, matrix=matrix)

    return RandomInstance(
        pose=pose,
        zones=zones,
        relevance=relevance,
        transitions=transitions,
        pinned=Assignment(),
    )


def _engine_assignment(
    engine: str, instance: RandomInstance, config: EngineConfig
) -> Assignment:
    common = (
        instance.relevance,
        instance.zones,
        instance.pinned,
        instance.transitions,
        config.weights,
        instance.pose,
    )
    if engine == "greedy":
        return greedy_assign(*common)
    if engine == "oracle":
        return exhaustive_assign(*common)
    if engine in ("mock", "llm"):
        provider = MockProvider() if engine == "mock" else build_provider(config.provider)
        diagnostics = {}
        for app_id, _ in instance.relevance.entries:
            diagnostics.update(
                cost_matrix(
                    app_id,
                    instance.relevance,
                    instance.pinned.entries,
                    instance.transitions,
                    instance.zones,
                    instance.pose,
                    config.weights,
                ).entries
            )
        rules = ReadabilityRules.from_catalog(default_catalog(), config.sizing.alpha_min)
        payload = build_stage1_prompt(
            instance.relevance,
            instance.zones,
            instance.pinned,
            CostMatrix(entries=diagnostics),
            rules,
            instance.relevance.goal,
        )
        outcome = llm_assign(
            payload,
            provider,
            instance.relevance,
            instance.zones,
            instance.pinned,
            instance.transitions,
            config.weights,
            instance.pose,
        )
        return outcome.assignment
    raise ValidationError(f"unknown engine {engine!r}")


def compare_engines(
    scenario: Scenario,
    engines: list[str],
    trials: int,
    seed: int,
    clock=time.perf_counter,
) -> dict:
    """Score engines on random instances: mean cost, mean regret vs the oracle."""
    for engine in engines:
        if engine not in ENGINES:
            raise ValidationError(f"unknown engine {engine!r}")
    rng = random.Random(seed)
    table: dict[str, dict] = {engine: {"costs": [], "regrets": [], "runtime": 0.0} for engine in engines}
    for _ in range(trials):
        instance = generate_instance(rng, scenario.catalog)
        oracle = exhaustive_assign(
            instance.relevance,
            instance.zones,
            instance.pinned,
            instance.transitions,
            scenario.config.weights,
            instance.pose,
        )
        oracle_cost = assignment_cost(
            oracle,
            instance.relevance,
            instance.zones,
            instance.pinned,
            instance.transitions,
            scenario.config.weights,
            instance.pose,
        )
        for engine in engines:
            started = clock()
            assignment = (
                oracle
                if engine == "oracle"
                else _engine_assignment(engine, instance, scenario.config)
            )
            elapsed = clock() - started
            cost = (
                oracle_cost
                if engine == "oracle"
                else assignment_cost(
                    assignment,
                    instance.relevance,
                    instance.zones,
                    instance.pinned,
                    instance.transitions,
                    scenario.config.weights,
                    instance.pose,
                )
            )
            table[engine]["costs"].append(cost)
            table[engine]["regrets"].append(cost - oracle_cost)
            table[engine]["runtime"] += elapsed

    rows = {}
    if trials > 0:
        for engine in engines:
            stats = table[engine]
            rows[engine] = {
                "mean_cost": float(np.mean(stats["costs"])),
                "mean_regret": float(np.mean(stats["regrets"])),
                "runtime_seconds": stats["runtime"],
            }
    return {"engines": rows, "trials": trials, "seed": seed}
