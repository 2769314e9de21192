#!/usr/bin/env python3
"""Regenerate scenarios/demo.json: four zones and the eight-app demo goal."""

import json
from pathlib import Path

from zoneplanner.geometry import UserPose
from zoneplanner.layout import TemplateKind
from zoneplanner.recommender import DEMO_GOAL, default_catalog
from zoneplanner.workspace import add_zone, create_workspace
from zoneplanner import wire

ROOT = Path(__file__).resolve().parent.parent


def build_workspace():
    pose = UserPose(position=[0.0, 0.0, 0.0], forward=[0.0, 0.0, 1.0])
    state = create_workspace("demo", pose)
    state = add_zone(state, "main", TemplateKind.TWO_BY_TWO, 2.4, 1.5, [0.0, 0.0, 2.0])
    state = add_zone(
        state, "side-right", TemplateKind.ONE_BY_TWO_V, 1.6, 1.2, [1.9, 0.0, 1.6]
    )
    state = add_zone(
        state, "side-left", TemplateKind.TWO_BY_ONE_H, 1.8, 1.3, [-1.9, 0.0, 1.6]
    )
    state = add_zone(
        state, "shelf", TemplateKind.ONE_BY_ONE, 1.2, 0.8, [0.0, 1.3, 2.2]
    )
    return state


def main():
    state = build_workspace()
    scenario = {
        "workspace": wire.state_to_doc(state),
        "goal": {"text": DEMO_GOAL, "source": "typed"},
        "catalog": [wire.app_to_doc(app) for app in default_catalog()],
        "engine": "mock",
        "seed": 0,
        "telemetry": None,
        # wider split margin: keeps optimized cells out of sliver territory so
        # the readability scale-up stays comfortably under its cap
        "config": {
            "sizing": {
                "alpha_min_degrees": 0.5,
                "omega_margin": 0.25,
                "grid_resolution": 41,
                "lambda_s": 0.5,
                "max_scale": 3.0,
            }
        },
    }
    out = ROOT / "scenarios" / "demo.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(wire.canonical_dumps(scenario) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
