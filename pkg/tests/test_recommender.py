import json

import pytest

from zoneplanner.assignment import Assignment
from zoneplanner.costmodel import CostMatrix
from zoneplanner.errors import DomainError, ProviderError
from zoneplanner.layout import TemplateKind, create_zone
from zoneplanner.recommender import (
    AppDescriptor,
    Goal,
    MockProvider,
    ReadabilityRules,
    RelevanceSet,
    build_relevance_prompt,
    build_stage1_prompt,
    default_catalog,
    fallback_relevance,
    predict_relevance,
)


class FailingProvider:
    def complete(self, payload):
        raise ProviderError("unreachable")


class GarbageProvider:
    def complete(self, payload):
        return "I think you should open the IDE!"


class FixedProvider:
    def __init__(self, response):
        self.response = response

    def complete(self, payload):
        return self.response


class TestGoal:
    def test_blank_goal_rejected(self):
        with pytest.raises(DomainError):
            Goal(text="   ")

    def test_transcribed_source_allowed(self):
        assert Goal(text="plan a trip", source="transcribed").source == "transcribed"


class TestRelevanceSet:
    def test_duplicate_apps_rejected(self):
        with pytest.raises(DomainError):
            RelevanceSet(
                entries=(("ide", 0.5), ("ide", 0.6)), goal=Goal(text="g")
            )

    def test_out_of_range_scores_rejected(self):
        with pytest.raises(DomainError):
            RelevanceSet(entries=(("ide", 1.2),), goal=Goal(text="g"))

    def test_score_lookup_with_default(self):
        rel = RelevanceSet(entries=(("ide", 0.7),), goal=Goal(text="g"))
        assert rel.score("ide") == 0.7
        assert rel.score("unknown") == 1.0
        assert rel.score("unknown", default=0.0) == 0.0


class TestPredictRelevance:
    def test_mock_fixture_round_trip(self):
        catalog = default_catalog()
        rel = predict_relevance(Goal(text="coding a web game"), catalog, MockProvider())
        scores = dict(rel.entries)
        assert scores == {"ide": 0.95, "terminal": 0.9, "browser": 0.8, "chat": 0.5}
        assert not rel.fallback

    def test_entries_in_catalog_order(self):
        catalog = default_catalog()
        rel = predict_relevance(Goal(text="coding a web game"), catalog, MockProvider())
        order = [app.id for app in catalog if app.id in dict(rel.entries)]
        assert [a for a, _ in rel.entries] == order

    def test_empty_catalog_rejected(self):
        with pytest.raises(DomainError):
            predict_relevance(Goal(text="anything"), [], MockProvider())

    def test_scores_clamped(self):
        provider = FixedProvider(json.dumps({"ide": 1.7, "mail": -0.4}))
        rel = predict_relevance(Goal(text="g"), default_catalog(), provider)
        scores = dict(rel.entries)
        assert scores["ide"] == 1.0
        assert scores["mail"] == 0.0

    def test_unknown_ids_dropped(self):
        provider = FixedProvider(json.dumps({"ide": 0.5, "nonexistent-app": 0.9}))
        rel = predict_relevance(Goal(text="g"), default_catalog(), provider)
        assert "nonexistent-app" not in dict(rel.entries)
        assert set(dict(rel.entries)) <= {a.id for a in default_catalog()}

    def test_provider_failure_falls_back(self):
        rel = predict_relevance(Goal(text="writing docs"), default_catalog(), FailingProvider())
        assert rel.fallback
        assert len(rel.entries) == len(default_catalog())

    def test_malformed_output_falls_back(self):
        rel = predict_relevance(Goal(text="writing docs"), default_catalog(), GarbageProvider())
        assert rel.fallback

    def test_fallback_never_empty(self):
        catalog = [AppDescriptor(id="x", name="X", category="misc")]
        rel = fallback_relevance(Goal(text="totally unrelated goal"), catalog)
        assert len(rel.entries) == 1

    def test_output_always_subset_of_catalog(self):
        catalog = default_catalog()
        for goal in ("coding a web game", "designing a poster", "random nonsense"):
            rel = predict_relevance(Goal(text=goal), catalog, MockProvider())
            assert set(dict(rel.entries)) <= {a.id for a in catalog}

    def test_mock_pipeline_deterministic(self):
        catalog = default_catalog()
        first = predict_relevance(Goal(text="study for exams"), catalog, MockProvider())
        second = predict_relevance(Goal(text="study for exams"), catalog, MockProvider())
        assert first == second


class TestPrompts:
    def make_inputs(self, pose):
        zone = create_zone("z1", TemplateKind.TWO_BY_TWO, 1.6, 1.0, [0, 0, 2], pose)
        relevance = RelevanceSet(
            entries=(("ide", 0.9), ("mail", 0.4)), goal=Goal(text="plan the day")
        )
        cost = CostMatrix(entries={("ide", "z1", 0): 0.25, ("ide", "z1", 1): 0.5})
        rules = ReadabilityRules.from_catalog(default_catalog(), alpha_min=0.008726646259971648)
        return relevance, [zone], Assignment(), cost, rules

    def test_payload_has_exactly_five_sections(self, pose):
        relevance, zones, occupancy, cost, rules = self.make_inputs(pose)
        payload = build_stage1_prompt(
            relevance, zones, occupancy, cost, rules, relevance.goal
        )
        doc = json.loads(payload)
        assert sorted(doc["sections"]) == [
            "applications", "cost_matrix", "goal", "readability", "zones",
        ]
        assert len(doc["sections"]) == 5
        assert "response_schema" in doc

    def test_payload_bytes_deterministic(self, pose):
        relevance, zones, occupancy, cost, rules = self.make_inputs(pose)
        a = build_stage1_prompt(relevance, zones, occupancy, cost, rules, relevance.goal)
        b = build_stage1_prompt(relevance, zones, occupancy, cost, rules, relevance.goal)
        assert a == b

    def test_zones_section_carries_layout_and_occupancy(self, pose):
        relevance, zones, occupancy, cost, rules = self.make_inputs(pose)
        zones[0].cells[1].occupant = "notes"
        payload = build_stage1_prompt(relevance, zones, occupancy, cost, rules, relevance.goal)
        doc = json.loads(payload)
        zone_doc = doc["sections"]["zones"][0]
        assert zone_doc["template"] == "2x2"
        assert zone_doc["cells"][1]["occupant"] == "notes"
        assert zone_doc["split"] == {"w0": 0.8, "h0": 0.5}

    def test_relevance_prompt_lists_catalog(self):
        payload = build_relevance_prompt(Goal(text="g"), default_catalog())
        doc = json.loads(payload)
        assert doc["kind"] == "relevance_request"
        assert len(doc["catalog"]) == 20


class TestMockProvider:
    def test_unknown_payload_kind_rejected(self):
        with pytest.raises(ProviderError):
            MockProvider().complete(json.dumps({"kind": "mystery"}))

    def test_scripted_assignment_fixture(self):
        fixtures = {"g": {"assignment": {"ide": ["z1", 0]}}}
        provider = MockProvider(fixtures=fixtures)
        raw = provider.complete(
            json.dumps({"kind": "assignment_request", "goal": {"text": "g"}})
        )
        assert json.loads(raw) == {"ide": ["z1", 0]}

    def test_default_assignment_fills_in_relevance_order(self):
        request = {
            "kind": "assignment_request",
            "goal": {"text": "unknown"},
            "sections": {
                "applications": [
                    {"id": "mail", "relevance": 0.4},
                    {"id": "ide", "relevance": 0.9},
                ],
                "zones": [
                    {
                        "id": "z1",
                        "cells": [
                            {"index": 0, "occupant": None},
                            {"index": 1, "occupant": None},
                        ],
                    }
                ],
            },
        }
        raw = MockProvider().complete(json.dumps(request))
        assert json.loads(raw) == {"ide": ["z1", 0], "mail": ["z1", 1]}

    def test_failure_knob(self):
        with pytest.raises(ProviderError):
            MockProvider(fail=True).complete(
                json.dumps({"kind": "relevance_request", "goal": {"text": "g"}})
            )
