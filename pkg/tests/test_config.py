import json

import pytest

from zoneplanner.config import (
    EngineConfig,
    build_provider,
    config_from_doc,
    config_to_doc,
    load_config,
)
from zoneplanner.errors import ValidationError
from zoneplanner.recommender import HTTPProvider, MockProvider


class TestLoadConfig:
    def test_defaults_without_file(self):
        config = load_config(None)
        assert config.provider.kind == "mock"
        assert config.weights.lambda_f == pytest.approx(1 / 3)
        assert config.sizing.grid_resolution == 41
        assert config.port == 8787

    def test_round_trip_through_doc(self):
        config = EngineConfig()
        config.provider.kind = "http"
        config.provider.endpoint = "https://llm.example/api"
        config.smoothing = 2
        restored = config_from_doc(config_to_doc(config))
        assert config_to_doc(restored) == config_to_doc(config)

    def test_file_loading(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({
            "provider": {"kind": "http", "endpoint": "https://llm.example", "model": "m1"},
            "sizing": {"alpha_min_degrees": 0.5, "omega_margin": 0.2},
            "port": 9001,
        }))
        config = load_config(path)
        assert config.provider.endpoint == "https://llm.example"
        assert config.sizing.omega_margin == 0.2
        assert config.port == 9001

    def test_malformed_file_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{nope")
        with pytest.raises(ValidationError):
            load_config(path)

    def test_environment_overrides(self, monkeypatch, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{}")
        monkeypatch.setenv("ZONEPLANNER_PROVIDER_ENDPOINT", "https://env.example")
        monkeypatch.setenv("ZONEPLANNER_PROVIDER_MODEL", "env-model")
        monkeypatch.setenv("ZONEPLANNER_PROVIDER_TIMEOUT", "3.5")
        config = load_config(path)
        assert config.provider.kind == "http"
        assert config.provider.endpoint == "https://env.example"
        assert config.provider.model == "env-model"
        assert config.provider.timeout == 3.5

    def test_unknown_provider_kind_rejected(self):
        with pytest.raises(ValidationError):
            config_from_doc({"provider": {"kind": "telepathy"}})


class TestBuildProvider:
    def test_mock_provider(self):
        config = EngineConfig()
        assert isinstance(build_provider(config.provider), MockProvider)

    def test_http_provider_reads_credential_env(self, monkeypatch):
        config = EngineConfig()
        config.provider.kind = "http"
        config.provider.endpoint = "https://llm.example"
        config.provider.credential_env = "TEST_PLANNER_KEY"
        monkeypatch.setenv("TEST_PLANNER_KEY", "s3cret")
        provider = build_provider(config.provider)
        assert isinstance(provider, HTTPProvider)
        assert provider.api_key == "s3cret"
