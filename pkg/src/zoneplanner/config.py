"""Engine and service configuration: file-based with environment overrides.

Credentials never live in config files; the file names the environment
variable that holds them. Provider endpoint, model, and timeout may also be
overridden through the environment for headless deployments.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .costmodel import CostWeights
from .errors import ValidationError
from .recommender import HTTPProvider, MockProvider, Provider
from .sizing import SizingConfig
from .wire import (
    sizing_config_from_doc,
    sizing_config_to_doc,
    weights_from_doc,
    weights_to_doc,
)

ENV_ENDPOINT = "ZONEPLANNER_PROVIDER_ENDPOINT"
ENV_MODEL = "ZONEPLANNER_PROVIDER_MODEL"
ENV_TIMEOUT = "ZONEPLANNER_PROVIDER_TIMEOUT"
DEFAULT_CREDENTIAL_ENV = "ZONEPLANNER_PROVIDER_KEY"


@dataclass
class ProviderConfig:
    kind: str = "mock"  # mock | http
    endpoint: str = ""
    credential_env: str = DEFAULT_CREDENTIAL_ENV
    model: str = ""
    timeout: float = 10.0

    def __post_init__(self):
        if self.kind not in ("mock", "http"):
            raise ValidationError(f"unknown provider kind {self.kind!r}")


@dataclass
class EngineConfig:
    """Everything the service and the scenario runner need to run the pipeline."""

    weights: CostWeights = field(default_factory=CostWeights)
    sizing: SizingConfig = field(default_factory=SizingConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    smoothing: int = 1
    host: str = "127.0.0.1"
    port: int = 8787
    snapshot_dir: str | None = None


def config_to_doc(config: EngineConfig) -> dict:
    return {
        "weights": weights_to_doc(config.weights),
        "sizing": sizing_config_to_doc(config.sizing),
        "provider": {
            "kind": config.provider.kind,
            "endpoint": config.provider.endpoint,
            "credential_env": config.provider.credential_env,
            "model": config.provider.model,
            "timeout": config.provider.timeout,
        },
        "smoothing": config.smoothing,
        "host": config.host,
        "port": config.port,
        "snapshot_dir": config.snapshot_dir,
    }


def config_from_doc(doc: dict) -> EngineConfig:
    provider_doc = doc.get("provider", {})
    provider = ProviderConfig(
        kind=str(provider_doc.get("kind", "mock")),
        endpoint=str(provider_doc.get("endpoint", "")),
        credential_env=str(
            provider_doc.get("credential_env", DEFAULT_CREDENTIAL_ENV)
        ),
        model=str(provider_doc.get("model", "")),
        timeout=float(provider_doc.get("timeout", 10.0)),
    )
    return EngineConfig(
        weights=weights_from_doc(doc["weights"]) if "weights" in doc else CostWeights(),
        sizing=sizing_config_from_doc(doc["sizing"])
        if "sizing" in doc
        else SizingConfig(),
        provider=provider,
        smoothing=int(doc.get("smoothing", 1)),
        host=str(doc.get("host", "127.0.0.1")),
        port=int(doc.get("port", 8787)),
        snapshot_dir=doc.get("snapshot_dir"),
    )


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Load configuration from a JSON file, then apply environment overrides."""
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot load config {path}: {exc}")
        config = config_from_doc(doc)
    else:
        config = EngineConfig()

    if os.environ.get(ENV_ENDPOINT):
        config.provider.endpoint = os.environ[ENV_ENDPOINT]
        config.provider.kind = "http"
    if os.environ.get(ENV_MODEL):
        config.provider.model = os.environ[ENV_MODEL]
    if os.environ.get(ENV_TIMEOUT):
        config.provider.timeout = float(os.environ[ENV_TIMEOUT])
    return config


def build_provider(config: ProviderConfig) -> Provider:
    if config.kind == "mock":
        return MockProvider()
    credential = os.environ.get(config.credential_env, "")
    return HTTPProvider(
        endpoint=config.endpoint,
        api_key=credential,
        model=config.model,
        timeout=config.timeout,
    )
