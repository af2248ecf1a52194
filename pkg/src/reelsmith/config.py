"""Run configuration: one JSON (or TOML, when available) file plus env-var credentials."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .providers.base import ProviderConfig

ENV_PREFIX = "REELSMITH_"


@dataclass
class RunConfig:
    seed: int = 0
    global_rate: int = 30
    embedding_dim: int = 64
    retrieval_k: int = 5
    replan_rounds: int = 1
    review_cycles: int = 1
    concurrency: int = 4
    voice_id: str = "narrator"
    duration_hint_seconds: float = 153 / 30
    min_shot_seconds: float = 0.5
    loudness_targets: dict[str, float] = field(
        default_factory=lambda: {
            "voice_over": -16.0,
            "ambience": -28.0,
            "music": -28.0,
            "foley": -20.0,
            "sfx": -20.0,
        }
    )
    corpus_path: Optional[str] = None
    audio_library_path: Optional[str] = None
    providers: dict[str, ProviderConfig] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "providers":
                value = {
                    name: {
                        "endpoint": p.endpoint,
                        "model_name": p.model_name,
                        "timeout": p.timeout,
                        "max_retries": p.max_retries,
                    }
                    for name, p in value.items()
                }
            out[f.name] = value
        return out


def _parse_providers(raw: dict[str, Any]) -> dict[str, ProviderConfig]:
    providers = {}
    for name, cfg in raw.items():
        providers[name] = ProviderConfig(
            endpoint=cfg.get("endpoint", ""),
            credential=cfg.get("credential", ""),
            model_name=cfg.get("model_name", ""),
            timeout=cfg.get("timeout", 60.0),
            max_retries=cfg.get("max_retries", 2),
        )
    return providers


def _apply_env_credentials(providers: dict[str, ProviderConfig]) -> None:
    """REELSMITH_<PROVIDER>_CREDENTIAL env vars override file-stored secrets."""
    for name, provider in providers.items():
        env = os.environ.get(f"{ENV_PREFIX}{name.upper()}_CREDENTIAL")
        if env:
            provider.credential = env


def load_config(path: Optional[Path]) -> RunConfig:
    if path is None or not Path(path).exists():
        return RunConfig()
    path = Path(path)
    if path.suffix == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ImportError as err:
            raise ValueError("TOML config requires Python 3.11+; use JSON instead") from err
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    else:
        raw = json.loads(path.read_text(encoding="utf-8"))
    known = {f.name for f in fields(RunConfig)}
    kwargs: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        if key == "providers":
            value = _parse_providers(value)
        kwargs[key] = value
    config = RunConfig(**kwargs)
    _apply_env_credentials(config.providers)
    return config


def save_config(config: RunConfig, path: Path) -> None:
    Path(path).write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
