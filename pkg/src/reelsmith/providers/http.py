"""Thin HTTP+JSON adapters for live services.

Each adapter POSTs a JSON body to its configured endpoint and maps transport
errors to ProviderUnavailable with the shared retry/backoff policy. Offline
runs never construct these; they exist so a deployment can point the same
pipeline at real chat/embedding/search services.
"""

from __future__ import annotations

from typing import Any, Callable, Optional

import numpy as np
import requests

from .base import ChatProvider, ProviderConfig, ProviderUnavailable, with_retries


def _post_json(
    config: ProviderConfig,
    body: dict[str, Any],
    session: Optional[requests.Session] = None,
    sleep: Callable[[float], None] | None = None,
) -> dict[str, Any]:
    sess = session or requests

    def attempt() -> dict[str, Any]:
        try:
            resp = sess.post(
                config.endpoint,
                json=body,
                timeout=config.timeout,
                headers={"Authorization": f"Bearer {config.credential}"} if config.credential else {},
            )
        except requests.RequestException as err:
            raise ProviderUnavailable(str(err)) from err
        if resp.status_code >= 500 or resp.status_code == 429:
            raise ProviderUnavailable(f"HTTP {resp.status_code}")
        resp.raise_for_status()
        return resp.json()

    kwargs: dict[str, Any] = {}
    if sleep is not None:
        kwargs["sleep"] = sleep
    return with_retries(attempt, config.max_retries, **kwargs)


class HttpChat(ChatProvider):
    """OpenAI-style chat completion endpoint."""

    def __init__(self, config: ProviderConfig, session: Optional[requests.Session] = None):
        self.config = config
        self.session = session

    def _complete_raw(self, messages: list[dict[str, str]]) -> str:
        body = {"model": self.config.model_name, "messages": messages, "temperature": 0}
        data = _post_json(self.config, body, self.session)
        return data["choices"][0]["message"]["content"]


class HttpEmbedding:
    """OpenAI-style embeddings endpoint; vectors are re-normalized to unit length."""

    def __init__(self, config: ProviderConfig, session: Optional[requests.Session] = None):
        self.config = config
        self.session = session

    def embed(self, texts: list[str]) -> np.ndarray:
        for text in texts:
            if not text:
                raise ValueError("cannot embed empty text")
        body = {"model": self.config.model_name, "input": list(texts)}
        data = _post_json(self.config, body, self.session)
        vectors = np.asarray([row["embedding"] for row in data["data"]], dtype=np.float64)
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        return vectors / norms


class HttpSearch:
    """Generic JSON search endpoint returning {results: [{title, snippet}]}."""

    def __init__(self, config: ProviderConfig, session: Optional[requests.Session] = None):
        self.config = config
        self.session = session

    def web_search(self, query: str) -> list[tuple[str, str]]:
        if not query.strip():
            raise ValueError("query must be non-empty")
        data = _post_json(self.config, {"query": query}, self.session)
        return [(row["title"], row["snippet"]) for row in data.get("results", [])][:10]
