"""Provider contracts, shared error types, retry policy, and structured-output handling."""

from __future__ import annotations

import hashlib
import json
import threading
import time
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Any, Callable, ContextManager, Optional

import jsonschema


class ProviderError(Exception):
    """Base class for provider-side failures."""


class ProviderUnavailable(ProviderError):
    """Transport failure that persisted through the retry budget."""


class MalformedOutput(ProviderError):
    """Provider output failed schema or semantic validation after a reprompt."""


class ContentRejected(ProviderError):
    """Provider refused to act on the prompt."""


@dataclass
class ProviderConfig:
    endpoint: str = ""
    credential: str = ""
    model_name: str = ""
    timeout: float = 60.0
    max_retries: int = 2
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")


def canonical_json(value: Any) -> str:
    """Stable JSON text for hashing and transcript storage."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_digest(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def with_retries(
    fn: Callable[[], Any],
    max_retries: int,
    sleep: Callable[[float], None] = time.sleep,
    base_delay: float = 1.0,
) -> Any:
    """Run `fn`, retrying transport failures with doubling backoff (1 s, 2 s, ...)."""
    attempt = 0
    while True:
        try:
            return fn()
        except ProviderUnavailable:
            if attempt >= max_retries:
                raise
            sleep(base_delay * (2**attempt))
            attempt += 1


def parse_json_payload(text: str) -> Any:
    """Parse a JSON object from model output, tolerating surrounding prose."""
    text = (text or "").strip()
    try:
        return json.loads(text)
    except (json.JSONDecodeError, ValueError):
        pass
    start, end = text.find("{"), text.rfind("}")
    if start != -1 and end > start:
        return json.loads(text[start : end + 1])
    raise ValueError("no JSON object found in output")


def _check_messages(messages: list[dict[str, str]]) -> None:
    if not messages:
        raise ValueError("messages must be non-empty")
    for msg in messages:
        if msg.get("role") not in ("system", "user", "assistant"):
            raise ValueError(f"invalid message role: {msg.get('role')!r}")
        if not msg.get("content"):
            raise ValueError("message content must be non-empty")


class ChatProvider:
    """Role-tagged chat completion with optional schema-validated structured output.

    Subclasses implement `_complete_raw`. When a schema is supplied, the reply
    is parsed as JSON and validated; one corrective reprompt is attempted
    before giving up with MalformedOutput.
    """

    limiter: Optional[threading.Semaphore] = None

    def _limit(self) -> ContextManager[Any]:
        return self.limiter if self.limiter is not None else nullcontext()

    def _complete_raw(self, messages: list[dict[str, str]]) -> str:
        raise NotImplementedError

    def chat_complete(
        self, messages: list[dict[str, str]], schema: Optional[dict[str, Any]] = None
    ) -> Any:
        _check_messages(messages)
        with self._limit():
            text = self._complete_raw(messages)
        if schema is None:
            return text
        try:
            value = parse_json_payload(text)
            jsonschema.validate(value, schema)
            return value
        except (ValueError, jsonschema.ValidationError) as first_err:
            reprompt = messages + [
                {"role": "assistant", "content": text},
                {
                    "role": "user",
                    "content": (
                        "The previous reply was not valid against the required JSON "
                        f"schema ({first_err}). Reply again with only a valid JSON object."
                    ),
                },
            ]
            with self._limit():
                text2 = self._complete_raw(reprompt)
            try:
                value = parse_json_payload(text2)
                jsonschema.validate(value, schema)
                return value
            except (ValueError, jsonschema.ValidationError) as second_err:
                raise MalformedOutput(
                    f"structured output failed validation after reprompt: {second_err}"
                ) from second_err


@dataclass
class ProviderSuite:
    """The full set of external services a pipeline run talks to."""

    chat: Any
    embedding: Any
    media_review: Any
    video: Any
    voice: Any
    search: Any

    @classmethod
    def limited(cls, limit: int = 4, **providers: Any) -> "ProviderSuite":
        suite = cls(**providers)
        sem = threading.Semaphore(limit)
        for provider in providers.values():
            if hasattr(provider, "limiter"):
                provider.limiter = sem
        return suite
