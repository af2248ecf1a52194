"""External-service abstractions: contracts, offline mocks, transcripts, HTTP adapters."""

from .base import (
    ChatProvider,
    ContentRejected,
    MalformedOutput,
    ProviderConfig,
    ProviderError,
    ProviderSuite,
    ProviderUnavailable,
    canonical_json,
    content_digest,
    file_digest,
    with_retries,
)
from .mock import mock_suite
from .transcript import Transcript, ReplayMiss, recording_suite, replay_suite

__all__ = [
    "ChatProvider",
    "ContentRejected",
    "MalformedOutput",
    "ProviderConfig",
    "ProviderError",
    "ProviderSuite",
    "ProviderUnavailable",
    "ReplayMiss",
    "Transcript",
    "canonical_json",
    "content_digest",
    "file_digest",
    "mock_suite",
    "recording_suite",
    "replay_suite",
    "with_retries",
]
