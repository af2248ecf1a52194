"""Record/replay of provider exchanges as JSON-lines transcripts.

A recording wrapper captures every raw request/response pair; a replay suite
serves responses back by request digest, so a recorded pipeline run
reproduces bit-identically without touching any service.
"""

from __future__ import annotations

import base64
import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from ..model import GeneratedClip
from .base import (
    ChatProvider,
    ProviderUnavailable,
    canonical_json,
    content_digest,
    file_digest,
)


class ReplayMiss(ProviderUnavailable):
    """The transcript holds no response for this request."""


@dataclass
class TranscriptEntry:
    op: str
    request: dict[str, Any]
    request_digest: str
    response: dict[str, Any]
    response_digest: str
    wall_time: float


@dataclass
class Transcript:
    path: Optional[Path] = None
    entries: list[TranscriptEntry] = field(default_factory=list)

    def append(self, op: str, request: dict[str, Any], response: dict[str, Any], wall_time: float) -> TranscriptEntry:
        entry = TranscriptEntry(
            op=op,
            request=request,
            request_digest=content_digest(request),
            response=response,
            response_digest=content_digest(response),
            wall_time=wall_time,
        )
        self.entries.append(entry)
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(
                    canonical_json(
                        {
                            "op": entry.op,
                            "request": entry.request,
                            "request_digest": entry.request_digest,
                            "response": entry.response,
                            "response_digest": entry.response_digest,
                            "wall_time": entry.wall_time,
                        }
                    )
                    + "\n"
                )
        return entry

    def lookup(self, op: str, request: dict[str, Any]) -> dict[str, Any]:
        digest = content_digest(request)
        for entry in self.entries:
            if entry.op == op and entry.request_digest == digest:
                return entry.response
        raise ReplayMiss(f"no transcript entry for op={op} digest={digest[:12]}")

    def digest(self) -> str:
        h = hashlib.sha256()
        for entry in self.entries:
            h.update(entry.request_digest.encode())
            h.update(entry.response_digest.encode())
        return h.hexdigest()

    @classmethod
    def load(cls, path: Path) -> "Transcript":
        transcript = cls(path=None)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                transcript.entries.append(
                    TranscriptEntry(
                        op=row["op"],
                        request=row["request"],
                        request_digest=row["request_digest"],
                        response=row["response"],
                        response_digest=row["response_digest"],
                        wall_time=row["wall_time"],
                    )
                )
        return transcript


def _clip_response(clip: GeneratedClip, media_root: Path) -> dict[str, Any]:
    data = Path(clip.media_path).read_bytes()
    return {
        "relpath": str(Path(clip.media_path).relative_to(media_root)),
        "bytes_b64": base64.b64encode(data).decode("ascii"),
        "width": clip.width,
        "height": clip.height,
        "frame_count": clip.frame_count,
        "frame_rate": clip.frame_rate,
    }


def _restore_file(response: dict[str, Any], media_root: Path) -> Path:
    path = media_root / response["relpath"]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(base64.b64decode(response["bytes_b64"]))
    return path


class RecordingChat(ChatProvider):
    def __init__(self, inner: ChatProvider, transcript: Transcript):
        self.inner = inner
        self.transcript = transcript

    def _complete_raw(self, messages: list[dict[str, str]]) -> str:
        t0 = time.monotonic()
        text = self.inner._complete_raw(messages)
        self.transcript.append(
            "chat", {"messages": messages}, {"text": text}, time.monotonic() - t0
        )
        return text


class ReplayChat(ChatProvider):
    def __init__(self, transcript: Transcript):
        self.transcript = transcript

    def _complete_raw(self, messages: list[dict[str, str]]) -> str:
        return self.transcript.lookup("chat", {"messages": messages})["text"]


class RecordingEmbedding:
    def __init__(self, inner: Any, transcript: Transcript):
        self.inner = inner
        self.transcript = transcript

    def embed(self, texts: list[str]):
        import numpy as np

        t0 = time.monotonic()
        vectors = self.inner.embed(texts)
        arr = np.asarray(vectors, dtype=np.float64)
        self.transcript.append(
            "embed",
            {"texts": list(texts)},
            {
                "dim": int(arr.shape[1]) if arr.ndim == 2 else 0,
                "vectors_b64": base64.b64encode(arr.tobytes()).decode("ascii"),
            },
            time.monotonic() - t0,
        )
        return vectors


class ReplayEmbedding:
    def __init__(self, transcript: Transcript):
        self.transcript = transcript

    def embed(self, texts: list[str]):
        import numpy as np

        response = self.transcript.lookup("embed", {"texts": list(texts)})
        raw = base64.b64decode(response["vectors_b64"])
        return np.frombuffer(raw, dtype=np.float64).reshape(len(texts), response["dim"]).copy()


class RecordingMediaReview:
    def __init__(self, inner: Any, transcript: Transcript):
        self.inner = inner
        self.transcript = transcript

    def review_media(self, media: str, prompt: str) -> str:
        request = {"media_sha256": file_digest(media), "prompt": prompt}
        t0 = time.monotonic()
        text = self.inner.review_media(media, prompt)
        self.transcript.append("review_media", request, {"text": text}, time.monotonic() - t0)
        return text


class ReplayMediaReview:
    def __init__(self, transcript: Transcript):
        self.transcript = transcript

    def review_media(self, media: str, prompt: str) -> str:
        request = {"media_sha256": file_digest(media), "prompt": prompt}
        return self.transcript.lookup("review_media", request)["text"]


class RecordingVideo:
    def __init__(self, inner: Any, transcript: Transcript, media_root: Path):
        self.inner = inner
        self.transcript = transcript
        self.media_root = Path(media_root)

    def generate_video(self, prompt: str, reference_images: list[str], duration_hint: float) -> GeneratedClip:
        request = {
            "prompt": prompt,
            "reference_images": [file_digest(p) for p in reference_images],
            "duration_hint": duration_hint,
        }
        t0 = time.monotonic()
        clip = self.inner.generate_video(prompt, reference_images, duration_hint)
        self.transcript.append(
            "generate_video", request, _clip_response(clip, self.media_root), time.monotonic() - t0
        )
        return clip


class ReplayVideo:
    def __init__(self, transcript: Transcript, media_root: Path):
        self.transcript = transcript
        self.media_root = Path(media_root)

    def generate_video(self, prompt: str, reference_images: list[str], duration_hint: float) -> GeneratedClip:
        request = {
            "prompt": prompt,
            "reference_images": [file_digest(p) for p in reference_images],
            "duration_hint": duration_hint,
        }
        response = self.transcript.lookup("generate_video", request)
        path = _restore_file(response, self.media_root)
        return GeneratedClip(
            shot_id="",
            media_path=str(path),
            width=response["width"],
            height=response["height"],
            frame_count=response["frame_count"],
            frame_rate=response["frame_rate"],
        )


class RecordingVoice:
    def __init__(self, inner: Any, transcript: Transcript, media_root: Path):
        self.inner = inner
        self.transcript = transcript
        self.media_root = Path(media_root)

    def synthesize_voice(self, text: str, voice_id: str) -> tuple[str, Fraction]:
        request = {"text": text, "voice_id": voice_id}
        t0 = time.monotonic()
        path, duration = self.inner.synthesize_voice(text, voice_id)
        self.transcript.append(
            "synthesize_voice",
            request,
            {
                "relpath": str(Path(path).relative_to(self.media_root)),
                "bytes_b64": base64.b64encode(Path(path).read_bytes()).decode("ascii"),
                "duration": [duration.numerator, duration.denominator],
            },
            time.monotonic() - t0,
        )
        return path, duration


class ReplayVoice:
    def __init__(self, transcript: Transcript, media_root: Path):
        self.transcript = transcript
        self.media_root = Path(media_root)

    def synthesize_voice(self, text: str, voice_id: str) -> tuple[str, Fraction]:
        response = self.transcript.lookup("synthesize_voice", {"text": text, "voice_id": voice_id})
        path = _restore_file(response, self.media_root)
        num, den = response["duration"]
        return str(path), Fraction(num, den)


class RecordingSearch:
    def __init__(self, inner: Any, transcript: Transcript):
        self.inner = inner
        self.transcript = transcript

    def web_search(self, query: str) -> list[tuple[str, str]]:
        t0 = time.monotonic()
        results = self.inner.web_search(query)
        self.transcript.append(
            "web_search",
            {"query": query},
            {"results": [[t, s] for t, s in results]},
            time.monotonic() - t0,
        )
        return results


class ReplaySearch:
    def __init__(self, transcript: Transcript):
        self.transcript = transcript

    def web_search(self, query: str) -> list[tuple[str, str]]:
        response = self.transcript.lookup("web_search", {"query": query})
        return [(t, s) for t, s in response["results"]]


def recording_suite(suite: Any, transcript: Transcript, media_root: Path) -> Any:
    from .base import ProviderSuite

    return ProviderSuite(
        chat=RecordingChat(suite.chat, transcript),
        embedding=RecordingEmbedding(suite.embedding, transcript),
        media_review=RecordingMediaReview(suite.media_review, transcript),
        video=RecordingVideo(suite.video, transcript, media_root),
        voice=RecordingVoice(suite.voice, transcript, media_root),
        search=RecordingSearch(suite.search, transcript),
    )


def replay_suite(transcript: Transcript, media_root: Path) -> Any:
    from .base import ProviderSuite

    return ProviderSuite(
        chat=ReplayChat(transcript),
        embedding=ReplayEmbedding(transcript),
        media_review=ReplayMediaReview(transcript),
        video=ReplayVideo(transcript, media_root),
        voice=ReplayVoice(transcript, media_root),
        search=ReplaySearch(transcript),
    )
