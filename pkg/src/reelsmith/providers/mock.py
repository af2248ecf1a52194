"""Deterministic offline stand-ins for every external service.

Each mock output is a pure function of (seed, request content): the chat mock
parses the task tag and JSON payload that pipeline prompts carry and composes
a schema-valid reply from seeded word banks; media mocks write byte-stable
placeholder files. Running any pipeline twice with the same seed produces
identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
import wave
from contextlib import nullcontext
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..model import GeneratedClip
from .base import ChatProvider, ContentRejected, canonical_json

SHOT_TYPES = ["extreme-wide", "wide", "medium", "close-up", "extreme-close-up", "insert"]
CAMERA_MOVES = [
    "slow dolly-in",
    "static on tripod",
    "handheld drift",
    "lateral tracking",
    "crane descent",
    "slow push-in",
]
CAMERA_ANGLES = ["eye level", "low angle", "high angle", "over-the-shoulder", "top-down"]
ATMOSPHERES = [
    "overcast stillness",
    "warm dusk haze",
    "hard noon light",
    "cold blue night",
    "amber interior glow",
]
TIMES_OF_DAY = ["dawn", "morning", "noon", "dusk", "night"]
VISUAL_ELEMENTS = [
    "rain-streaked glass",
    "long shadows",
    "drifting dust motes",
    "flickering signage",
    "wind-bent grass",
    "scattered papers",
]
SOUND_NOTES = [
    "low wind over open ground, sparse birdsong",
    "room tone with a ticking clock, muffled street noise",
    "distant traffic hum, occasional door slams",
    "gentle rain on a tin roof, soft thunder far away",
]
FOLEY_EVENTS = ["footsteps on gravel", "cloth rustle", "a cup set down", "door latch click"]
SFX_EVENTS = ["distant thunder roll", "sudden gust of wind", "glass chime", "engine passing by"]
VERB_PHRASES = [
    "waits where the road bends",
    "keeps an old promise",
    "carries something that cannot be put down",
    "watches the light change",
    "counts what is left",
]


def _digest_int(*parts: str) -> int:
    h = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big")


def _rng(seed: int, *parts: str) -> random.Random:
    return random.Random(_digest_int(str(seed), *parts))


def _pick(rng: random.Random, bank: list[str]) -> str:
    return bank[rng.randrange(len(bank))]


def _task_tag(messages: list[dict[str, str]]) -> str:
    for msg in messages:
        if msg["role"] == "system":
            m = re.match(r"task:\s*(\S+)", msg["content"])
            if m:
                return m.group(1)
    return ""


def _payload(messages: list[dict[str, str]]) -> Any:
    for msg in messages:
        if msg["role"] == "user":
            try:
                return json.loads(msg["content"])
            except (json.JSONDecodeError, ValueError):
                return {}
    return {}


class MockChat(ChatProvider):
    """Task-aware scripted chat model."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.calls = 0

    def _complete_raw(self, messages: list[dict[str, str]]) -> str:
        self.calls += 1
        task = _task_tag(messages)
        payload = _payload(messages)
        rng = _rng(self.seed, task, canonical_json(payload), str(len(messages)))
        handler = getattr(self, f"_task_{task.replace('-', '_')}", None)
        if handler is None:
            return f"({task or 'chat'}) acknowledged."
        return json.dumps(handler(payload, rng, messages), sort_keys=True, ensure_ascii=False)

    # -- script structuring ------------------------------------------------

    def _task_expand_synopsis(self, payload, rng, messages):
        theme = payload.get("theme", "").strip().rstrip(".")
        chars = payload.get("characters", [])
        locs = payload.get("locations", [])
        parts = [f"{theme}."]
        for loc in locs:
            parts.append(f"The story unfolds around {loc}.")
        for name in chars:
            parts.append(f"{name} {_pick(rng, VERB_PHRASES)}.")
        if len(chars) >= 2:
            parts.append(f"When {chars[0]} and {chars[1]} finally meet, neither says what they came to say.")
        parts.append("By the end, what was lost is named, and what remains is chosen.")
        return {"synopsis": " ".join(parts)}

    def _task_expand_simplified(self, payload, rng, messages):
        synopsis = payload.get("synopsis", "")
        chars = payload.get("characters", [])
        lines = [
            f"Background: {synopsis}",
            f"Causal chain: {' then '.join(f'{c} acts' for c in chars) or 'events unfold'}, and each act narrows the next choice.",
            f"Development: pressure builds as {', '.join(chars) or 'the players'} misread one another.",
            "Outcome: a small honest gesture undoes the standoff, at a cost.",
        ]
        return {"simplified": "\n".join(lines)}

    def _task_expand_detailed(self, payload, rng, messages):
        chars = payload.get("characters", [])
        locs = payload.get("locations", []) or ["the place"]
        entries = []
        lead = chars[0] if chars else "the lead"
        entries.append(
            {"text": f"{lead} arrives at {locs[0]}, pausing at the threshold before stepping in.", "tag": "primary"}
        )
        for loc in locs:
            entries.append(
                {"text": f"Establishing view of {loc}, empty and waiting under changing light.", "tag": "contextual"}
            )
        for name in chars[1:]:
            entries.append(
                {"text": f"{name} studies {lead} from across the room, weighing whether to speak.", "tag": "primary"}
            )
        entries.append(
            {"text": f"{lead} sets down what they carried; the gesture says more than the words.", "tag": "primary"}
        )
        symbol = _pick(rng, VISUAL_ELEMENTS)
        entries.append(
            {"text": f"A slow image of {symbol}, holding the feeling the characters cannot voice.", "tag": "metaphorical"}
        )
        return {"entries": entries}

    def _task_segment_scene_blocks(self, payload, rng, messages):
        entries = payload.get("entries", [])
        chars = payload.get("characters", [])
        locs = payload.get("locations", []) or ["the place"]
        n = len(entries)
        chunk = 3
        blocks = []
        for b, start in enumerate(range(0, n, chunk)):
            idxs = list(range(start, min(start + chunk, n)))
            texts = " ".join(entries[i]["text"] for i in idxs)
            loc = next((l for l in locs if l in texts), locs[b % len(locs)])
            block_rng = _rng(self.seed, "segment-block", texts)
            blocks.append(
                {
                    "entry_indices": idxs,
                    "location": loc,
                    "time_of_day": TIMES_OF_DAY[b % len(TIMES_OF_DAY)],
                    "characters": [c for c in chars if c in texts],
                    "visual_elements": [_pick(block_rng, VISUAL_ELEMENTS), _pick(block_rng, VISUAL_ELEMENTS)],
                    "narrative_objective": f"Establish what scene {b} must change: {texts.split('.')[0].strip().lower()}.",
                    "rough_sound_note": _pick(block_rng, SOUND_NOTES),
                }
            )
        return {"blocks": blocks}

    # -- camera planning ----------------------------------------------------

    def _task_replan_shots(self, payload, rng, messages):
        shots = payload.get("block", {}).get("shots", [])
        turn = sum(1 for m in messages if m["role"] == "user")
        out = []
        for shot in shots:
            shot_rng = _rng(self.seed, "replan", shot.get("id", ""), str(turn))
            out.append(
                {
                    "id": shot.get("id", ""),
                    "content_prompt": shot.get("content_prompt", ""),
                    "shot_type": _pick(shot_rng, SHOT_TYPES),
                    "camera_movement": _pick(shot_rng, CAMERA_MOVES),
                    "camera_angle": _pick(shot_rng, CAMERA_ANGLES),
                    "atmosphere": _pick(shot_rng, ATMOSPHERES),
                }
            )
        return {"shots": out}

    # -- audience and editing ------------------------------------------------

    def _task_audience_profile(self, payload, rng, messages):
        archetype = payload.get("archetype", "viewer")
        snippets = [s for _, s in payload.get("results", [])]
        return {
            "characteristics": [
                f"{archetype} viewers watch in short sessions",
                "high tolerance for abrupt openings",
                "low tolerance for repeated information",
            ],
            "preferences": [
                "concise storytelling",
                "fast-paced engagement",
                snippets[0][:80] if snippets else "clear emotional stakes",
            ],
            "viewing_expectations": [
                "a hook inside the first scene",
                "audio that tracks what is on screen",
            ],
        }

    def _task_analyze_critique(self, payload, rng, messages):
        critique = payload.get("critique", "")
        shot_ids = payload.get("shot_ids", [])
        scene_ids = payload.get("scene_ids", [])
        mentioned_shots = [s for s in shot_ids if s in critique] or shot_ids[:1]
        mentioned_scenes = [s for s in scene_ids if s in critique] or scene_ids[:1]
        issues = []
        if mentioned_scenes:
            issues.append(
                {
                    "dimension": "structural",
                    "description": f"scene {mentioned_scenes[0]} carries redundant coverage",
                    "ids": [mentioned_scenes[0]],
                    "recommendation": "drop the weakest shot in the scene",
                }
            )
        for sid in mentioned_shots[-1:]:
            issues.append(
                {
                    "dimension": "timing",
                    "description": f"shot {sid} lingers past its information",
                    "ids": [sid],
                    "recommendation": "tighten with acceleration",
                }
            )
        target = mentioned_shots[0] if mentioned_shots else ""
        if target:
            issues.append(
                {
                    "dimension": "audio_coherence",
                    "description": f"placeholder narration drifts from the action in {target}",
                    "ids": [target],
                    "recommendation": "rewrite the voice line against final picture",
                }
            )
        return {"issues": issues}

    def _task_plan_fine_cut(self, payload, rng, messages):
        issues = payload.get("issues", [])
        shots = payload.get("shots", [])
        min_seconds = float(payload.get("min_shot_seconds", 0.5))
        by_scene: dict[str, list[dict]] = {}
        for s in shots:
            by_scene.setdefault(s["scene_id"], []).append(s)
        accelerate: set[str] = set()
        remove: set[str] = set()
        for issue in issues:
            if issue.get("dimension") == "timing":
                for sid in issue.get("ids", []):
                    if any(s["id"] == sid for s in shots):
                        accelerate.add(sid)
            if issue.get("dimension") == "structural":
                for scene_id in issue.get("ids", []):
                    scene_shots = by_scene.get(scene_id, [])
                    if len(scene_shots) >= 3:
                        remove.add(scene_shots[-1]["id"])
        accelerate -= remove
        actions = []
        for sid in sorted(remove):
            actions.append({"kind": "remove", "shot_id": sid})
        for shot in shots:
            sid = shot["id"]
            if sid in remove:
                continue
            if sid in accelerate and shot["duration_s"] / 1.5 >= min_seconds:
                actions.append({"kind": "accelerate", "shot_id": sid, "speed": "3/2"})
            else:
                actions.append({"kind": "retain", "shot_id": sid})
        return {"actions": actions}

    # -- sound design ----------------------------------------------------------

    def _task_plan_scene_cues(self, payload, rng, messages):
        note = payload.get("rough_sound_note", "ambient tone")
        location = payload.get("location", "")
        objective = payload.get("narrative_objective", "")
        ambience = f"{note.split(',')[0]} near {location}".strip() if location else note
        mood = objective.split(":")[-1].strip().split(" ")[0:3]
        return {
            "ambience_query": ambience,
            "music_query": f"underscore {' '.join(mood)}".strip(),
        }

    def _task_plan_vo_cues(self, payload, rng, messages):
        cues = []
        for scene in payload.get("scenes", []):
            shots = scene.get("shots", [])
            if not shots:
                continue
            objective = scene.get("narrative_objective", "").rstrip(".")
            text = objective if objective else f"Scene {scene.get('id', '')} begins"
            cues.append({"shot_id": shots[0]["id"], "text": text + "."})
        return {"cues": cues}

    def _task_shorten_vo(self, payload, rng, messages):
        words = payload.get("text", "").split()
        keep = max(1, math.ceil(len(words) / 2))
        return {"text": " ".join(words[:keep])}


class MockEmbedding:
    """Hash-seeded pseudo-random unit vectors, deterministic per text."""

    def __init__(self, seed: int = 0, dim: int = 64):
        self.seed = seed
        self.dim = dim

    def embed(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        out = np.empty((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            if not text:
                raise ValueError("cannot embed empty text")
            gen = np.random.default_rng(_digest_int(str(self.seed), "embed", text))
            v = gen.standard_normal(self.dim)
            out[i] = v / np.linalg.norm(v)
        return out


class MockMediaReview:
    """Reads placeholder media files and answers caption/critique/event/score prompts."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def review_media(self, media: str, prompt: str) -> str:
        path = Path(media)
        if not path.exists():
            raise FileNotFoundError(f"media not found: {media}")
        data = path.read_bytes()
        if not data:
            raise ValueError(f"media unreadable or empty: {media}")
        media_hash = hashlib.sha256(data).hexdigest()
        task = ""
        m = re.match(r"task:\s*(\S+)", prompt)
        if m:
            task = m.group(1)
        rng = _rng(self.seed, "review", media_hash, prompt)
        if task == "caption-clip":
            return self._caption(data, rng)
        if task == "critique-rough-cut":
            return self._critique(data, rng)
        if task == "detect-sound-events":
            return self._sound_events(data, rng)
        if task == "judge-criterion":
            return self._judge(media_hash, prompt, rng)
        return f"Viewed media {media_hash[:10]}: a composed sequence with deliberate pacing."

    def _stub(self, data: bytes) -> Optional[dict]:
        try:
            obj = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError, ValueError):
            return None
        return obj if isinstance(obj, dict) else None

    def _caption(self, data: bytes, rng: random.Random) -> str:
        stub = self._stub(data) or {}
        frames = stub.get("frame_count", 150)
        rate = stub.get("frame_rate", 30)
        duration = frames / rate
        split = round(duration * (0.4 + 0.2 * rng.random()), 1)
        first = _pick(rng, VERB_PHRASES)
        second = _pick(rng, VISUAL_ELEMENTS)
        return (
            f"[0.0–{split}] The subject {first} while the camera holds.\n"
            f"[{split}–{duration:.1f}] Attention shifts to {second} as the beat lands."
        )

    def _critique(self, data: bytes, rng: random.Random) -> str:
        manifest = self._stub(data) or {}
        scenes = manifest.get("scenes", [])
        all_shots = [s for scene in scenes for s in scene.get("shots", [])]
        if not all_shots:
            return "The assembly is too sparse to judge; nothing holds attention."
        longest = max(all_shots, key=lambda s: (s["end_s"] - s["start_s"], s["shot_id"]))
        busiest = max(scenes, key=lambda sc: (len(sc.get("shots", [])), sc["scene_id"]))
        tail = busiest["shots"][-1] if busiest.get("shots") else all_shots[-1]
        return (
            f"As a viewer I lose the thread in the middle. {longest['shot_id']} lingers well past "
            f"its point and drags the pacing down. {busiest['scene_id']} repeats coverage; "
            f"{tail['shot_id']} adds nothing the earlier shots had not shown. The placeholder "
            f"narration also falls out of step with what is on screen around {longest['shot_id']}."
        )

    def _sound_events(self, data: bytes, rng: random.Random) -> str:
        stub = self._stub(data) or {}
        frames = stub.get("frame_count", 150)
        rate = stub.get("frame_rate", 30)
        duration = frames / rate
        lines = [
            f"EVENT at_s={duration * 0.25:.2f} dur_s=0.80 kind=foley text={_pick(rng, FOLEY_EVENTS)}",
            f"EVENT at_s={duration * 0.70:.2f} dur_s=0.60 kind=sfx text={_pick(rng, SFX_EVENTS)}",
        ]
        return "\n".join(lines)

    def _judge(self, media_hash: str, prompt: str, rng: random.Random) -> str:
        m = re.search(r"criterion:\s*(\S+)", prompt)
        code = m.group(1) if m else "OQ"
        score = 1.0 + (_digest_int(str(self.seed), "judge", media_hash, code) % 9) * 0.5
        return f"score: {score}\nrationale: consistent with the rubric anchor for this level."


class MockVideo:
    """Writes a small byte-stable placeholder clip file per prompt."""

    WIDTH, HEIGHT, FRAMES, RATE = 1920, 1080, 153, 30

    limiter = None  # shared in-flight semaphore, set by ProviderSuite.limited

    def __init__(self, media_root: Path, seed: int = 0):
        self.media_root = Path(media_root)
        self.seed = seed

    def generate_video(self, prompt: str, reference_images: list[str], duration_hint: float) -> GeneratedClip:
        if not prompt or not prompt.strip():
            raise ValueError("prompt must be non-empty")
        with self.limiter if self.limiter is not None else nullcontext():
            return self._generate(prompt, reference_images, duration_hint)

    def _generate(self, prompt: str, reference_images: list[str], duration_hint: float) -> GeneratedClip:
        if "[reject]" in prompt:
            raise ContentRejected(f"prompt refused by provider policy: {prompt[:60]}")
        prompt_hash = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        rng = _rng(self.seed, "video", prompt_hash)
        stub = {
            "kind": "clip-stub",
            "prompt_sha256": prompt_hash,
            "fill_rgb": [rng.randrange(256), rng.randrange(256), rng.randrange(256)],
            "width": self.WIDTH,
            "height": self.HEIGHT,
            "frame_count": self.FRAMES,
            "frame_rate": self.RATE,
            "reference_images": sorted(Path(p).name for p in reference_images),
        }
        path = self.media_root / "video" / f"{prompt_hash[:16]}.clip.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(canonical_json(stub).encode("utf-8"))
        return GeneratedClip(
            shot_id="",
            media_path=str(path),
            width=self.WIDTH,
            height=self.HEIGHT,
            frame_count=self.FRAMES,
            frame_rate=self.RATE,
        )


class MockVoice:
    """Renders each word as a 0.4 s tone segment into a mono 48 kHz WAV."""

    SAMPLE_RATE = 48000
    SECONDS_PER_WORD = Fraction(2, 5)

    def __init__(self, media_root: Path, seed: int = 0):
        self.media_root = Path(media_root)
        self.seed = seed

    def synthesize_voice(self, text: str, voice_id: str) -> tuple[str, Fraction]:
        words = text.split()
        if not words:
            raise ValueError("text must be non-empty")
        sr = self.SAMPLE_RATE
        seg_len = int(sr * self.SECONDS_PER_WORD)
        fade = int(sr * 0.01)
        pieces = []
        for word in words:
            freq = 180.0 + (_digest_int(str(self.seed), "voice", voice_id, word) % 480)
            t = np.arange(seg_len) / sr
            seg = 0.28 * np.sin(2 * np.pi * freq * t)
            seg[:fade] *= np.linspace(0.0, 1.0, fade)
            seg[-fade:] *= np.linspace(1.0, 0.0, fade)
            pieces.append(seg)
        signal = np.concatenate(pieces)
        digest = hashlib.sha256(f"{self.seed}|{voice_id}|{text}".encode("utf-8")).hexdigest()
        path = self.media_root / "audio" / "vo" / f"{digest[:16]}.wav"
        path.parent.mkdir(parents=True, exist_ok=True)
        pcm = np.clip(np.round(signal * 32767.0), -32768, 32767).astype("<i2")
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(sr)
            wf.writeframes(pcm.tobytes())
        return str(path), self.SECONDS_PER_WORD * len(words)


class MockSearch:
    """Fixture-flavored search results derived from the query."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def web_search(self, query: str) -> list[tuple[str, str]]:
        if not query or not query.strip():
            raise ValueError("query must be non-empty")
        rng = _rng(self.seed, "search", query)
        n = 3 + rng.randrange(3)
        results = []
        for i in range(n):
            results.append(
                (
                    f"What {query} audiences respond to, part {i + 1}",
                    f"Survey notes: {query} viewers favor {_pick(rng, ['tight openings', 'clear stakes', 'fast escalation', 'short scenes'])} "
                    f"and disengage from {_pick(rng, ['repetition', 'slow establishing shots', 'unanchored narration'])}.",
                )
            )
        return results[:10]


def mock_suite(media_root: Path, seed: int = 0, embedding_dim: int = 64, concurrency: int = 4):
    """Construct the full offline provider set sharing one seed."""
    from .base import ProviderSuite

    return ProviderSuite.limited(
        limit=concurrency,
        chat=MockChat(seed),
        embedding=MockEmbedding(seed, dim=embedding_dim),
        media_review=MockMediaReview(seed),
        video=MockVideo(media_root, seed),
        voice=MockVoice(media_root, seed),
        search=MockSearch(seed),
    )
