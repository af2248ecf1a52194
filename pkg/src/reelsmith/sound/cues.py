"""Multi-scale cue planning, loudness normalization, ducking, and cue-sheet assembly.

Audio kinds bind to temporal scales: ambience and music span whole scenes,
voice-over aligns to shots, foley and SFX sit at offsets inside a shot. Cue
timing is exact (Fraction seconds); only gain math is floating point.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from ..model import (
    AudioKind,
    GeneratedClip,
    RationalTime,
    SceneBlock,
    Timeline,
    TimelineClip,
    validate_timeline,
)
from ..prompts import build_messages, load_template
from ..providers.base import MalformedOutput
from .library import AudioLibrary
from .loudness import measure_loudness
from .wavio import read_wav

log = logging.getLogger(__name__)

SCALE_SCENE = "scene"
SCALE_SHOT = "shot"
SCALE_INTRA_SHOT = "intra_shot"

SCALE_KINDS = {
    SCALE_SCENE: {AudioKind.AMBIENCE, AudioKind.MUSIC},
    SCALE_SHOT: {AudioKind.VOICE_OVER},
    SCALE_INTRA_SHOT: {AudioKind.FOLEY, AudioKind.SFX},
}

# Loudness targets per kind; voice and background levels are the published
# mixing defaults, foley/sfx sit between them.
DEFAULT_TARGETS_LUFS = {
    AudioKind.VOICE_OVER: -16.0,
    AudioKind.AMBIENCE: -28.0,
    AudioKind.MUSIC: -28.0,
    AudioKind.FOLEY: -20.0,
    AudioKind.SFX: -20.0,
}
TRUE_PEAK_CEILING_DBFS = -1.0

# Voice-intelligibility treatment applied to background cues under voice-over.
DUCK_GAIN_DB = -6.0
DUCK_ATTACK_MS = 50.0
DUCK_RELEASE_MS = 300.0
EQ_CUT_DB = -6.0
EQ_CENTER_HZ = 2000.0
EQ_Q = 1.0

SCENE_CUES_SCHEMA = {
    "type": "object",
    "properties": {
        "ambience_query": {"type": ["string", "null"]},
        "music_query": {"type": ["string", "null"]},
    },
    "required": ["ambience_query", "music_query"],
}
VO_CUES_SCHEMA = {
    "type": "object",
    "properties": {
        "cues": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "shot_id": {"type": "string", "minLength": 1},
                    "text": {"type": "string", "minLength": 1},
                },
                "required": ["shot_id", "text"],
            },
        }
    },
    "required": ["cues"],
}
SHORTEN_SCHEMA = {
    "type": "object",
    "properties": {"text": {"type": "string", "minLength": 1}},
    "required": ["text"],
}

EVENT_LINE = re.compile(
    r"^EVENT\s+at_s=(\d+(?:\.\d+)?)\s+dur_s=(\d+(?:\.\d+)?)\s+kind=(foley|sfx)\s+text=(.+)$"
)


@dataclass
class AudioCue:
    """One planned sound event bound to a scene, shot, or intra-shot moment."""

    cue_id: str
    kind: AudioKind
    scale: str
    target_id: str
    source: str
    media_path: str
    start_s: Fraction
    duration_s: Fraction
    target_offset_s: Optional[Fraction] = None
    source_duration_s: Optional[Fraction] = None
    gain_db: float = 0.0
    filters: list[dict] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        allowed = SCALE_KINDS.get(self.scale)
        if allowed is None:
            raise ValueError(f"cue {self.cue_id}: unknown scale {self.scale!r}")
        if self.kind not in allowed:
            raise ValueError(
                f"cue {self.cue_id}: kind {self.kind.value} not allowed at scale {self.scale}"
            )
        if self.duration_s <= 0:
            raise ValueError(f"cue {self.cue_id}: non-positive duration")

    def end_s(self) -> Fraction:
        return self.start_s + self.duration_s


@dataclass(frozen=True)
class ShotEditInfo:
    """How a shot maps from source time to the locked timeline."""

    shot_id: str
    timeline_start_s: Fraction
    timeline_end_s: Fraction
    source_start_s: Fraction
    speed: Fraction

    @classmethod
    def from_clip(cls, clip: TimelineClip) -> "ShotEditInfo":
        return cls(
            shot_id=clip.shot_id() or "",
            timeline_start_s=clip.timeline_start.to_seconds(),
            timeline_end_s=clip.timeline_end().to_seconds(),
            source_start_s=clip.source_start.to_seconds(),
            speed=clip.speed_factor,
        )


def _scene_payload(block: SceneBlock) -> dict:
    return {
        "scene_id": block.id,
        "location": block.location,
        "time_of_day": block.time_of_day,
        "narrative_objective": block.narrative_objective,
        "rough_sound_note": block.rough_sound_note,
        "visual_elements": block.visual_elements,
    }


def plan_scene_cues(
    block: SceneBlock,
    scene_interval: tuple[Fraction, Fraction],
    library: AudioLibrary,
    embedder: Any,
    chat: Any,
) -> list[AudioCue]:
    """At most one ambience and one music cue spanning the scene's interval."""
    start, end = scene_interval
    length = end - start
    if length <= 0:
        return []
    value = chat.chat_complete(
        build_messages(load_template("sound/scene_cues.txt"), _scene_payload(block)),
        schema=SCENE_CUES_SCHEMA,
    )
    cues: list[AudioCue] = []
    for kind, query in ((AudioKind.AMBIENCE, value["ambience_query"]), (AudioKind.MUSIC, value["music_query"])):
        if not query:
            continue
        hits = library.search(kind, query, embedder, k=1)
        if not hits.hits:
            log.warning("no %s assets in library for scene %s; cue omitted", kind.value, block.id)
            continue
        asset = library.asset(hits.hits[0][0])
        duration = length
        flags = []
        asset_len = Fraction(asset.duration_seconds).limit_denominator(48000)
        if asset_len < duration:
            duration = asset_len
            flags.append("truncated_to_asset")
            log.warning("asset %s shorter than scene %s; cue truncated", asset.asset_id, block.id)
        cues.append(
            AudioCue(
                cue_id=f"{kind.value}_{block.id}",
                kind=kind,
                scale=SCALE_SCENE,
                target_id=block.id,
                source=asset.asset_id,
                media_path=asset.media_path,
                start_s=start,
                duration_s=duration,
                source_duration_s=asset_len,
                flags=flags,
            )
        )
    return cues


def plan_vo_cues(
    blocks: list[SceneBlock],
    captions: dict[str, str],
    report: Any,
    timeline: Timeline,
    chat: Any,
    voice: Any,
    voice_id: str = "narrator",
) -> list[AudioCue]:
    """Shot-level narration: write lines, synthesize, and fit them to their shots.

    A rendered line longer than its shot is re-shortened once through the
    provider, then clamped to the shot interval with a warning.
    """
    intervals = timeline.shot_intervals()
    scenes_payload = []
    for block in sorted(blocks, key=lambda b: b.index):
        shots = [
            {
                "id": s.id,
                "start_s": float(intervals[s.id][0]),
                "end_s": float(intervals[s.id][1]),
                "caption": captions.get(s.id, ""),
            }
            for s in block.shot_prompts
            if s.id in intervals
        ]
        if shots:
            scenes_payload.append(
                {"id": block.id, "narrative_objective": block.narrative_objective, "shots": shots}
            )
    issues = [
        {"dimension": i.dimension, "description": i.description, "ids": i.ids}
        for i in getattr(report, "issues", [])
    ]
    value = chat.chat_complete(
        build_messages(load_template("sound/vo_cues.txt"), {"scenes": scenes_payload, "issues": issues}),
        schema=VO_CUES_SCHEMA,
    )
    cues: list[AudioCue] = []
    for i, raw in enumerate(value["cues"]):
        shot_id = raw["shot_id"]
        if shot_id not in intervals:
            log.warning("voice cue names unknown shot %s; dropped", shot_id)
            continue
        start, end = intervals[shot_id]
        available = end - start
        text = raw["text"]
        path, duration = voice.synthesize_voice(text, voice_id)
        flags: list[str] = []
        if Fraction(duration) > available:
            shorter = chat.chat_complete(
                build_messages(
                    load_template("sound/shorten_vo.txt"),
                    {"text": text, "max_seconds": float(available)},
                ),
                schema=SHORTEN_SCHEMA,
            )
            text = shorter["text"]
            path, duration = voice.synthesize_voice(text, voice_id)
            flags.append("reshortened")
        used = Fraction(duration)
        if used > available:
            used = available
            flags.append("clamped_to_shot")
            log.warning("voice cue for %s still over-long after reprompt; clamped", shot_id)
        cues.append(
            AudioCue(
                cue_id=f"vo_{shot_id}",
                kind=AudioKind.VOICE_OVER,
                scale=SCALE_SHOT,
                target_id=shot_id,
                source=f"voice:{Path(path).name}",
                media_path=path,
                start_s=start,
                duration_s=used,
                source_duration_s=Fraction(duration),
                flags=flags,
            )
        )
    return cues


def parse_sound_events(text: str) -> list[tuple[float, float, str, str]]:
    events = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        m = EVENT_LINE.match(line)
        if not m:
            raise MalformedOutput(f"unparseable sound event line: {line!r}")
        events.append((float(m.group(1)), float(m.group(2)), m.group(3), m.group(4)))
    return events


def plan_intra_shot_cues(
    clip: GeneratedClip,
    edit: ShotEditInfo,
    library: AudioLibrary,
    embedder: Any,
    media_review: Any,
) -> list[AudioCue]:
    """Foley/SFX events detected in source time, mapped onto the edited shot.

    A source-time event at `at_s` lands at timeline offset
    (at_s - trim_start) / speed; events outside the kept range are dropped.
    """
    text = media_review.review_media(clip.media_path, load_template("sound/sound_events.txt"))
    events = parse_sound_events(text)
    shot_len = edit.timeline_end_s - edit.timeline_start_s
    kept_source = shot_len * edit.speed
    cues: list[AudioCue] = []
    for i, (at_s, dur_s, kind_name, desc) in enumerate(events):
        source_pos = Fraction(at_s).limit_denominator(1000) - edit.source_start_s
        if source_pos < 0 or source_pos >= kept_source:
            log.warning(
                "sound event at %.2fs falls outside the kept range of %s; dropped", at_s, edit.shot_id
            )
            continue
        offset = source_pos / edit.speed
        kind = AudioKind(kind_name)
        hits = library.search(kind, desc, embedder, k=1)
        if not hits.hits:
            log.warning("no %s assets for event %r; cue omitted", kind_name, desc)
            continue
        asset = library.asset(hits.hits[0][0])
        duration = min(
            Fraction(dur_s).limit_denominator(1000),
            Fraction(asset.duration_seconds).limit_denominator(48000),
            shot_len - offset,
        )
        if duration <= 0:
            continue
        cues.append(
            AudioCue(
                cue_id=f"{kind.value}_{edit.shot_id}_{i}",
                kind=kind,
                scale=SCALE_INTRA_SHOT,
                target_id=edit.shot_id,
                source=asset.asset_id,
                media_path=asset.media_path,
                start_s=edit.timeline_start_s + offset,
                duration_s=duration,
                target_offset_s=offset,
                source_duration_s=Fraction(asset.duration_seconds).limit_denominator(48000),
            )
        )
    return cues


# -- mixing ---------------------------------------------------------------------


def _cue_samples(cue: AudioCue):
    data, rate = read_wav(cue.media_path)
    n = int(cue.duration_s * rate)
    return data[:n], rate


def normalize_track(cues: list[AudioCue], target_lufs: float) -> dict[str, float]:
    """Assign per-cue gains hitting the target loudness under a -1 dBFS true-peak cap."""
    gains: dict[str, float] = {}
    for cue in cues:
        samples, rate = _cue_samples(cue)
        reading = measure_loudness(samples, rate)
        if reading.below_gate:
            cue.gain_db = 0.0
            cue.flags.append("below_gate")
            gains[cue.cue_id] = 0.0
            continue
        gain = target_lufs - reading.integrated_lufs
        if reading.true_peak_dbfs + gain > TRUE_PEAK_CEILING_DBFS:
            gain = TRUE_PEAK_CEILING_DBFS - reading.true_peak_dbfs
            cue.flags.append("peak_limited")
        cue.gain_db = gain
        gains[cue.cue_id] = gain
    return gains


def normalize_cues(cues: list[AudioCue], targets: dict[AudioKind, float] | None = None) -> dict[str, float]:
    targets = targets or DEFAULT_TARGETS_LUFS
    gains: dict[str, float] = {}
    for kind in AudioKind:
        subset = [c for c in cues if c.kind == kind]
        if subset:
            gains.update(normalize_track(subset, targets[kind]))
    return gains


def _merge_intervals(intervals: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    merged: list[tuple[Fraction, Fraction]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def harmonize_frequencies(cues: list[AudioCue]) -> int:
    """Schedule an EQ cut plus a duck on background cues wherever voice overlaps.

    Returns the number of overlap intervals treated. Filter intervals are in
    timeline seconds and ride along as clip metadata through export.
    """
    vo_intervals = _merge_intervals(
        [(c.start_s, c.end_s()) for c in cues if c.kind is AudioKind.VOICE_OVER]
    )
    treated = 0
    for cue in cues:
        if cue.kind not in (AudioKind.AMBIENCE, AudioKind.MUSIC):
            continue
        for vo_start, vo_end in vo_intervals:
            lo = max(cue.start_s, vo_start)
            hi = min(cue.end_s(), vo_end)
            if lo >= hi:
                continue
            cue.filters.append(
                {
                    "type": "eq_bell",
                    "center_hz": EQ_CENTER_HZ,
                    "gain_db": EQ_CUT_DB,
                    "q": EQ_Q,
                    "start_s": float(lo),
                    "end_s": float(hi),
                }
            )
            cue.filters.append(
                {
                    "type": "duck",
                    "gain_db": DUCK_GAIN_DB,
                    "attack_ms": DUCK_ATTACK_MS,
                    "release_ms": DUCK_RELEASE_MS,
                    "start_s": float(lo),
                    "end_s": float(hi),
                }
            )
            treated += 1
    return treated


def build_cue_sheet(cues: list[AudioCue], timeline: Timeline) -> Timeline:
    """Place cues on their kind's track; same-kind overlaps truncate the earlier cue."""
    out = Timeline(
        name=timeline.name,
        global_rate=timeline.global_rate,
        video_track=[replace(c, metadata=dict(c.metadata)) for c in timeline.video_track],
        audio_tracks={},
    )
    for kind in AudioKind:
        track: list[TimelineClip] = []
        ordered = sorted((c for c in cues if c.kind == kind), key=lambda c: (c.start_s, c.cue_id))
        placed: list[AudioCue] = []
        for cue in ordered:
            if placed and cue.start_s < placed[-1].end_s():
                prev = placed[-1]
                new_len = cue.start_s - prev.start_s
                log.warning("cue %s overlaps %s; earlier cue truncated", cue.cue_id, prev.cue_id)
                if new_len <= 0:
                    prev.flags.append("dropped_overlap")
                    placed.pop()
                else:
                    prev.duration_s = new_len
                    prev.flags.append("truncated_overlap")
            placed.append(cue)
        for cue in placed:
            track.append(
                TimelineClip(
                    source=cue.media_path,
                    source_start=RationalTime(0, 1),
                    source_duration_used=RationalTime.from_seconds(cue.duration_s),
                    timeline_start=RationalTime.from_seconds(cue.start_s),
                    gain_db=cue.gain_db,
                    source_duration=(
                        RationalTime.from_seconds(cue.source_duration_s)
                        if cue.source_duration_s is not None
                        else None
                    ),
                    metadata={
                        "cue_id": cue.cue_id,
                        "cue_kind": cue.kind.value,
                        "cue_scale": cue.scale,
                        "cue_source": cue.source,
                        "filters": list(cue.filters),
                        "flags": list(cue.flags),
                    },
                )
            )
        out.audio_tracks[kind] = track
    violations = validate_timeline(out)
    if violations:
        raise RuntimeError(f"cue sheet violates timeline invariants: {violations}")
    return out
