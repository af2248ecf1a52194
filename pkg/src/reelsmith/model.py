"""Shared domain types: project input, scene/shot records, and the multi-track timeline.

All durations and positions are exact rationals; floating point is confined to
the DSP and metrics modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional


class AudioKind(str, Enum):
    """The five audio layers, in fixed track order."""

    AMBIENCE = "ambience"
    MUSIC = "music"
    VOICE_OVER = "voice_over"
    FOLEY = "foley"
    SFX = "sfx"


AUDIO_TRACK_ORDER = (
    AudioKind.AMBIENCE,
    AudioKind.MUSIC,
    AudioKind.VOICE_OVER,
    AudioKind.FOLEY,
    AudioKind.SFX,
)


class ShotType(str, Enum):
    EXTREME_WIDE = "extreme-wide"
    WIDE = "wide"
    MEDIUM = "medium"
    CLOSE_UP = "close-up"
    EXTREME_CLOSE_UP = "extreme-close-up"
    INSERT = "insert"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class RationalTime:
    """An exact time as an integer count over an integer rate (counts per second).

    Two values compare by cross-multiplication, so (153, 30) == (51, 10); no
    floating point is involved anywhere.
    """

    value: int
    rate: int

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or not isinstance(self.rate, int):
            raise TypeError("RationalTime fields must be integers")
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    @classmethod
    def from_seconds(cls, seconds: Fraction | int) -> "RationalTime":
        frac = Fraction(seconds)
        return cls(frac.numerator, frac.denominator)

    def to_seconds(self) -> Fraction:
        return Fraction(self.value, self.rate)

    def rescaled(self, rate: int) -> "RationalTime":
        """Return the same instant expressed at `rate`; raises if inexact."""
        frac = self.to_seconds() * rate
        if frac.denominator != 1:
            raise ValueError(f"{self} is not representable at rate {rate}")
        return RationalTime(frac.numerator, rate)

    def _reduced(self) -> "RationalTime":
        g = math.gcd(abs(self.value), self.rate)
        if g <= 1:
            return self
        return RationalTime(self.value // g, self.rate // g)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalTime):
            return NotImplemented
        return self.value * other.rate == other.value * self.rate

    def __hash__(self) -> int:
        return hash(self.to_seconds())

    def __lt__(self, other: "RationalTime") -> bool:
        return self.value * other.rate < other.value * self.rate

    def __le__(self, other: "RationalTime") -> bool:
        return self.value * other.rate <= other.value * self.rate

    def __gt__(self, other: "RationalTime") -> bool:
        return other < self

    def __ge__(self, other: "RationalTime") -> bool:
        return other <= self

    def __add__(self, other: "RationalTime") -> "RationalTime":
        if self.rate == other.rate:
            return RationalTime(self.value + other.value, self.rate)
        return RationalTime.from_seconds(self.to_seconds() + other.to_seconds())

    def __sub__(self, other: "RationalTime") -> "RationalTime":
        if self.rate == other.rate:
            return RationalTime(self.value - other.value, self.rate)
        return RationalTime.from_seconds(self.to_seconds() - other.to_seconds())

    def div(self, factor: Fraction) -> "RationalTime":
        """Exact division, e.g. a duration divided by a speed factor."""
        if factor <= 0:
            raise ValueError("factor must be positive")
        f = Fraction(factor)
        return RationalTime(self.value * f.denominator, self.rate * f.numerator)._reduced()

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"RationalTime({self.value}, {self.rate})"


@dataclass(frozen=True)
class Reference:
    """A named character or location reference image."""

    name: str
    image_path: str


@dataclass
class ProjectInput:
    theme_text: str
    character_refs: list[Reference] = field(default_factory=list)
    location_refs: list[Reference] = field(default_factory=list)
    target_audience: Optional[str] = None

    def reference_names(self) -> set[str]:
        return {r.name for r in self.character_refs} | {r.name for r in self.location_refs}

    def reference_by_name(self, name: str) -> Optional[Reference]:
        for ref in list(self.character_refs) + list(self.location_refs):
            if ref.name == name:
                return ref
        return None


@dataclass
class ShotSpec:
    """One shot's full generation prompt, including its camera vocabulary."""

    id: str
    scene_id: str
    content_prompt: str
    shot_type: ShotType = ShotType.UNSPECIFIED
    camera_movement: str = ""
    camera_angle: str = ""
    atmosphere: str = ""
    reference_bindings: list[str] = field(default_factory=list)


@dataclass
class SceneBlock:
    """A narrative unit continuous in one location and timeframe; the retrieval query unit."""

    id: str
    index: int
    shot_prompts: list[ShotSpec]
    time_of_day: str = ""
    location: str = ""
    characters: list[str] = field(default_factory=list)
    visual_elements: list[str] = field(default_factory=list)
    narrative_objective: str = ""
    rough_sound_note: str = ""

    def is_replanned(self) -> bool:
        return all(s.shot_type is not ShotType.UNSPECIFIED for s in self.shot_prompts)


@dataclass
class GeneratedClip:
    shot_id: str
    media_path: str
    width: int = 1920
    height: int = 1080
    frame_count: int = 153
    frame_rate: int = 30
    text_description: str = ""

    def duration(self) -> RationalTime:
        return RationalTime(self.frame_count, self.frame_rate)


@dataclass
class TimelineClip:
    """One item on a track: a slice of source media placed at a timeline position.

    `source_range` is in source-media time; the clip occupies
    `source_range duration / speed_factor` of timeline time starting at
    `timeline_start`. `source_duration` is the full extent of the source media
    when known, used to validate trims without probing files.
    """

    source: str
    source_start: RationalTime
    source_duration_used: RationalTime
    timeline_start: RationalTime
    speed_factor: Fraction = Fraction(1)
    gain_db: Optional[float] = None
    source_duration: Optional[RationalTime] = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        # every clip carries a filters list in its exported vendor metadata
        self.metadata.setdefault("filters", [])

    def effective_duration(self) -> RationalTime:
        return self.source_duration_used.div(self.speed_factor)

    def timeline_end(self) -> RationalTime:
        return self.timeline_start + self.effective_duration()

    def shot_id(self) -> Optional[str]:
        return self.metadata.get("shot_id")

    def scene_id(self) -> Optional[str]:
        return self.metadata.get("scene_id")


@dataclass
class Timeline:
    """Multi-track edit model: one video track plus one track per audio kind."""

    name: str
    global_rate: int = 30
    video_track: list[TimelineClip] = field(default_factory=list)
    audio_tracks: dict[AudioKind, list[TimelineClip]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for kind in AUDIO_TRACK_ORDER:
            self.audio_tracks.setdefault(kind, [])

    def duration(self) -> RationalTime:
        if not self.video_track:
            return RationalTime(0, self.global_rate)
        return self.video_track[-1].timeline_end()

    def video_clip_for_shot(self, shot_id: str) -> Optional[TimelineClip]:
        for clip in self.video_track:
            if clip.shot_id() == shot_id:
                return clip
        return None

    def shot_intervals(self) -> dict[str, tuple[Fraction, Fraction]]:
        """Timeline interval (seconds) per shot id on the video track."""
        out: dict[str, tuple[Fraction, Fraction]] = {}
        for clip in self.video_track:
            sid = clip.shot_id()
            if sid is not None:
                out[sid] = (clip.timeline_start.to_seconds(), clip.timeline_end().to_seconds())
        return out

    def scene_intervals(self) -> dict[str, tuple[Fraction, Fraction]]:
        """Timeline interval (seconds) per scene id, spanning that scene's clips."""
        out: dict[str, tuple[Fraction, Fraction]] = {}
        for clip in self.video_track:
            scene = clip.scene_id()
            if scene is None:
                continue
            start = clip.timeline_start.to_seconds()
            end = clip.timeline_end().to_seconds()
            if scene in out:
                lo, hi = out[scene]
                out[scene] = (min(lo, start), max(hi, end))
            else:
                out[scene] = (start, end)
        return out


@dataclass
class StageLogEntry:
    stage: str
    timestamp: str
    transcript_digest: str = ""


# Pipeline artifact slots in upstream-to-downstream order. An artifact may be
# present only when everything before it is present.
ARTIFACT_CHAIN = (
    "synopsis",
    "simplified",
    "detailed",
    "scene_blocks",
    "generated_clips",
    "timeline",
    "audience_profile",
    "review_report",
    "edit_plan",
    "cue_sheet",
    "score_card",
)


@dataclass
class ProjectState:
    """Everything persisted between pipeline stages.

    Stage artifacts start as None and are filled in pipeline order; `timeline`
    holds the current cut (rough, then picture lock, then mixed).
    """

    input: ProjectInput
    synopsis: Any = None
    simplified: Any = None
    detailed: Any = None
    scene_blocks: Optional[list[SceneBlock]] = None
    generated_clips: Optional[list[GeneratedClip]] = None
    timeline: Optional[Timeline] = None
    audience_profile: Any = None
    review_report: Any = None
    edit_plan: Any = None
    cue_sheet: Any = None
    score_card: Any = None
    stage_log: list[StageLogEntry] = field(default_factory=list)

    def completed_stages(self) -> list[str]:
        return [entry.stage for entry in self.stage_log]


def _validate_input(inp: ProjectInput, out: list[str]) -> None:
    if not inp.theme_text or not inp.theme_text.strip():
        out.append("ProjectInput.theme_text: empty after whitespace trim")
    names: list[str] = [r.name for r in inp.character_refs] + [r.name for r in inp.location_refs]
    seen: set[str] = set()
    for name in names:
        if name in seen:
            out.append(f"ProjectInput: duplicate reference name {name!r}")
        seen.add(name)


def _validate_blocks(blocks: list[SceneBlock], inp: ProjectInput, out: list[str]) -> None:
    indices = [b.index for b in blocks]
    if indices != list(range(len(blocks))):
        out.append(f"SceneBlock indices not contiguous from 0: {indices}")
    known = inp.reference_names()
    for block in blocks:
        if not block.shot_prompts:
            out.append(f"SceneBlock {block.id}: shot_prompts empty")
        for name in block.characters:
            if name not in known:
                out.append(f"SceneBlock {block.id}: unresolved character {name!r}")
        for shot in block.shot_prompts:
            if not shot.content_prompt.strip():
                out.append(f"ShotSpec {shot.id}: empty content_prompt")
            if shot.scene_id != block.id:
                out.append(f"ShotSpec {shot.id}: scene_id {shot.scene_id!r} != block {block.id!r}")


def _validate_clips(clips: list[GeneratedClip], out: list[str]) -> None:
    for clip in clips:
        if clip.frame_count <= 0:
            out.append(f"GeneratedClip {clip.shot_id}: frame_count {clip.frame_count} <= 0")
        if clip.frame_rate <= 0:
            out.append(f"GeneratedClip {clip.shot_id}: frame_rate {clip.frame_rate} <= 0")
        if clip.media_path and not Path(clip.media_path).exists():
            out.append(f"GeneratedClip {clip.shot_id}: media missing at {clip.media_path}")


def _clip_label(clip: TimelineClip, idx: int) -> str:
    return clip.shot_id() or clip.metadata.get("cue_id") or f"#{idx}:{clip.source}"


def _validate_track(clips: list[TimelineClip], track_name: str, gapless: bool, out: list[str]) -> None:
    zero = RationalTime(0, 1)
    for i, clip in enumerate(clips):
        if clip.source_duration_used.value <= 0:
            out.append(f"{track_name} clip {_clip_label(clip, i)}: non-positive duration")
        if clip.timeline_start < zero:
            out.append(f"{track_name} clip {_clip_label(clip, i)}: negative timeline_start")
        if clip.speed_factor <= 0:
            out.append(f"{track_name} clip {_clip_label(clip, i)}: non-positive speed_factor")
        if clip.source_duration is not None:
            if clip.source_start + clip.source_duration_used > clip.source_duration:
                out.append(
                    f"{track_name} clip {_clip_label(clip, i)}: source_range exceeds source duration"
                )
    for prev, (i, cur) in zip(clips, enumerate(clips[1:], start=1)):
        prev_end = prev.timeline_end()
        if cur.timeline_start < prev_end:
            out.append(
                f"{track_name}: clips {_clip_label(prev, i - 1)} and {_clip_label(cur, i)} overlap"
            )
        elif gapless and cur.timeline_start != prev_end:
            out.append(
                f"{track_name}: gap between {_clip_label(prev, i - 1)} and {_clip_label(cur, i)}"
            )
    if gapless and clips and clips[0].timeline_start != zero:
        out.append(f"{track_name}: first clip does not start at 0")


def validate_timeline(timeline: Timeline, out: Optional[list[str]] = None) -> list[str]:
    violations = out if out is not None else []
    if timeline.global_rate <= 0:
        violations.append(f"Timeline {timeline.name}: non-positive global_rate")
    _validate_track(timeline.video_track, "video", gapless=True, out=violations)
    for kind in AUDIO_TRACK_ORDER:
        _validate_track(timeline.audio_tracks.get(kind, []), kind.value, gapless=False, out=violations)
    return violations


def validate_project(state: ProjectState) -> list[str]:
    """Check every core invariant; violations are returned, never raised."""
    out: list[str] = []
    _validate_input(state.input, out)
    if state.scene_blocks is not None:
        _validate_blocks(state.scene_blocks, state.input, out)
    if state.generated_clips is not None:
        _validate_clips(state.generated_clips, out)
    if state.timeline is not None:
        validate_timeline(state.timeline, out)
    present_after_gap = False
    for name in reversed(ARTIFACT_CHAIN):
        if getattr(state, name) is not None:
            present_after_gap = True
        elif present_after_gap:
            out.append(f"ProjectState: downstream artifacts present but {name!r} missing")
    return out


def repack_video_track(clips: Iterable[TimelineClip], global_rate: int) -> list[TimelineClip]:
    """Lay clips out gaplessly from zero, preserving order; returns new clip objects."""
    cursor = RationalTime(0, global_rate)
    packed: list[TimelineClip] = []
    for clip in clips:
        packed.append(replace(clip, timeline_start=cursor, metadata=dict(clip.metadata)))
        cursor = cursor + packed[-1].effective_duration()
    return packed
